//! The linearized characteristic equation `λ + ηa + ηb e^{-λτ} = 0`.
//!
//! Closed-form results (Hopf point, stability tests) live next to a numerical
//! root finder based on the argument principle, which the tests use as an
//! independent check on every closed-form verdict.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::TaylorCoefficients;
use crate::{Error, Result};

/// Location of the first (n = 0) Hopf crossing as η increases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    /// Critical gain η_c.
    pub eta_c: f64,
    /// Crossing frequency ω₀ in rad per unit time.
    pub omega0: f64,
    /// `2π / ω₀`.
    pub period: f64,
    /// `ω₀ / 2π`.
    pub frequency: f64,
    /// `Re dλ/dη` at η_c.
    pub alpha_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityVerdict {
    Stable,
    /// Exactly on the boundary η = η_c.
    Critical,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRoot {
    pub re: f64,
    pub im: f64,
    /// `|λ + ηa + ηb e^{-λτ}|` at the polished root.
    pub residual: f64,
}

/// Rectangle `[re_min, re_max] × [0, im_max]` of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl RootSearchRegion {
    /// A region guaranteed to hold the rightmost root.
    ///
    /// Every root with positive real part satisfies `|λ + ηa| <= ηb`, so
    /// `Re λ <= η(b - a)`. The decay rate never exceeds `ηa + 1/τ`, and the
    /// rightmost root lies on the principal branch with `|Im λ| τ < π`.
    pub fn around_rightmost(coeffs: &TaylorCoefficients, eta: f64) -> Self {
        let (a, b, tau) = (eta * coeffs.a(), eta * coeffs.b(), coeffs.tau);
        let re_max = (b - a).max(0.0) + b.abs() + 1.0;
        if tau > 0.0 {
            RootSearchRegion {
                re_min: -(a + b.abs() + 1.0 / tau) - 1.0,
                re_max,
                im_max: (2.0 * b.abs()).max(1.05 * PI / tau) + 1.0,
            }
        } else {
            RootSearchRegion {
                re_min: -(a + b).abs() - 1.0,
                re_max,
                im_max: 2.0 * b.abs() + 1.0,
            }
        }
    }
}

fn require_linear_ok(coeffs: &TaylorCoefficients) -> Result<(f64, f64)> {
    let (a, b) = (coeffs.a(), coeffs.b());
    if !(b > a) || !(a >= 0.0) {
        return Err(Error::DegenerateLinearization { a, b });
    }
    if !(coeffs.tau > 0.0) {
        return Err(Error::InvariantViolation(format!(
            "tau > 0 required, got {}",
            coeffs.tau
        )));
    }
    Ok((a, b))
}

/// Largest `ητ` keeping the equilibrium stable: `acos(-a/b) / √(b² - a²)`.
pub fn stability_bound(coeffs: &TaylorCoefficients) -> Result<f64> {
    let (a, b) = require_linear_ok(coeffs)?;
    Ok((-a / b).acos() / (b * b - a * a).sqrt())
}

pub fn critical_eta(coeffs: &TaylorCoefficients) -> Result<HopfPoint> {
    let (a, b) = require_linear_ok(coeffs)?;
    let tau = coeffs.tau;
    let root = (b * b - a * a).sqrt();
    let eta_c = (-a / b).acos() / (tau * root);
    let omega0 = eta_c * root;
    let alpha_prime = eta_c * tau * (b * b - a * a)
        / (1.0 + 2.0 * eta_c * a * tau + eta_c * eta_c * b * b * tau * tau);
    Ok(HopfPoint {
        eta_c,
        omega0,
        period: 2.0 * PI / omega0,
        frequency: omega0 / (2.0 * PI),
        alpha_prime,
    })
}

pub fn stability_verdict(coeffs: &TaylorCoefficients, eta: f64) -> Result<StabilityVerdict> {
    let bound = stability_bound(coeffs)?;
    if !(eta > 0.0) {
        return Err(Error::InvariantViolation(format!("eta > 0 required, got {eta}")));
    }
    let lhs = eta * coeffs.tau;
    Ok(if lhs < bound {
        StabilityVerdict::Stable
    } else if lhs == bound {
        StabilityVerdict::Critical
    } else {
        StabilityVerdict::Unstable
    })
}

/// Necessary and sufficient local stability test `ητ < acos(-a/b)/√(b²-a²)`.
pub fn is_locally_stable(coeffs: &TaylorCoefficients, eta: f64) -> Result<bool> {
    Ok(stability_verdict(coeffs, eta)? == StabilityVerdict::Stable)
}

/// Delay-only sufficient test `ηbτ < π/2`.
pub fn sufficient_stable(coeffs: &TaylorCoefficients, eta: f64) -> bool {
    let b = coeffs.b();
    b > 0.0 && eta * b * coeffs.tau < FRAC_PI_2
}

/// `λ + ηa + ηb e^{-λτ}`.
pub fn characteristic(coeffs: &TaylorCoefficients, eta: f64, lambda: Complex64) -> Complex64 {
    lambda + eta * coeffs.a() + eta * coeffs.b() * (-lambda * coeffs.tau).exp()
}

/// Characteristic function and its derivative, sharing one exponential.
#[derive(Clone, Copy)]
struct CharFn {
    a: f64,
    b: f64,
    tau: f64,
}

impl CharFn {
    fn value(&self, z: Complex64) -> Complex64 {
        z + self.a + self.b * (-z * self.tau).exp()
    }

    fn value_and_slope(&self, z: Complex64) -> (Complex64, Complex64) {
        let e = (-z * self.tau).exp();
        (z + self.a + self.b * e, 1.0 - self.b * self.tau * e)
    }

    /// Magnitude against which residuals are judged.
    fn scale(&self, z: Complex64) -> f64 {
        1.0 + z.norm() + self.a.abs() + self.b.abs() * (-z.re * self.tau).exp()
    }
}

const NEWTON_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 80;
const MAX_DEPTH: usize = 10;

fn newton(f: &CharFn, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..MAX_NEWTON {
        let (h, dh) = f.value_and_slope(z);
        if !h.is_finite() || !dh.is_finite() || dh.norm() == 0.0 {
            return None;
        }
        let step = h / dh;
        z -= step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let h = f.value(z);
    (h.is_finite() && h.norm() <= NEWTON_TOL * f.scale(z)).then_some(z)
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    re0: f64,
    re1: f64,
    im0: f64,
    im1: f64,
}

impl Cell {
    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re0 - slack
            && z.re <= self.re1 + slack
            && z.im >= self.im0 - slack
            && z.im <= self.im1 + slack
    }

    fn quarters(&self) -> [Cell; 4] {
        let rm = 0.5 * (self.re0 + self.re1);
        let im = 0.5 * (self.im0 + self.im1);
        [
            Cell { re0: self.re0, re1: rm, im0: self.im0, im1: im },
            Cell { re0: rm, re1: self.re1, im0: self.im0, im1: im },
            Cell { re0: self.re0, re1: rm, im0: im, im1: self.im1 },
            Cell { re0: rm, re1: self.re1, im0: im, im1: self.im1 },
        ]
    }
}

/// Signals that a contour passed too close to a root to trust its winding.
struct ContourHit;

/// Change of `arg f` along the segment `z0 → z1`, refined until every
/// sub-step turns by less than π/8.
fn arg_increment(
    f: &CharFn,
    z0: Complex64,
    z1: Complex64,
    f0: Complex64,
    f1: Complex64,
    depth: usize,
) -> std::result::Result<f64, ContourHit> {
    let d = (f1 / f0).arg();
    if !d.is_finite() {
        return Err(ContourHit);
    }
    if d.abs() < PI / 8.0 {
        return Ok(d);
    }
    if depth >= 40 {
        return Err(ContourHit);
    }
    let zm = 0.5 * (z0 + z1);
    let fm = f.value(zm);
    if fm.norm() == 0.0 {
        return Err(ContourHit);
    }
    Ok(arg_increment(f, z0, zm, f0, fm, depth + 1)? + arg_increment(f, zm, z1, fm, f1, depth + 1)?)
}

/// Phase change along a straight edge, sampled at `pieces` equal steps first.
fn edge_phase(
    f: &CharFn,
    z0: Complex64,
    z1: Complex64,
    pieces: usize,
) -> std::result::Result<f64, ContourHit> {
    let mut total = 0.0;
    let mut prev_z = z0;
    let mut prev_f = f.value(z0);
    if prev_f.norm() == 0.0 {
        return Err(ContourHit);
    }
    for k in 1..=pieces {
        let z = z0 + (z1 - z0) * (k as f64 / pieces as f64);
        let fz = f.value(z);
        if fz.norm() == 0.0 {
            return Err(ContourHit);
        }
        total += arg_increment(f, prev_z, z, prev_f, fz, 0)?;
        prev_z = z;
        prev_f = fz;
    }
    Ok(total)
}

fn winding_of(total_phase: f64) -> std::result::Result<i64, ContourHit> {
    let w = total_phase / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.05 {
        return Err(ContourHit);
    }
    Ok(n as i64)
}

fn cell_winding(f: &CharFn, c: &Cell) -> std::result::Result<i64, ContourHit> {
    let p00 = Complex64::new(c.re0, c.im0);
    let p10 = Complex64::new(c.re1, c.im0);
    let p11 = Complex64::new(c.re1, c.im1);
    let p01 = Complex64::new(c.re0, c.im1);
    let total = edge_phase(f, p00, p10, 4)?
        + edge_phase(f, p10, p11, 4)?
        + edge_phase(f, p11, p01, 4)?
        + edge_phase(f, p01, p00, 4)?;
    winding_of(total)
}

/// Derivative magnitude below which a root is treated as double.
fn is_double(f: &CharFn, z: Complex64) -> bool {
    let (_, dh) = f.value_and_slope(z);
    dh.norm() < 1e-6 * f.scale(z)
}

fn roots_in_cell(
    f: &CharFn,
    cell: Cell,
    count: i64,
    depth: usize,
) -> std::result::Result<Vec<Complex64>, String> {
    if count <= 0 {
        return Ok(Vec::new());
    }
    let width = (cell.re1 - cell.re0).max(cell.im1 - cell.im0);
    let slack = 1e-9 * (1.0 + width);
    let mut found: Vec<Complex64> = Vec::new();
    let n_seeds = 4;
    'seeds: for i in 0..n_seeds {
        for j in 0..n_seeds {
            let s = Complex64::new(
                cell.re0 + (i as f64 + 0.5) / n_seeds as f64 * (cell.re1 - cell.re0),
                cell.im0 + (j as f64 + 0.5) / n_seeds as f64 * (cell.im1 - cell.im0),
            );
            if let Some(z) = newton(f, s) {
                if cell.contains(z, slack)
                    && !found
                        .iter()
                        .any(|w| (w - z).norm() <= 1e-8 * (1.0 + z.norm()))
                {
                    found.push(z);
                }
            }
            let mult: i64 = found.iter().map(|z| if is_double(f, *z) { 2 } else { 1 }).sum();
            if mult >= count {
                break 'seeds;
            }
        }
    }
    let mult: i64 = found.iter().map(|z| if is_double(f, *z) { 2 } else { 1 }).sum();
    if mult == count {
        return Ok(found);
    }
    if depth >= MAX_DEPTH {
        return Err(format!(
            "found multiplicity {mult} of {count} roots in cell re [{}, {}], im [{}, {}]",
            cell.re0, cell.re1, cell.im0, cell.im1
        ));
    }
    let mut out = Vec::new();
    for q in cell.quarters() {
        let n = cell_winding(f, &q)
            .map_err(|_| "sub-cell contour touches a root".to_string())?;
        out.extend(roots_in_cell(f, q, n, depth + 1)?);
    }
    Ok(out)
}

/// Winding numbers of every cell of a uniform grid, computed from shared edges.
fn grid_windings(
    f: &CharFn,
    re0: f64,
    im0: f64,
    pitch: f64,
    nx: usize,
    ny: usize,
) -> std::result::Result<Vec<i64>, ContourHit> {
    let node = |i: usize, j: usize| Complex64::new(re0 + i as f64 * pitch, im0 + j as f64 * pitch);
    // horizontal[j * nx + i]: node (i, j) -> (i + 1, j)
    let mut horizontal = vec![0.0; nx * (ny + 1)];
    for j in 0..=ny {
        for i in 0..nx {
            horizontal[j * nx + i] = edge_phase(f, node(i, j), node(i + 1, j), 2)?;
        }
    }
    // vertical[i * ny + j]: node (i, j) -> (i, j + 1)
    let mut vertical = vec![0.0; (nx + 1) * ny];
    for i in 0..=nx {
        for j in 0..ny {
            vertical[i * ny + j] = edge_phase(f, node(i, j), node(i, j + 1), 2)?;
        }
    }
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let total = horizontal[j * nx + i] + vertical[(i + 1) * ny + j]
                - horizontal[(j + 1) * nx + i]
                - vertical[i * ny + j];
            out.push(winding_of(total)?);
        }
    }
    Ok(out)
}

/// All roots in `region`, sorted by descending real part.
///
/// Roots are localized by argument-principle winding numbers over a square
/// grid (pitch `min(π/(2ηbτ), 0.25)`), then polished by Newton iteration from
/// seeds inside each cell that holds roots. Cells whose roots are not all
/// recovered are subdivided. Only roots with `Im λ >= 0` are reported; their
/// conjugates are implied.
pub fn rightmost_roots(
    coeffs: &TaylorCoefficients,
    eta: f64,
    region: &RootSearchRegion,
) -> Result<Vec<ComplexRoot>> {
    let f = CharFn {
        a: eta * coeffs.a(),
        b: eta * coeffs.b(),
        tau: coeffs.tau,
    };
    if ![f.a, f.b, f.tau, region.re_min, region.re_max, region.im_max]
        .iter()
        .all(|v| v.is_finite())
        || f.tau < 0.0
    {
        return Err(Error::InvariantViolation(
            "finite coefficients, region and tau >= 0 required".into(),
        ));
    }
    if !(region.re_max > region.re_min) || !(region.im_max > 0.0) {
        return Err(Error::InvariantViolation(format!(
            "empty search region {region:?}"
        )));
    }
    let gain = (f.b * f.tau).abs();
    let pitch = if gain > 0.0 {
        (PI / (2.0 * gain)).min(0.25)
    } else {
        0.25
    };

    for attempt in 0..4 {
        // The real axis sits strictly inside the bottom row so real roots
        // never lie on a contour; later attempts nudge the whole grid.
        let shift = [0.0, 0.137, 0.291, 0.419][attempt];
        let re0 = region.re_min - shift * pitch;
        let im0 = -(0.5 + 0.5 * shift) * pitch;
        let nx = ((region.re_max - re0) / pitch).ceil().max(1.0) as usize;
        let ny = ((region.im_max - im0) / pitch).ceil().max(1.0) as usize;
        let windings = match grid_windings(&f, re0, im0, pitch, nx, ny) {
            Ok(w) => w,
            Err(ContourHit) => continue,
        };
        let mut roots: Vec<Complex64> = Vec::new();
        let mut retry = false;
        for j in 0..ny {
            for i in 0..nx {
                let n = windings[j * nx + i];
                if n == 0 {
                    continue;
                }
                if n < 0 {
                    retry = true;
                    break;
                }
                let cell = Cell {
                    re0: re0 + i as f64 * pitch,
                    re1: re0 + (i + 1) as f64 * pitch,
                    im0: im0 + j as f64 * pitch,
                    im1: im0 + (j + 1) as f64 * pitch,
                };
                match roots_in_cell(&f, cell, n, 0) {
                    Ok(rs) => roots.extend(rs),
                    Err(msg) => {
                        if attempt == 3 {
                            return Err(Error::NoConvergence(msg));
                        }
                        retry = true;
                        break;
                    }
                }
            }
            if retry {
                break;
            }
        }
        if retry {
            continue;
        }
        return Ok(finish_roots(&f, roots, region));
    }
    Err(Error::NoConvergence(
        "grid contours kept passing through roots".into(),
    ))
}

fn finish_roots(f: &CharFn, roots: Vec<Complex64>, region: &RootSearchRegion) -> Vec<ComplexRoot> {
    let mut out: Vec<ComplexRoot> = Vec::new();
    for z in roots {
        let tol = 1e-10 * (1.0 + z.norm());
        let im = if z.im.abs() <= tol { 0.0 } else { z.im };
        if im < 0.0 {
            continue;
        }
        if z.re < region.re_min || z.re > region.re_max || im > region.im_max {
            continue;
        }
        if out
            .iter()
            .any(|r| (Complex64::new(r.re, r.im) - Complex64::new(z.re, im)).norm() <= 1e-8 * (1.0 + z.norm()))
        {
            continue;
        }
        let zz = Complex64::new(z.re, im);
        out.push(ComplexRoot {
            re: z.re,
            im,
            residual: f.value(zz).norm(),
        });
    }
    out.sort_by(|x, y| y.re.total_cmp(&x.re).then(x.im.total_cmp(&y.im)));
    out
}

/// The rightmost characteristic root, searched in [`RootSearchRegion::around_rightmost`].
pub fn rightmost_root(coeffs: &TaylorCoefficients, eta: f64) -> Result<ComplexRoot> {
    let region = RootSearchRegion::around_rightmost(coeffs, eta);
    rightmost_roots(coeffs, eta, &region)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoConvergence("no root in the default search region".into()))
}

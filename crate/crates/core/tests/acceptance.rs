//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dde_hopf::chareq;
use dde_hopf::convergence;
use dde_hopf::dde_sim::{self, SimConfig, Verdict};
use dde_hopf::hopf::{self, Direction};
use dde_hopf::model::{self, BdParams, ModelSpec, NicholsonParams, TaylorCoefficients};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn example1() -> ModelSpec {
    ModelSpec::CubicBd(BdParams {
        k: 9.0,
        mu: 1.0,
        lambda: -7.0,
        tau: 0.187,
    })
}

fn example2() -> ModelSpec {
    ModelSpec::CubicBd(BdParams {
        k: 4.75,
        mu: 1.0,
        lambda: -7.0,
        tau: 1.0,
    })
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let coeffs = model::taylor_coefficients(&example1()).unwrap();
    let h = chareq::critical_eta(&coeffs).unwrap();
    let elapsed = start.elapsed();
    outcome(
        within(h.eta_c, 0.99, 1.01) && elapsed < Duration::from_millis(1),
        format!("eta_c = {:.6}, {:?}", h.eta_c, elapsed),
    )
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let (_, r) = hopf::lyapunov_report(&example1()).unwrap();
    let elapsed = start.elapsed();
    outcome(
        within(r.mu2, 8.8, 9.8)
            && r.direction == Direction::Supercritical
            && elapsed < Duration::from_millis(1),
        format!("mu2 = {:.6} ({:?}), {:?}", r.mu2, r.direction, elapsed),
    )
}

fn ac3() -> Outcome {
    let spec = example2();
    let x_e = model::equilibrium(&spec).unwrap().x_e;
    let (h, r) = hopf::lyapunov_report(&spec).unwrap();
    outcome(
        within(x_e, 1.29, 1.31)
            && within(h.eta_c, 0.99, 1.01)
            && within(r.mu2, -6.42, -5.80)
            && r.direction == Direction::Subcritical,
        format!(
            "x_e = {x_e:.6}, eta_c = {:.6}, mu2 = {:.6} ({:?})",
            h.eta_c, r.mu2, r.direction
        ),
    )
}

fn random_coeffs(rng: &mut StdRng) -> TaylorCoefficients {
    let eps = rng.gen_range(0.0..=0.95);
    let b = rng.gen_range(0.2..5.0);
    let mut xi = || rng.gen_range(-2.0..=2.0);
    TaylorCoefficients {
        xi_x: -eps * b,
        xi_y: -b,
        xi_xx: xi(),
        xi_xy: xi(),
        xi_yy: xi(),
        xi_xxx: xi(),
        xi_xxy: xi(),
        xi_xyy: xi(),
        xi_yyy: xi(),
        tau: 0.0,
    }
}

fn ac4() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut c = random_coeffs(&mut rng);
        c.tau = rng.gen_range(0.05..3.0);
        let h = chareq::critical_eta(&c).unwrap();
        let cm = hopf::mu2_center_manifold(&c, &h).unwrap().mu2;
        let cf = hopf::mu2_closed_form(&c).unwrap();
        worst = worst.max(rel(cm, cf));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(1),
        format!("max relative gap {worst:.2e} over 100 sets, {elapsed:?}"),
    )
}

fn ac5() -> Outcome {
    let mut max_g = f64::NEG_INFINITY;
    let mut max_h = f64::NEG_INFINITY;
    for k in 0..96 {
        let eps = 0.95 * k as f64 / 95.0;
        max_g = max_g.max(hopf::g_tilde(eps).unwrap());
        max_h = max_h.max(hopf::h_tilde(eps).unwrap());
    }
    outcome(
        max_g < 0.0 && max_h < 0.0,
        format!("max g~ = {max_g:.4}, max h~ = {max_h:.4} on 96 points"),
    )
}

fn ac6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut accepted = 0;
    let mut max_mu2 = f64::NEG_INFINITY;
    let mut draws = 0;
    while accepted < 50 && draws < 100_000 {
        draws += 1;
        let spec = ModelSpec::QuadraticBd(BdParams {
            k: rng.gen_range(0.1..10.0),
            mu: rng.gen_range(-3.0..3.0),
            lambda: rng.gen_range(-10.0..10.0),
            tau: rng.gen_range(0.05..3.0),
        });
        if let Ok(c) = model::taylor_coefficients(&spec) {
            accepted += 1;
            max_mu2 = max_mu2.max(hopf::mu2_closed_form(&c).unwrap());
        }
    }
    outcome(
        accepted == 50 && max_mu2 < 0.0,
        format!("{accepted} valid specs, max mu2 = {max_mu2:.4}"),
    )
}

fn ac7() -> Outcome {
    let mut min_mu2 = f64::INFINITY;
    let mut worst = 0.0f64;
    for k in 1..=19 {
        let eps = 0.05 * k as f64;
        let gamma = 0.8;
        let spec = ModelSpec::Nicholson(NicholsonParams {
            gamma,
            p_rate: gamma * (1.0 + 1.0 / eps).exp(),
            x0_size: 1.0,
            tau: 1.0,
        });
        let n = hopf::nicholson_mu2(&spec).unwrap();
        let g = hopf::mu2_closed_form(&model::taylor_coefficients(&spec).unwrap()).unwrap();
        min_mu2 = min_mu2.min(n);
        worst = worst.max(rel(n, g));
    }
    outcome(
        min_mu2 > 0.0 && worst <= 1e-8,
        format!("min mu2 = {min_mu2:.4}, max relative gap {worst:.2e}"),
    )
}

fn ac8() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(8);
    let (mut checked, mut mismatches, mut contradictions) = (0, 0, 0);
    while checked < 200 {
        let b: f64 = rng.gen_range(0.2..5.0);
        let a = b * rng.gen_range(0.0..0.95);
        let tau = rng.gen_range(0.05..3.0);
        let eta = rng.gen_range(0.1..3.0);
        let c = TaylorCoefficients::linear(a, b, tau);
        let bound = chareq::stability_bound(&c).unwrap();
        if ((eta * tau) / bound - 1.0).abs() < 0.02 {
            continue;
        }
        checked += 1;
        let stable = chareq::is_locally_stable(&c, eta).unwrap();
        let root = chareq::rightmost_root(&c, eta).unwrap();
        if (root.re < 0.0) != stable {
            mismatches += 1;
        }
        if chareq::sufficient_stable(&c, eta) && !stable {
            contradictions += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && contradictions == 0 && elapsed < Duration::from_secs(30),
        format!("{mismatches} root/verdict mismatches, {contradictions} sufficient-test contradictions, {elapsed:?}"),
    )
}

fn ac9() -> Outcome {
    let coeffs = model::taylor_coefficients(&example1()).unwrap();
    let ts = convergence::tau_star(&coeffs).unwrap();
    let tc = chareq::stability_bound(&coeffs).unwrap();
    let sigma = |tau: f64| {
        convergence::rate_of_convergence(&TaylorCoefficients { tau, ..coeffs })
            .unwrap()
            .sigma
    };
    let rising: Vec<f64> = (1..=50).map(|i| sigma(ts * i as f64 / 51.0)).collect();
    let falling: Vec<f64> = (1..=50)
        .map(|i| sigma(ts + (tc - ts) * i as f64 / 51.0))
        .collect();
    let increasing = rising.windows(2).all(|w| w[1] > w[0]);
    let decreasing = falling.windows(2).all(|w| w[1] < w[0]);
    let peak_gap = (sigma(ts) - (coeffs.a() + 1.0 / ts)).abs();

    let mut rng = StdRng::seed_from_u64(9);
    let (mut checked, mut mismatches) = (0, 0);
    while checked < 100 {
        let b: f64 = rng.gen_range(0.2..5.0);
        let a = b * rng.gen_range(0.0..0.95);
        let tau: f64 = rng.gen_range(0.01..2.0);
        let kappa = b * tau * (a * tau).exp();
        if (kappa * std::f64::consts::E - 1.0).abs() < 0.02 {
            continue;
        }
        checked += 1;
        let c = TaylorCoefficients::linear(a, b, tau);
        let root = chareq::rightmost_root(&c, 1.0).unwrap();
        if convergence::non_oscillatory(&c) != (root.im == 0.0) {
            mismatches += 1;
        }
    }
    outcome(
        increasing && decreasing && peak_gap <= 1e-6 && mismatches == 0,
        format!(
            "increasing {increasing}, decreasing {decreasing}, peak gap {peak_gap:.2e}, {mismatches} realness mismatches"
        ),
    )
}

fn ac10() -> Outcome {
    let start = Instant::now();
    let e1 = example1();
    let h1 = chareq::critical_eta(&model::taylor_coefficients(&e1).unwrap()).unwrap();
    let below = dde_sim::metrics(
        &dde_sim::integrate(&e1, &SimConfig::for_delay(0.187, 0.95, 0.9)).unwrap(),
    );
    let above = dde_sim::metrics(
        &dde_sim::integrate(&e1, &SimConfig::for_delay(0.187, 1.05, 0.9)).unwrap(),
    );
    let e2 = example2();
    let m2 = dde_sim::metrics(&dde_sim::integrate(&e2, &SimConfig::for_delay(1.0, 1.05, 1.35)).unwrap());
    let elapsed = start.elapsed();
    let period_ok = above
        .period
        .map(|p| (p / (2.0 * PI / h1.omega0) - 1.0).abs() <= 0.1)
        .unwrap_or(false);
    let ratio = m2.amplitude / above.amplitude;
    outcome(
        below.verdict == Verdict::ConvergedToEquilibrium
            && above.verdict == Verdict::LimitCycle
            && period_ok
            && m2.verdict == Verdict::LimitCycle
            && ratio >= 3.0
            && elapsed < Duration::from_secs(10),
        format!(
            "eta 0.95: {:?}; eta 1.05: {:?}, period {:.4} vs {:.4}; example 2: {:?}, amplitude ratio {ratio:.3}; {elapsed:?}",
            below.verdict,
            above.verdict,
            above.period.unwrap_or(f64::NAN),
            2.0 * PI / h1.omega0,
            m2.verdict
        ),
    )
}

fn ac11() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let b = rng.gen_range(0.5..3.0);
        let a = b * rng.gen_range(0.0..0.9);
        let c0 = TaylorCoefficients::linear(a, b, 1.0);
        let tc = chareq::stability_bound(&c0).unwrap();
        let tau = tc * rng.gen_range(0.1..0.8);
        let c = TaylorCoefficients::linear(a, b, tau);
        let sigma = convergence::rate_of_convergence(&c).unwrap().sigma;
        // run long enough for the deviation to fall about 20 e-folds
        let t_end = (20.0 / sigma).max(50.0 * tau);
        let cfg = SimConfig {
            eta: 1.0,
            x_init: 1.0,
            t_end,
            dt: tau / 100.0,
            transient_fraction: 0.3,
        };
        let m = dde_sim::metrics(&dde_sim::integrate(&ModelSpec::Generic(c), &cfg).unwrap());
        let fitted = m.decay_rate.unwrap_or(f64::NAN);
        let gap = rel(fitted, sigma);
        worst = if gap.is_nan() { f64::INFINITY } else { worst.max(gap) };
    }
    outcome(worst <= 0.05, format!("max relative gap {worst:.4} over 10 sets"))
}

fn ac12() -> Outcome {
    let spec = example1();
    let h = chareq::critical_eta(&model::taylor_coefficients(&spec).unwrap()).unwrap();
    let factors: Vec<f64> = (0..10).map(|i| 1.005 + 0.005 * i as f64).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for f in &factors {
        let eta = f * h.eta_c;
        let cfg = SimConfig {
            eta,
            x_init: 0.9,
            t_end: 8000.0 * 0.187,
            dt: 0.187 / 100.0,
            transient_fraction: 0.9,
        };
        let m = dde_sim::metrics(&dde_sim::integrate(&spec, &cfg).unwrap());
        xs.push(eta - h.eta_c);
        ys.push(m.amplitude * m.amplitude);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let r = sxy / (sxx * syy).sqrt();
    outcome(r >= 0.98, format!("correlation {r:.5} over {} points", xs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 12] = [
        ("AC-1", "example 1 Hopf point", ac1),
        ("AC-2", "example 1 Lyapunov coefficient", ac2),
        ("AC-3", "example 2 equilibrium, Hopf point and Lyapunov coefficient", ac3),
        ("AC-4", "closed form matches center-manifold reduction", ac4),
        ("AC-5", "g~ and h~ negative on the epsilon grid", ac5),
        ("AC-6", "quadratic model is always subcritical", ac6),
        ("AC-7", "Nicholson coefficient positive and consistent", ac7),
        ("AC-8", "rightmost root agrees with the stability test", ac8),
        ("AC-9", "convergence rate shape and non-oscillatory boundary", ac9),
        ("AC-10", "simulation verdicts, period and amplitude", ac10),
        ("AC-11", "fitted decay rate matches sigma", ac11),
        ("AC-12", "supercritical amplitude scaling", ac12),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{status} {id} {name}: {} [{:?}]", o.detail, start.elapsed());
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

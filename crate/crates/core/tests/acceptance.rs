//! Acceptance gates. Each criterion prints one PASS/FAIL line; the test
//! fails at the end if any gate failed.
//!
//! The report goes straight to the stderr handle, so it is visible without
//! `--nocapture`.

use std::io::Write;
use std::time::Instant;

use hetcoint::app::variance_profile;
use hetcoint::dgp::{cholesky3, covariance_at, Breaks, DgpConfig};
use hetcoint::estimate::{fit_nls, Estimator, NlsOptions};
use hetcoint::harness::{
    emit_table, run_grid, run_replications, CellTest, GridSpec, McTable, RunOptions, TableFormat,
};
use hetcoint::hypothesis::{cw_cdf, eta_with, Method};
use hetcoint::model::{Deterministics, ModelSpec, ParamVector};
use hetcoint::rng;
use hetcoint::variance::{long_run_variance, parametric_variance, LrvConfig};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const MASTER_SEED: u64 = 1;

struct Gate {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn pv(v: &[f64]) -> ParamVector {
    ParamVector::new(v.to_vec()).unwrap()
}

/// Single-cell grid at T = n with everything else at its homoskedastic default.
fn cell_grid(spec: ModelSpec, theta: &[f64], n: usize, replications: usize) -> GridSpec {
    let mut g = GridSpec::new(spec, pv(theta));
    g.sizes = vec![n];
    g.replications = replications;
    g.master_seed = MASTER_SEED;
    g
}

fn run(grid: &GridSpec) -> McTable {
    run_grid(grid, &RunOptions::default()).expect("grid runs")
}

fn pct(table: &McTable, row: usize) -> f64 {
    100.0 * table.rows[row].result.rate()
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn rate_gate(name: &'static str, got: f64, target: f64, tol: f64) -> Gate {
    Gate {
        name,
        passed: within(got, target, tol),
        detail: format!("{got:.2}% (target {target} ± {tol})"),
    }
}

fn c1_size() -> Vec<Gate> {
    let mut out = Vec::new();
    for (n, target) in [(100, 5.3), (300, 4.8)] {
        let t = run(&cell_grid(ModelSpec::linear(), &[1.0], n, 2000));
        let name = if n == 100 {
            "C1 bootstrap size, linear, T=100"
        } else {
            "C1 bootstrap size, linear, T=300"
        };
        out.push(rate_gate(name, pct(&t, 0), target, 1.5));
    }
    out
}

fn c2_power() -> Gate {
    let mut g = cell_grid(ModelSpec::linear(), &[1.0], 100, 2000);
    g.rho_mu_sq = vec![0.1];
    rate_gate(
        "C2 bootstrap power, linear, T=100, rmu=0.1",
        pct(&run(&g), 0),
        84.9,
        3.0,
    )
}

fn c3_c4_comparators() -> Vec<Gate> {
    let mut g = cell_grid(ModelSpec::linear(), &[1.0], 100, 2000);
    g.methods = vec![Method::Subresidual, Method::ShinCriticalValue];
    g.taus = vec![0.0];
    let homo = run(&g);
    g.taus = vec![0.1];
    g.sigma1_sq = vec![1.0 / 16.0];
    let early_down = run(&g);
    g.taus = vec![0.5];
    g.sigma1_sq = vec![16.0];
    let mid_up = run(&g);
    let get = |t: &McTable, m: Method| {
        100.0
            * t.rows
                .iter()
                .find(|r| r.key.method == m)
                .unwrap()
                .result
                .rate()
    };
    vec![
        rate_gate(
            "C3 subresidual size, homoskedastic",
            get(&homo, Method::Subresidual),
            2.0,
            1.0,
        ),
        rate_gate(
            "C3 subresidual size, tau=0.1 s2=1/16",
            get(&early_down, Method::Subresidual),
            6.3,
            2.0,
        ),
        rate_gate(
            "C4 tabulated-cv size, tau=0.5 s2=16",
            get(&mid_up, Method::ShinCriticalValue),
            1.7,
            1.5,
        ),
        rate_gate(
            "C4 tabulated-cv size, tau=0.1 s2=1/16",
            get(&early_down, Method::ShinCriticalValue),
            12.3,
            1.5,
        ),
    ]
}

fn c5_polynomial() -> Vec<Gate> {
    let mut out = Vec::new();
    let cases: [(u32, &[f64], f64, f64, &'static str, &'static str); 2] = [
        (
            2,
            &[1.0, 1.0],
            4.9,
            82.2,
            "C5 quadratic size, T=100",
            "C5 quadratic power, rmu=0.1",
        ),
        (
            3,
            &[1.0, 2.0, 1.0],
            4.9,
            80.7,
            "C5 cubic size, T=100",
            "C5 cubic power, rmu=0.1",
        ),
    ];
    for (degree, theta, size, power, size_name, power_name) in cases {
        let mut g = cell_grid(ModelSpec::polynomial(degree).unwrap(), theta, 100, 2000);
        g.rho_mu_sq = vec![0.0, 0.1];
        let t = run(&g);
        out.push(rate_gate(size_name, pct(&t, 0), size, 2.0));
        out.push(rate_gate(power_name, pct(&t, 1), power, 3.0));
    }
    out
}

fn c6_smooth_transition() -> Gate {
    let t = run(&cell_grid(
        ModelSpec::smooth_transition(),
        &[0.0, 1.0, 1.0, 5.0],
        100,
        1000,
    ));
    let r = t.rows[0].result;
    let got = 100.0 * r.rate();
    Gate {
        name: "C6 smooth-transition size, T=100",
        passed: within(got, 4.5, 2.0),
        detail: format!(
            "{got:.2}% (target 4.5 ± 2); {} effective, {} excluded",
            r.n_effective, r.n_excluded
        ),
    }
}

fn c7_leads_lags() -> Vec<Gate> {
    let spec = ModelSpec::polynomial(3)
        .unwrap()
        .with_deterministics(Deterministics::TREND)
        .unwrap();
    let mut g = cell_grid(spec, &[1.0, 1.0, 1.0, 2.0, 1.0], 300, 1000);
    g.lambdas = vec![0.5];
    let plain = pct(&run(&g), 0);
    g.estimator = Estimator::LeadsLags { k: 1 };
    let ll = pct(&run(&g), 0);
    vec![
        Gate {
            name: "C7 plain NLS oversized, cubic+trend, lambda=0.5",
            passed: plain >= 7.5,
            detail: format!("{plain:.2}% (target ≥ 7.5)"),
        },
        Gate {
            name: "C7 leads-lags corrected, cubic+trend, lambda=0.5",
            passed: ll <= 6.5,
            detail: format!("{ll:.2}% (target ≤ 6.5)"),
        },
    ]
}

/// Kolmogorov–Smirnov distance of a sample from U[0, 1] and its asymptotic p-value.
fn ks_uniform(mut p: Vec<f64>) -> (f64, f64) {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    let d = p
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    let x = (sn + 0.12 + 0.11 / sn) * d;
    let tail: f64 = (1..=100)
        .map(|k| 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * x).powi(2)).exp())
        .sum();
    (d, tail.clamp(0.0, 1.0))
}

fn c8_uniform_p_values() -> (Gate, Vec<f64>) {
    let cfg = DgpConfig {
        n: 100,
        model: ModelSpec::linear(),
        theta: pv(&[1.0]),
        rho: 0.0,
        rho_mu_sq: 0.0,
        lambda: 0.0,
        breaks: Breaks::homoskedastic(),
    };
    let test = CellTest::new(
        ModelSpec::linear(),
        Estimator::Nls,
        vec![Method::Bootstrap],
        399,
        LrvConfig::parametric(),
    );
    let reps = run_replications(&cfg, &test, 1000, rng::derive_seed(MASTER_SEED, &[8])).unwrap();
    let p: Vec<f64> = reps
        .iter()
        .filter_map(|r| r[0].as_ref().map(|o| o.p_value))
        .collect();
    let (d, ks_p) = ks_uniform(p.clone());
    let gate = Gate {
        name: "C8 bootstrap p-values ~ U[0,1] under the null",
        passed: p.len() == 1000 && ks_p > 0.01,
        detail: format!("KS D = {d:.4}, p = {ks_p:.3} over {} replications", p.len()),
    };
    (gate, p)
}

/// ∫₀¹ W² ds on `steps` grid points, one path per entry.
fn simulate_integrated_square(paths: usize, steps: usize, seed: u64) -> Vec<f64> {
    const CHUNK: usize = 1000;
    let sd = (1.0 / steps as f64).sqrt();
    let mut out: Vec<f64> = (0..paths.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut r = rng::stream(seed, &[c as u64]);
            let len = CHUNK.min(paths - c * CHUNK);
            (0..len)
                .map(|_| {
                    let mut w = 0.0;
                    let mut acc = 0.0;
                    for _ in 0..steps {
                        w += sd * r.sample::<f64, _>(StandardNormal);
                        acc += w * w;
                    }
                    acc / steps as f64
                })
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn c9_cw_cdf() -> Gate {
    let sample = simulate_integrated_square(1_000_000, 1000, rng::derive_seed(MASTER_SEED, &[9]));
    let n = sample.len();
    let (lo, hi) = (n / 100, n * 99 / 100);
    let mut worst: f64 = 0.0;
    for (i, &z) in sample.iter().enumerate().take(hi + 1).skip(lo) {
        let f = cw_cdf(z);
        worst = worst
            .max((f - i as f64 / n as f64).abs())
            .max((f - (i + 1) as f64 / n as f64).abs());
    }
    Gate {
        name: "C9 cw_cdf vs simulated integral of W^2",
        passed: worst <= 0.005,
        detail: format!(
            "max |F - F_sim| = {worst:.5} on [{:.4}, {:.4}]",
            sample[lo], sample[hi]
        ),
    }
}

fn c10_replay() -> Gate {
    let mut g = cell_grid(ModelSpec::linear(), &[1.0], 60, 40);
    g.taus = vec![0.0, 0.5];
    g.sigma1_sq = vec![16.0];
    g.rho_mu_sq = vec![0.0, 0.01];
    g.rhos = vec![0.0, 0.5];
    g.methods = vec![
        Method::Bootstrap,
        Method::Subresidual,
        Method::ShinCriticalValue,
    ];
    g.bootstrap_draws = 49;
    let csv = |jobs| {
        let t = run_grid(
            &g,
            &RunOptions {
                jobs: Some(jobs),
                checkpoint: None,
            },
        )
        .unwrap();
        emit_table(&t, TableFormat::Csv).unwrap()
    };
    let (a, b, c) = (csv(1), csv(3), csv(1));
    Gate {
        name: "C10 byte-identical CSV across worker counts",
        passed: a == b && a == c,
        detail: format!("{} bytes, jobs 1/3/1", a.len()),
    }
}

fn c11_invariants(p_values: &[f64]) -> Vec<Gate> {
    let mut r = rng::stream(rng::derive_seed(MASTER_SEED, &[11]), &[]);
    let normals = |n: usize, r: &mut rng::StreamRng| -> Vec<f64> {
        (0..n).map(|_| r.sample(StandardNormal)).collect()
    };
    let mut gates = Vec::new();

    // η̂ unchanged when residuals are rescaled
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let u = normals(20 + case % 80, &mut r);
        let c = 10f64.powf(r.random_range(-3.0..3.0));
        let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
        for lrv in [LrvConfig::parametric(), LrvConfig::bartlett_auto()] {
            let (a, b) = (eta_with(&u, &lrv).unwrap(), eta_with(&cu, &lrv).unwrap());
            worst = worst.max((a - b).abs() / a);
        }
    }
    gates.push(Gate {
        name: "C11 eta scale invariance",
        passed: worst < 1e-10,
        detail: format!("max rel diff {worst:.1e}"),
    });

    // analytic Jacobian against central differences
    let specs = [
        (ModelSpec::linear(), vec![1.5]),
        (
            ModelSpec::polynomial(2)
                .unwrap()
                .with_deterministics(Deterministics::INTERCEPT)
                .unwrap(),
            vec![0.3, 1.0, -0.5],
        ),
        (
            ModelSpec::polynomial(3)
                .unwrap()
                .with_deterministics(Deterministics::TREND)
                .unwrap(),
            vec![1.0, 0.1, 1.0, 2.0, 1.0],
        ),
        (ModelSpec::smooth_transition(), vec![0.0, 1.0, 1.0, 5.0]),
    ];
    let mut worst: f64 = 0.0;
    for (spec, base) in &specs {
        for _ in 0..100 {
            let theta: Vec<f64> = base.iter().map(|v| v + r.random_range(-0.5..0.5)).collect();
            let x: f64 = r.random_range(-2.0..2.0);
            let t = r.random_range(1..200usize);
            let jac = spec.jacobian(x, t, &theta).unwrap();
            for (j, &dj) in jac.iter().enumerate() {
                let h = 1e-6 * (1.0 + theta[j].abs());
                let (mut up, mut dn) = (theta.clone(), theta.clone());
                up[j] += h;
                dn[j] -= h;
                let fd =
                    (spec.eval(x, t, &up).unwrap() - spec.eval(x, t, &dn).unwrap()) / (2.0 * h);
                worst = worst.max((fd - dj).abs() / (1.0 + dj.abs()));
            }
        }
    }
    gates.push(Gate {
        name: "C11 Jacobian vs finite differences",
        passed: worst < 1e-6,
        detail: format!("max scaled error {worst:.1e}"),
    });

    // Bartlett estimator with no lags is the plain variance
    let exact = (0..200).all(|case| {
        let u = normals(2 + case, &mut r);
        long_run_variance(&u, 0).unwrap() == parametric_variance(&u).unwrap()
    });
    gates.push(Gate {
        name: "C11 l=0 reduction",
        passed: exact,
        detail: "200 samples, exact equality".into(),
    });

    // L Lᵀ reproduces Σ_t on both sides of the break
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let cfg = DgpConfig {
            n: 100,
            model: ModelSpec::linear(),
            theta: pv(&[1.0]),
            rho: 0.0,
            rho_mu_sq: 0.1,
            lambda: r.random_range(-0.95..0.95),
            breaks: Breaks::shared(
                r.random_range(0.05..0.95),
                10f64.powf(r.random_range(-1.5..1.5)),
            )
            .unwrap(),
        };
        for t in [1, 50, 100] {
            let s = covariance_at(&cfg, t).unwrap();
            let l = cholesky3(&s, t).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                    worst = worst.max((v - s[i][j]).abs() / (1.0 + s[i][j].abs()));
                }
            }
        }
    }
    gates.push(Gate {
        name: "C11 Cholesky reconstruction",
        passed: worst < 1e-12,
        detail: format!("max scaled error {worst:.1e}"),
    });

    // ρ̂(0) = 0, ρ̂(1) = 1, nondecreasing
    let ok = (0..100).all(|case| {
        let u = normals(5 + 7 * case, &mut r);
        let p = variance_profile(&u, 3 + case).unwrap();
        p.rho_hat[0] == 0.0
            && *p.rho_hat.last().unwrap() == 1.0
            && p.rho_hat.windows(2).all(|w| w[1] >= w[0])
            && p.rho_hat.iter().all(|v| (0.0..=1.0).contains(v))
    });
    gates.push(Gate {
        name: "C11 variance-profile endpoints and monotonicity",
        passed: ok,
        detail: "100 profiles".into(),
    });

    let grid: Vec<f64> = (0..=4000).map(|k| k as f64 * 1e-3).collect();
    let vals: Vec<f64> = grid.iter().map(|&z| cw_cdf(z)).collect();
    let ok = vals.windows(2).all(|w| w[1] >= w[0]) && vals.iter().all(|v| (0.0..=1.0).contains(v));
    gates.push(Gate {
        name: "C11 cw_cdf monotone in [0,1]",
        passed: ok,
        detail: "z in [0, 4], step 1e-3".into(),
    });

    let ok = p_values.iter().all(|p| (0.0..=1.0).contains(p));
    gates.push(Gate {
        name: "C11 p-values in [0,1]",
        passed: ok,
        detail: format!("{} bootstrap p-values", p_values.len()),
    });

    // LM never ends above its starting SSR
    let spec = ModelSpec::smooth_transition();
    let mut ok = true;
    for case in 0..30 {
        let x: Vec<f64> = normals(80, &mut r)
            .iter()
            .scan(0.0, |s, v| {
                *s += v;
                Some(*s)
            })
            .collect();
        let e = normals(80, &mut r);
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(t, &xv)| spec.eval(xv, t + 1, &[0.0, 1.0, 1.0, 5.0]).unwrap() + e[t])
            .collect();
        let init = [r.random_range(-1.0..1.0), 0.5, 0.5, 1.0 + case as f64 / 5.0];
        let ssr0: f64 = x
            .iter()
            .zip(&y)
            .enumerate()
            .map(|(t, (&xv, &yv))| (yv - spec.eval(xv, t + 1, &init).unwrap()).powi(2))
            .sum();
        if let Ok(f) = fit_nls(&spec, &x, &y, &pv(&init), &NlsOptions::default()) {
            ok &= f.final_ssr <= ssr0;
        }
    }
    gates.push(Gate {
        name: "C11 LM monotone SSR",
        passed: ok,
        detail: "30 smooth-transition fits".into(),
    });
    gates
}

#[test]
fn acceptance() {
    let mut gates: Vec<Gate> = Vec::new();
    let say = |line: String| {
        let _ = writeln!(std::io::stderr().lock(), "{line}");
    };
    let stamp =
        |label: &str, start: Instant| say(format!("  ({label} took {:.1?})", start.elapsed()));

    let s = Instant::now();
    gates.extend(c1_size());
    gates.push(c2_power());
    stamp("C1-C2", s);
    let s = Instant::now();
    gates.extend(c3_c4_comparators());
    gates.extend(c5_polynomial());
    stamp("C3-C5", s);
    let s = Instant::now();
    gates.push(c6_smooth_transition());
    stamp("C6", s);
    let s = Instant::now();
    gates.extend(c7_leads_lags());
    let (c8, p_values) = c8_uniform_p_values();
    gates.push(c8);
    stamp("C7-C8", s);
    let s = Instant::now();
    gates.push(c9_cw_cdf());
    stamp("C9", s);
    gates.push(c10_replay());
    gates.extend(c11_invariants(&p_values));

    for g in &gates {
        say(format!(
            "{} {:<52} {}",
            if g.passed { "PASS" } else { "FAIL" },
            g.name,
            g.detail
        ));
    }
    let failed: Vec<&str> = gates.iter().filter(|g| !g.passed).map(|g| g.name).collect();
    assert!(failed.is_empty(), "failed gates: {failed:?}");
}

//! Simulation checks of the stationarity test and the EKC pipeline, plus
//! round trips of the emitted documents.

use hetcoint::app::{
    ekc_pipeline, emit_profile, ingest_str, parse_profile_csv, variance_profile, EkcConfig,
    IngestOptions, ProfileFormat,
};
use hetcoint::dgp::{simulate_system, Breaks, DgpConfig};
use hetcoint::estimate::Estimator;
use hetcoint::harness::{emit_table, parse_table_csv, run_grid, GridSpec, RunOptions, TableFormat};
use hetcoint::hypothesis::{
    fixed_regressor_bootstrap, stationarity_bootstrap_test, BootstrapConfig, Method,
};
use hetcoint::model::{Deterministics, ModelSpec, ParamVector};
use hetcoint::rng;
use hetcoint::Error;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, &[]);
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

fn cumsum(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |s, x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

fn stationarity_rejections(reps: usize, walk: bool, seed: u64) -> usize {
    let cfg = BootstrapConfig::with_draws(199);
    (0..reps)
        .into_par_iter()
        .filter(|&r| {
            let e = normals(300, rng::derive_seed(seed, &[r as u64, 0]));
            let series = if walk { cumsum(&e) } else { e };
            let o = stationarity_bootstrap_test(
                &series,
                Deterministics::INTERCEPT,
                &cfg,
                rng::derive_seed(seed, &[r as u64, 1]),
            )
            .unwrap();
            o.rejects(0.05)
        })
        .count()
}

#[test]
fn stationarity_size_on_iid_series() {
    let rej = stationarity_rejections(1000, false, 31);
    let rate = rej as f64 / 10.0;
    assert!((rate - 5.0).abs() <= 2.0, "size {rate}%");
}

#[test]
fn stationarity_power_against_random_walk() {
    let rej = stationarity_rejections(200, true, 32);
    assert!(rej as f64 / 200.0 > 0.8, "power {rej}/200");
}

#[test]
fn single_draw_gives_degenerate_p_value() {
    let spec = ModelSpec::linear();
    let x = cumsum(&normals(80, 5));
    for s in 0..20 {
        let e = normals(80, 100 + s);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + b).collect();
        let o = fixed_regressor_bootstrap(
            &spec,
            Estimator::Nls,
            &x,
            &y,
            &BootstrapConfig::with_draws(1),
            s,
        )
        .unwrap();
        assert!(o.p_value == 0.0 || o.p_value == 1.0, "{}", o.p_value);
    }
}

#[test]
fn profile_of_iid_residuals_tracks_diagonal() {
    let u = normals(10_000, 7);
    let p = variance_profile(&u, 513).unwrap();
    let worst =
        p.s.iter()
            .zip(&p.rho_hat)
            .map(|(s, r)| (s - r).abs())
            .fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
}

fn ekc_dgp(rho_mu_sq: f64) -> DgpConfig {
    DgpConfig {
        n: 145,
        model: ModelSpec::polynomial(3)
            .unwrap()
            .with_deterministics(Deterministics::TREND)
            .unwrap(),
        theta: ParamVector::new(vec![1.0, 1.0, 1.0, 2.0, 1.0]).unwrap(),
        rho: 0.0,
        rho_mu_sq,
        lambda: 0.0,
        breaks: Breaks::homoskedastic(),
    }
}

/// Per replay: p-values of (NLS bootstrap, leads-lags bootstrap, subresidual).
fn ekc_replays(rho_mu_sq: f64, reps: usize, seed: u64) -> Vec<[f64; 3]> {
    let dgp = ekc_dgp(rho_mu_sq);
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let s = simulate_system(&dgp, rng::derive_seed(seed, &[r as u64, 0])).unwrap();
            let cfg = EkcConfig {
                draws: 399,
                seed: rng::derive_seed(seed, &[r as u64, 1]),
                ..Default::default()
            };
            let rep = ekc_pipeline("synthetic", ("e", &s.y), ("y", &s.x), &cfg).unwrap();
            [
                rep.nls.bootstrap.unwrap().p_value,
                rep.leads_lags.unwrap().bootstrap.unwrap().p_value,
                rep.subresidual.unwrap().p_value,
            ]
        })
        .collect()
}

#[test]
fn ekc_replays_under_cointegration() {
    let p = ekc_replays(0.0, 200, 41);
    let clean = p.iter().filter(|v| v.iter().all(|&x| x > 0.05)).count();
    assert!(
        clean as f64 >= 0.85 * 200.0,
        "{clean}/200 replays without a rejection"
    );
}

#[test]
fn ekc_replays_without_cointegration() {
    let p = ekc_replays(0.1, 100, 42);
    let hits = p.iter().filter(|v| v[0] < 0.05).count();
    assert!(
        hits as f64 >= 0.4 * 100.0,
        "{hits}/100 bootstrap rejections"
    );
}

#[test]
fn ekc_constant_series_is_degenerate() {
    let x = cumsum(&normals(145, 9));
    let e = vec![3.0; 145];
    let cfg = EkcConfig {
        draws: 19,
        ..Default::default()
    };
    assert!(matches!(
        ekc_pipeline("c", ("e", &e), ("y", &x), &cfg),
        Err(Error::DegenerateVariance)
    ));
}

#[test]
fn table_round_trips_through_csv() {
    let mut g = GridSpec::new(ModelSpec::linear(), ParamVector::new(vec![1.0]).unwrap());
    g.sizes = vec![40];
    g.taus = vec![0.0, 0.9];
    g.sigma1_sq = vec![1.0 / 16.0];
    g.methods = vec![Method::Bootstrap, Method::Subresidual];
    g.replications = 20;
    g.bootstrap_draws = 19;
    g.master_seed = 3;
    let t = run_grid(&g, &RunOptions::default()).unwrap();
    let csv = emit_table(&t, TableFormat::Csv).unwrap();
    let back = parse_table_csv(&csv).unwrap();
    assert_eq!(back, t);
    assert_eq!(emit_table(&back, TableFormat::Csv).unwrap(), csv);
}

#[test]
fn profile_round_trips_through_csv() {
    let p = variance_profile(&normals(333, 11), 101).unwrap();
    let back = parse_profile_csv(&emit_profile(&p, ProfileFormat::Csv).unwrap()).unwrap();
    for (a, b) in p.rho_hat.iter().zip(&back.rho_hat) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert_eq!(back.s.len(), p.s.len());
}

#[test]
fn ingested_frame_round_trips() {
    let text = "year,e,y\n1990,1.5,0.25\n1991,1.75,0.5\n1992,2.125,0.75\n";
    let opts = IngestOptions::new(["e", "y"]);
    let df = ingest_str(text, "x", &opts).unwrap();
    assert_eq!(df.len(), 3);
    let again = ingest_str(&df.to_csv().unwrap(), "x", &opts).unwrap();
    assert_eq!(again.years, df.years);
    for name in ["e", "y"] {
        for (a, b) in df
            .column(name)
            .unwrap()
            .iter()
            .zip(again.column(name).unwrap())
        {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

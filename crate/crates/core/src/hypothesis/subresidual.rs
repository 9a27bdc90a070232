use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::statistic::eta_with;
use super::{Method, TestMeta, TestOutcome};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::variance::LrvConfig;

const SERIES_TERMS: usize = 10;

/// CDF of ∫₀¹ W(s)² ds via its erfc series, truncated after n = 10:
///
/// F(z) = √2 Σₙ [Γ(n+½)/(n! Γ(½))] (−1)ⁿ erfc((4n+1) / (2√(2z))).
///
/// The truncated sum slightly overshoots 1 in the far tail; the result is
/// clamped to [0, 1].
pub fn cw_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= 0.0 {
        return 0.0;
    }
    let denom = 2.0 * (2.0 * z).sqrt();
    let mut coef = 1.0;
    let mut sum = 0.0;
    for n in 0..=SERIES_TERMS {
        if n > 0 {
            coef *= (2 * n - 1) as f64 / (2 * n) as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * coef * erfc((4 * n + 1) as f64 / denom);
    }
    (std::f64::consts::SQRT_2 * sum).clamp(0.0, 1.0)
}

/// Smallest z with `cw_cdf(z) >= p`, by bisection.
pub fn cw_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while cw_cdf(hi) < p && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cw_cdf(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

/// η̂ on the block û_i, …, û_{i+ℓ−1} (i one-based) with partial sums
/// restarting at i and the long-run variance estimated from the block.
pub fn subresidual_statistic<S: Scalar>(
    residuals: &[S],
    i: usize,
    l_block: usize,
    lrv: &LrvConfig,
) -> Result<S> {
    let n = residuals.len();
    if l_block < 2 || i < 1 || l_block > n || i > n - l_block + 1 {
        return Err(Error::BlockOutOfRange {
            start: i,
            len: l_block,
            n,
        });
    }
    eta_with(&residuals[i - 1..i - 1 + l_block], lrv)
}

/// One-based starts of the M = ⌈T/ℓ⌉ consecutive blocks; the last block ends at T.
pub fn block_starts(n: usize, l_block: usize) -> Result<Vec<usize>> {
    if l_block < 2 || l_block > n {
        return Err(Error::BlockOutOfRange {
            start: 1,
            len: l_block,
            n,
        });
    }
    let m = n.div_ceil(l_block);
    let mut starts: Vec<usize> = (0..m - 1).map(|k| 1 + k * l_block).collect();
    starts.push(n - l_block + 1);
    Ok(starts)
}

/// η̂^{max,ℓ} over the blocks from [`block_starts`], with M.
pub fn block_max_statistic<S: Scalar>(
    residuals: &[S],
    l_block: usize,
    lrv: &LrvConfig,
) -> Result<(f64, usize)> {
    let starts = block_starts(residuals.len(), l_block)?;
    let mut max = f64::NEG_INFINITY;
    for &i in &starts {
        max = max.max(subresidual_statistic(residuals, i, l_block, lrv)?.to_f64_lossy());
    }
    Ok((max, starts.len()))
}

/// Eight evenly spaced block sizes from ⌈√T⌉ to ⌊T/2⌋ (duplicates removed).
pub fn default_block_grid(n: usize) -> Vec<usize> {
    let lo = ((n as f64).sqrt().ceil() as usize).max(2);
    let hi = n / 2;
    if hi < lo {
        return Vec::new();
    }
    let mut grid: Vec<usize> = (0..8)
        .map(|k| lo + ((hi - lo) as f64 * k as f64 / 7.0).round() as usize)
        .collect();
    grid.dedup();
    grid
}

/// Index minimizing the standard deviation over each point and its grid
/// neighbours (windows are truncated at the ends). Ties go to the lower index.
pub fn min_volatility_index(stats: &[f64]) -> Result<usize> {
    if stats.len() < 3 {
        return Err(Error::GridTooSmall(stats.len()));
    }
    let mut best = (0, f64::INFINITY);
    for k in 0..stats.len() {
        let w = &stats[k.saturating_sub(1)..(k + 2).min(stats.len())];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64).sqrt();
        if sd < best.1 {
            best = (k, sd);
        }
    }
    Ok(best.0)
}

/// Block size chosen by the minimum-volatility rule over `grid`.
pub fn min_volatility_block<S: Scalar>(
    residuals: &[S],
    grid: &[usize],
    lrv: &LrvConfig,
) -> Result<usize> {
    if grid.len() < 3 {
        return Err(Error::GridTooSmall(grid.len()));
    }
    let stats = grid
        .iter()
        .map(|&l| block_max_statistic(residuals, l, lrv).map(|s| s.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid[min_volatility_index(&stats)?])
}

/// Block size selection for the subresidual test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockChoice {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for BlockChoice {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        match self {
            BlockChoice::Auto => s.serialize_str("auto"),
            BlockChoice::Fixed(l) => s.serialize_u64(*l as u64),
        }
    }
}

impl<'de> Deserialize<'de> for BlockChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(l) => Ok(BlockChoice::Fixed(l)),
            Raw::Text(s) if s == "auto" => Ok(BlockChoice::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected \"auto\" or an integer, got `{s}`"
            ))),
        }
    }
}

/// Bonferroni test over non-overlapping subresidual blocks.
///
/// p = min(1, M (1 − F(η̂^{max,ℓ}))); the critical value c_{α/M} is reported in
/// the metadata.
pub fn bonferroni_subresidual_test<S: Scalar>(
    residuals: &[S],
    alpha: f64,
    block: BlockChoice,
    lrv: &LrvConfig,
) -> Result<TestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let l_block = match block {
        BlockChoice::Fixed(l) => l,
        BlockChoice::Auto => {
            min_volatility_block(residuals, &default_block_grid(residuals.len()), lrv)?
        }
    };
    let (stat, m) = block_max_statistic(residuals, l_block, lrv)?;
    let p = (m as f64 * (1.0 - cw_cdf(stat))).min(1.0);
    Ok(TestOutcome {
        statistic: stat,
        p_value: p,
        method: Method::Subresidual,
        meta: TestMeta {
            block_size: Some(l_block),
            blocks: Some(m),
            critical_value: Some(cw_quantile(1.0 - alpha / m as f64)),
            fit_converged: true,
            ..Default::default()
        },
    })
}

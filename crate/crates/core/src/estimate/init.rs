//! Starting values for nonlinear least squares.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, QrFactor};
use crate::model::{logistic, Family, ModelSpec, ParamVector};
use crate::scalar::{sum_sq, Scalar};

/// Number of steps in the transition-location grid.
const GRID_STEPS: usize = 20;

/// Starting values: the OLS solution for θ-linear families; for the smooth
/// transition a grid over θ₃ between the 5th and 95th percentile of x, solving
/// the conditionally linear problem at each point.
pub fn nls_initial_values<S: Scalar>(
    spec: &ModelSpec<S>,
    x: &[S],
    y: &[S],
) -> Result<ParamVector<S>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let v = initial_values_with_extra(spec, x, y, 1, &[])?;
    ParamVector::new(v)
}

/// Percentile with linear interpolation between order statistics.
pub(crate) fn percentile<S: Scalar>(sorted: &[S], q: f64) -> S {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let w = S::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * w
}

/// Starting values for θ followed by the coefficients on `extra`.
pub(crate) fn initial_values_with_extra<S: Scalar>(
    spec: &ModelSpec<S>,
    x: &[S],
    y: &[S],
    t0: usize,
    extra: &[Vec<S>],
) -> Result<Vec<S>> {
    let np = spec.n_params();
    match spec.family() {
        Family::Linear | Family::Polynomial(_) => {
            let zeros = vec![S::zero(); np];
            let design = build(x, extra, np, |xi, t, row| {
                spec.jacobian_into(xi, t + t0, &zeros, row)
            });
            QrFactor::new(&design)?.solve(y)
        }
        Family::SmoothTransition => {
            let mut sorted = x.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite regressor"));
            let lo = percentile(&sorted, 0.05);
            let hi = percentile(&sorted, 0.95);
            let nd = spec.deterministics().count();
            let mut best: Option<(S, Vec<S>)> = None;
            let mut last_err = None;
            for g in 0..=GRID_STEPS {
                let c = lo + (hi - lo) * S::of_usize(g) / S::of_usize(GRID_STEPS);
                // columns: [deterministics], θ₀, θ₁, θ₂, extras; θ₃ fixed at c
                let design = build(x, extra, np - 1, |xi, t, row| {
                    if nd == 1 {
                        row[0] = S::of_usize(t + t0);
                    }
                    row[nd] = S::one();
                    row[nd + 1] = xi;
                    row[nd + 2] = logistic(xi - c);
                });
                let coef = match QrFactor::new(&design).and_then(|qr| qr.solve(y)) {
                    Ok(c) => c,
                    Err(e) => {
                        last_err = Some(e);
                        continue;
                    }
                };
                let fitted = design.mul_vec(&coef);
                let ssr = sum_sq(
                    &y.iter()
                        .zip(&fitted)
                        .map(|(&a, &b)| a - b)
                        .collect::<Vec<_>>(),
                );
                if best.as_ref().map_or(true, |(s, _)| ssr < *s) {
                    let mut full = coef[..np - 1].to_vec();
                    full.push(c);
                    full.extend_from_slice(&coef[np - 1..]);
                    best = Some((ssr, full));
                }
            }
            best.map(|(_, v)| v)
                .ok_or_else(|| last_err.unwrap_or(Error::RankDeficient { column: 0 }))
        }
        Family::Custom(c) => {
            let mut v = c.initial_values(x, y);
            if v.len() != c.n_params() {
                return Err(Error::DimensionMismatch {
                    expected: c.n_params(),
                    got: v.len(),
                });
            }
            let mut full = vec![S::zero(); spec.deterministics().count()];
            full.append(&mut v);
            full.extend(std::iter::repeat(S::zero()).take(extra.len()));
            Ok(full)
        }
    }
}

fn build<S: Scalar>(
    x: &[S],
    extra: &[Vec<S>],
    base: usize,
    mut fill: impl FnMut(S, usize, &mut [S]),
) -> Matrix<S> {
    let mut m = Matrix::zeros(x.len(), base + extra.len());
    for (i, &xi) in x.iter().enumerate() {
        let row = m.row_mut(i);
        fill(xi, i, &mut row[..base]);
        for (dst, col) in row[base..].iter_mut().zip(extra) {
            *dst = col[i];
        }
    }
    m
}

//! Entropic optimal transport by log-domain Sinkhorn iterations with
//! geometric eps-scaling.
//!
//! The returned value is `⟨P, C⟩^{1/p}` for the regularized plan `P`. It sits
//! above the exact `W_p^p` by at most `eps · log n` in cost units.

use serde::{Deserialize, Serialize};

use super::{check_pair, ground_cost, EmpiricalMeasure};
use crate::error::{invalid, Result};

/// Marginal violation (L1) at which iterations stop.
pub const MARGINAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinkhornResult {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub marginal_error: f64,
}

fn log_sum_exp(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + vals.map(|v| (v - m).exp()).sum::<f64>().ln()
}

struct Problem {
    n: usize,
    cost: Vec<f64>,
    cost_t: Vec<f64>,
    log_w: f64,
}

impl Problem {
    fn update_rows(&self, f: &mut [f64], g: &[f64], eps: f64) {
        let n = self.n;
        for i in 0..n {
            let row = &self.cost[i * n..(i + 1) * n];
            let lse = log_sum_exp(row.iter().zip(g).map(|(c, gj)| (gj - c) / eps));
            f[i] = eps * (self.log_w - lse);
        }
    }

    fn update_cols(&self, f: &[f64], g: &mut [f64], eps: f64) {
        let n = self.n;
        for j in 0..n {
            let col = &self.cost_t[j * n..(j + 1) * n];
            let lse = log_sum_exp(col.iter().zip(f).map(|(c, fi)| (fi - c) / eps));
            g[j] = eps * (self.log_w - lse);
        }
    }

    /// L1 gap between the plan's row sums and the uniform marginal.
    fn row_error(&self, f: &[f64], g: &[f64], eps: f64) -> f64 {
        let n = self.n;
        let w = 1.0 / n as f64;
        (0..n)
            .map(|i| {
                let row = &self.cost[i * n..(i + 1) * n];
                let s: f64 =
                    row.iter().zip(g).map(|(c, gj)| ((f[i] + gj - c) / eps).exp()).sum();
                (s - w).abs()
            })
            .sum()
    }

    fn plan_cost(&self, f: &[f64], g: &[f64], eps: f64) -> f64 {
        let n = self.n;
        let (mut mass, mut total) = (0.0, 0.0);
        for i in 0..n {
            let row = &self.cost[i * n..(i + 1) * n];
            for (c, gj) in row.iter().zip(g) {
                let pij = ((f[i] + gj - c) / eps).exp();
                mass += pij;
                total += pij * c;
            }
        }
        total / mass
    }
}

/// Entropic estimate of `W_p` with regularization `eps` (in cost units).
///
/// Regularization starts at the largest cost and halves down to `eps`,
/// warm-starting the potentials; `max_iter` bounds the total number of
/// row/column sweeps. A result with `converged == false` still carries the
/// last plan's value.
pub fn wp_sinkhorn(
    x: &EmpiricalMeasure,
    y: &EmpiricalMeasure,
    p: f64,
    eps: f64,
    max_iter: usize,
) -> Result<SinkhornResult> {
    check_pair(x, y, p)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("regularization must be positive, got {eps}")));
    }
    let n = x.len();
    let mut cost = vec![0.0; n * n];
    let mut cost_t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let c = ground_cost(x.row(i), y.row(j), p);
            cost[i * n + j] = c;
            cost_t[j * n + i] = c;
        }
    }
    let c_max = cost.iter().cloned().fold(0.0, f64::max);
    let prob = Problem { n, cost, cost_t, log_w: -(n as f64).ln() };
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];

    let mut stage_eps = c_max.max(eps);
    let mut iterations = 0;
    let mut err = f64::INFINITY;
    loop {
        let last_stage = stage_eps <= eps;
        let stage_tol = if last_stage { MARGINAL_TOL } else { 1e-3 };
        let stage_budget = if last_stage { max_iter } else { iterations + 200 };
        while iterations < stage_budget.min(max_iter) {
            prob.update_rows(&mut f, &g, stage_eps);
            prob.update_cols(&f, &mut g, stage_eps);
            iterations += 1;
            err = prob.row_error(&f, &g, stage_eps);
            if err < stage_tol {
                break;
            }
        }
        if last_stage || iterations >= max_iter {
            break;
        }
        stage_eps = (stage_eps * 0.5).max(eps);
    }
    if stage_eps > eps {
        // iteration budget exhausted before reaching the target regularization
        stage_eps = eps;
        err = prob.row_error(&f, &g, stage_eps);
    }
    let value = prob.plan_cost(&f, &g, stage_eps).powf(1.0 / p);
    Ok(SinkhornResult {
        value,
        converged: err < MARGINAL_TOL,
        iterations,
        marginal_error: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::substream;
    use crate::wasserstein::{gaussian_sample, wp_exact};

    #[test]
    fn identical_sets_have_small_value() {
        let x = gaussian_sample(2, 40, &mut substream(2, 0)).unwrap();
        let eps = 1e-3;
        let r = wp_sinkhorn(&x, &x, 2.0, eps, 20_000).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.value.powi(2) <= eps * (40f64).ln() + 1e-6, "{r:?}");
    }

    #[test]
    fn large_eps_approaches_independent_coupling() {
        let mut rng = substream(5, 0);
        let x = gaussian_sample(2, 30, &mut rng).unwrap();
        let y = gaussian_sample(2, 30, &mut rng).unwrap();
        let mut mean = 0.0;
        for a in x.rows() {
            for b in y.rows() {
                mean += ground_cost(a, b, 2.0);
            }
        }
        mean /= 900.0;
        let r = wp_sinkhorn(&x, &y, 2.0, 1e6, 1000).unwrap();
        assert!((r.value - mean.sqrt()).abs() < 1e-3 * mean.sqrt(), "{r:?} vs {}", mean.sqrt());
    }

    #[test]
    fn small_eps_is_close_to_exact() {
        let mut rng = substream(8, 0);
        let x = gaussian_sample(2, 64, &mut rng).unwrap();
        let y = gaussian_sample(2, 64, &mut rng).unwrap();
        let exact = wp_exact(&x, &y, 2.0).unwrap();
        let r = wp_sinkhorn(&x, &y, 2.0, 1e-3, 50_000).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.value >= exact - 1e-9);
        assert!((r.value - exact) / exact < 0.01, "{} vs {exact}", r.value);
    }

    #[test]
    fn rejects_bad_eps() {
        let x = gaussian_sample(1, 4, &mut substream(1, 0)).unwrap();
        assert!(wp_sinkhorn(&x, &x, 2.0, 0.0, 10).is_err());
    }
}

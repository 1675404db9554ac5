//! Ornstein–Uhlenbeck semigroup by Mehler's formula.
//!
//! `P_t φ(x) = E[φ(x e^{-t} + √(1-e^{-2t}) Y)]` with `Y ~ N(0, I_d)`, and its
//! derivatives through Gaussian integration by parts:
//! `∂^α P_t φ(x) = Δ(t)^{-|α|/2} E[H_α(Y) φ(x e^{-t} + √(1-e^{-2t}) Y)]`,
//! `Δ(t) = e^{2t} - 1`. Estimates are Monte Carlo; calls sharing a seed
//! reuse the same Gaussian draws.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hermite::hermite_eval;
use crate::mc::{mc_mean, Estimate, McConfig, McRng};
use crate::tensor::MultiIndex;

/// Non-negative semigroup time.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TimePoint(f64);

impl TimePoint {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid(format!("time must be finite and non-negative, got {t}")));
        }
        Ok(TimePoint(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `Δ(t) = e^{2t} - 1`.
    pub fn delta(self) -> f64 {
        (2.0 * self.0).exp_m1()
    }

    /// `e^{-t}`.
    pub fn decay(self) -> f64 {
        (-self.0).exp()
    }

    /// `√(1 - e^{-2t})`.
    pub fn noise_scale(self) -> f64 {
        (-(-2.0 * self.0).exp_m1()).sqrt()
    }
}

pub fn delta(t: TimePoint) -> f64 {
    t.delta()
}

pub(crate) fn standard_normal_vec(rng: &mut McRng, out: &mut [f64]) {
    for o in out.iter_mut() {
        *o = StandardNormal.sample(rng);
    }
}

fn check_mc(mc: &McConfig) -> Result<()> {
    if mc.n_samples < 2 {
        return Err(invalid("Monte Carlo needs at least 2 samples"));
    }
    Ok(())
}

/// Monte Carlo estimate of `P_t φ(x)`; exact `φ(x)` at `t = 0`.
pub fn pt_apply<F>(phi: F, t: TimePoint, x: &[f64], mc: McConfig) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_mc(&mc)?;
    if t.value() == 0.0 {
        let v = phi(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("φ(x) = {v}")));
        }
        return Ok(Estimate::exact(v));
    }
    let (a, b) = (t.decay(), t.noise_scale());
    let d = x.len();
    mc_mean(mc, |rng| {
        let mut y = vec![0.0; d];
        standard_normal_vec(rng, &mut y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi * a + b * *yi;
        }
        Ok(phi(&y))
    })
}

/// Monte Carlo estimate of `∂^α P_t φ(x)` for `t > 0`.
pub fn pt_partial<F>(
    phi: F,
    alpha: &MultiIndex,
    t: TimePoint,
    x: &[f64],
    mc: McConfig,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_mc(&mc)?;
    if t.value() == 0.0 {
        return Err(invalid("derivative representation is singular at t = 0"));
    }
    if alpha.dim() != x.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: alpha.dim() });
    }
    let (a, b) = (t.decay(), t.noise_scale());
    let prefactor = t.delta().powf(-(alpha.abs() as f64) / 2.0);
    let d = x.len();
    let est = mc_mean(mc, |rng| {
        let mut y = vec![0.0; d];
        standard_normal_vec(rng, &mut y);
        let h = hermite_eval(alpha, &y)?;
        let point: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| xi * a + b * yi).collect();
        Ok(h * phi(&point))
    })?;
    Ok(Estimate { mean: prefactor * est.mean, se: prefactor * est.se, n: est.n })
}

//! Monte Carlo residual tests for the identities behind the bounds.
//!
//! With `F_t = e^{-t} X₀ + √(1-e^{-2t}) Z`, `Z ~ N(0, I_d)` independent of
//! everything else:
//! - score: `E[φ(F_t)(F_t - ρ_t)] = E[∇φ(F_t)]` for
//!   `ρ_t = e^{-t} X₀ - e^{-2t}(1-e^{-2t})^{-1/2} Z`;
//! - for an exchangeable pair, `E[τ_t φ(F_t)] = 0` with
//!   `τ_t = e^{-t}/(2s) D (1 + Σ_α D^α H_α(Z) / (α! Δ^{|α|/2}))`,
//!   `D = X_t - X₀`, the sum running over all `α` including `0`. The
//!   bracket is read as the conditional expectation given `(X₀, Z)`, which
//!   it already is.
//!
//! The integrability checks are heuristics: a finite sample mean of an
//! exponential moment says little about its finiteness.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hermite::hermite_1d_all;
use crate::mc::{mc_vec, McConfig, McRng};
use crate::ou::{standard_normal_vec, TimePoint};
use crate::stein_bound::{PairProcess, PairSample};

/// Residuals pass when `|estimate| ≤ PASS_SE · se + remainder`.
pub const PASS_SE: f64 = 4.0;

/// Exponents above this are clamped and flagged.
pub const OVERFLOW_EXPONENT: f64 = 700.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub statistic: String,
    pub estimate: f64,
    pub se: f64,
    /// Bound on the part of the statistic left out by truncation.
    pub remainder: f64,
    pub pass: bool,
    pub n_mc: usize,
    pub seed: u64,
}

impl ResidualReport {
    fn new(statistic: String, estimate: f64, se: f64, remainder: f64, n_mc: usize, seed: u64) -> Self {
        let pass = estimate.abs() <= PASS_SE * se + remainder;
        ResidualReport { statistic, estimate, se, remainder, pass, n_mc, seed }
    }
}

/// Smooth test functions `φ: ℝ^d → ℝ` with their gradients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Constant(f64),
    /// `x_j`.
    Coordinate(usize),
    /// `tanh(w·x + b)`.
    Tanh { weights: Vec<f64>, offset: f64 },
    /// `exp(-‖x - c‖² / (2 w²))`.
    Bump { center: Vec<f64>, width: f64 },
}

impl TestFunction {
    fn check(&self, d: usize) -> Result<()> {
        let ok = match self {
            TestFunction::Constant(_) => true,
            TestFunction::Coordinate(j) => *j < d,
            TestFunction::Tanh { weights, .. } => weights.len() == d,
            TestFunction::Bump { center, width } => center.len() == d && *width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("test function {self:?} does not fit dimension {d}")))
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Coordinate(j) => x[*j],
            TestFunction::Tanh { weights, offset } => {
                (weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + offset).tanh()
            }
            TestFunction::Bump { center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                (-r2 / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            TestFunction::Constant(_) => out.iter_mut().for_each(|g| *g = 0.0),
            TestFunction::Coordinate(j) => {
                out.iter_mut().enumerate().for_each(|(i, g)| *g = if i == *j { 1.0 } else { 0.0 })
            }
            TestFunction::Tanh { weights, .. } => {
                let th = self.value(x);
                out.iter_mut().zip(weights).for_each(|(g, w)| *g = (1.0 - th * th) * w);
            }
            TestFunction::Bump { center, width } => {
                let v = self.value(x);
                for ((g, a), c) in out.iter_mut().zip(x).zip(center) {
                    *g = -v * (a - c) / (width * width);
                }
            }
        }
    }

    /// `sup |φ|`, infinite for unbounded functions.
    pub fn sup(&self) -> f64 {
        match self {
            TestFunction::Constant(c) => c.abs(),
            TestFunction::Coordinate(_) => f64::INFINITY,
            TestFunction::Tanh { .. } | TestFunction::Bump { .. } => 1.0,
        }
    }
}

/// A sampler for the law of `X₀`.
pub trait InitialLaw: Sync {
    fn dim(&self) -> usize;
    fn sample_x0(&self, rng: &mut McRng, out: &mut [f64]) -> Result<()>;
}

/// `X₀ ~ N(0, I_d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianLaw {
    pub dim: usize,
}

impl InitialLaw for GaussianLaw {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_x0(&self, rng: &mut McRng, out: &mut [f64]) -> Result<()> {
        standard_normal_vec(rng, out);
        Ok(())
    }
}

/// The `X₀`-marginal of a pair process.
pub struct ProcessLaw<'a>(pub &'a dyn PairProcess);

impl InitialLaw for ProcessLaw<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn sample_x0(&self, rng: &mut McRng, out: &mut [f64]) -> Result<()> {
        let pair = self.0.sample(TimePoint::new(1.0)?, rng)?;
        out.copy_from_slice(&pair.x0);
        Ok(())
    }
}

/// Which `ρ_t` the score residual uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreForm {
    #[default]
    Exact,
    /// `ρ_t = e^{-t} X₀`: the noise term dropped, a deliberately broken variant.
    DropNoise,
}

fn check_t(t: TimePoint) -> Result<()> {
    if t.value() <= 0.0 {
        return Err(invalid("residual tests need t > 0"));
    }
    Ok(())
}

/// Per coordinate `j`: `E[φ(F_t)(F_t - ρ_t)_j - ∂_j φ(F_t)]`.
pub fn score_ibp_residual(
    law: &dyn InitialLaw,
    t: TimePoint,
    phi: &TestFunction,
    form: ScoreForm,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<ResidualReport>> {
    check_t(t)?;
    let d = law.dim();
    phi.check(d)?;
    let (decay, sigma) = (t.decay(), t.noise_scale());
    let est = mc_vec(McConfig::new(n_mc, seed), d, |rng, out| {
        let mut x0 = vec![0.0; d];
        let mut z = vec![0.0; d];
        law.sample_x0(rng, &mut x0)?;
        standard_normal_vec(rng, &mut z);
        let f: Vec<f64> = x0.iter().zip(&z).map(|(x, z)| decay * x + sigma * z).collect();
        let mut grad = vec![0.0; d];
        phi.gradient(&f, &mut grad);
        let v = phi.value(&f);
        for j in 0..d {
            let rho = match form {
                ScoreForm::Exact => decay * x0[j] - decay * decay / sigma * z[j],
                ScoreForm::DropNoise => decay * x0[j],
            };
            out[j] = v * (f[j] - rho) - grad[j];
        }
        Ok(())
    })?;
    Ok(est
        .iter()
        .enumerate()
        .map(|(j, e)| {
            ResidualReport::new(format!("score residual, coordinate {}", j + 1), e.mean, e.se, 0.0, n_mc, seed)
        })
        .collect())
}

/// `Σ_{|α|≤K} u^α H_α(z) / α!`, summed over the product structure.
fn truncated_hermite_sum(u: &[f64], z: &[f64], k: u32) -> f64 {
    // rows[j][a] = u_j^a H_a(z_j) / a!
    let rows: Vec<Vec<f64>> = u
        .iter()
        .zip(z)
        .map(|(&uj, &zj)| {
            let h = hermite_1d_all(k, zj);
            let mut c = 1.0;
            h.iter()
                .enumerate()
                .map(|(a, ha)| {
                    if a > 0 {
                        c *= uj / a as f64;
                    }
                    c * ha
                })
                .collect()
        })
        .collect();
    // acc[m] = partial sums over the first coordinates with total degree m
    let mut acc = vec![0.0; k as usize + 1];
    acc[0] = 1.0;
    for row in &rows {
        let mut next = vec![0.0; k as usize + 1];
        for (m, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (b, &r) in row.iter().enumerate().take(k as usize + 1 - m) {
                next[m + b] += a * r;
            }
        }
        acc = next;
    }
    acc.iter().sum()
}

/// `√(e^x - Σ_{k≤K} x^k/k!)`, the `L²` norm of the neglected Hermite tail.
fn tail_norm(x: f64, k: u32) -> f64 {
    let mut term = 1.0;
    let mut head = 1.0;
    for j in 1..=k {
        term *= x / j as f64;
        head += term;
    }
    let mut tail = x.exp() - head;
    if tail < 1e-3 * x.exp() {
        // direct summation avoids cancellation
        tail = 0.0;
        let mut j = k + 1;
        term *= x / j as f64;
        while term > 1e-17 * tail.max(f64::MIN_POSITIVE) {
            tail += term;
            j += 1;
            term *= x / j as f64;
        }
    }
    tail.max(0.0).sqrt()
}

/// Per coordinate: `E[τ_t^{(K)} φ(F_t)]` with the Hermite series cut at
/// `|α| ≤ K`, and the bound
/// `e^{-t}/(2s) sup|φ| E[|D_j| √(e^{‖D‖²/Δ} - Σ_{k≤K} (‖D‖²/Δ)^k/k!)]`
/// on the neglected part.
pub fn tau_exch_residual(
    process: &dyn PairProcess,
    t: TimePoint,
    s: f64,
    k: u32,
    phi: &TestFunction,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<ResidualReport>> {
    check_t(t)?;
    if !process.exchangeable() {
        return Err(Error::NotExchangeable(
            "the τ_t identity needs (X₀, X_t) and (X_t, X₀) to share the same law".into(),
        ));
    }
    if !(s > 0.0) {
        return Err(invalid(format!("scale s must be positive, got {s}")));
    }
    let d = process.dim();
    phi.check(d)?;
    let (decay, sigma, delta) = (t.decay(), t.noise_scale(), t.delta());
    let lead = decay / (2.0 * s);
    let sup = phi.sup();
    let est = mc_vec(McConfig::new(n_mc, seed), 2 * d, |rng, out| {
        let pair = process.sample(t, rng)?;
        let dx = pair.displacement();
        let mut z = vec![0.0; d];
        standard_normal_vec(rng, &mut z);
        let f: Vec<f64> = pair.x0.iter().zip(&z).map(|(x, z)| decay * x + sigma * z).collect();
        let v = phi.value(&f);
        let u: Vec<f64> = dx.iter().map(|a| a / delta.sqrt()).collect();
        let series = if dx.iter().all(|a| *a == 0.0) { 0.0 } else { truncated_hermite_sum(&u, &z, k) };
        let norm2: f64 = u.iter().map(|a| a * a).sum();
        let tail = if sup.is_finite() && norm2 > 0.0 { tail_norm(norm2, k) } else { 0.0 };
        for j in 0..d {
            out[j] = lead * dx[j] * (1.0 + series) * v;
            out[d + j] = dx[j].abs() * tail;
        }
        Ok(())
    })?;
    Ok((0..d)
        .map(|j| {
            let rem = if sup.is_finite() {
                lead * sup * (est[d + j].mean + PASS_SE * est[d + j].se)
            } else if est[d + j].mean == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ResidualReport::new(
                format!("tau residual (K = {k}), coordinate {}", j + 1),
                est[j].mean,
                est[j].se,
                rem,
                n_mc,
                seed,
            )
        })
        .collect())
}

type Battery = (&'static str, fn(&[f64]) -> f64, fn(&[f64]) -> f64);

fn battery() -> [Battery; 6] {
    [
        ("x1 | 1", |x| x[0], |_| 1.0),
        ("x1^2 | 1", |x| x[0] * x[0], |_| 1.0),
        ("x1 | x1^2", |x| x[0], |x| x[0] * x[0]),
        ("x1 | x1^3", |x| x[0], |x| x[0].powi(3)),
        ("x1*xd | x1", |x| x[0] * x[x.len() - 1], |x| x[0]),
        ("sin(x1) | xd", |x| x[0].sin(), |x| x[x.len() - 1]),
    ]
}

/// `E[f(X_t) g(X₀)] - E[f(X₀) g(X_t)]` for six fixed `(f, g)` pairs.
pub fn exchangeability_check(
    process: &dyn PairProcess,
    t: TimePoint,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<ResidualReport>> {
    let tests = battery();
    let est = mc_vec(McConfig::new(n_mc, seed), tests.len(), |rng, out| {
        let PairSample { x0, xt, .. } = process.sample(t, rng)?;
        for (o, (_, f, g)) in out.iter_mut().zip(&tests) {
            *o = f(&xt) * g(&x0) - f(&x0) * g(&xt);
        }
        Ok(())
    })?;
    Ok(tests
        .iter()
        .zip(&est)
        .map(|((name, _, _), e)| {
            ResidualReport::new(format!("exchangeability {name}"), e.mean, e.se, 0.0, n_mc, seed)
        })
        .collect())
}

/// The three exponential-moment integrability conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `E[exp((1+ξ)‖D‖²/Δ)]`.
    C1,
    /// `E[exp(p(1+ξ) b |D|²/(2Δ))]`, `b = max(1, p-1)`.
    C2,
    /// `E[‖D‖^{p(1+ξ)} exp(p(1+ξ) b ‖D‖²/(2Δ))]`.
    C3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub estimate: f64,
    pub se: f64,
    /// Some sampled exponent exceeded [`OVERFLOW_EXPONENT`]; the estimate
    /// then uses clamped exponents and means nothing.
    pub overflow: bool,
    pub n_mc: usize,
    pub seed: u64,
    pub note: String,
}

#[allow(clippy::too_many_arguments)]
pub fn condition_check(
    process: &dyn PairProcess,
    t: TimePoint,
    xi: f64,
    p: f64,
    condition: Condition,
    n_mc: usize,
    seed: u64,
) -> Result<ConditionReport> {
    check_t(t)?;
    if !(xi > 0.0) || !(p >= 1.0) {
        return Err(invalid(format!("need ξ > 0 and p >= 1, got ξ = {xi}, p = {p}")));
    }
    let delta = t.delta();
    let b = (p - 1.0).max(1.0);
    let est = mc_vec(McConfig::new(n_mc, seed), 2, |rng, out| {
        let pair = process.sample(t, rng)?;
        let r2: f64 = pair.displacement().iter().map(|a| a * a).sum();
        let (expo, pre) = match condition {
            Condition::C1 => ((1.0 + xi) * r2 / delta, 1.0),
            Condition::C2 => (p * (1.0 + xi) * b * r2 / (2.0 * delta), 1.0),
            Condition::C3 => {
                (p * (1.0 + xi) * b * r2 / (2.0 * delta), r2.sqrt().powf(p * (1.0 + xi)))
            }
        };
        let over = !(expo <= OVERFLOW_EXPONENT);
        let value = pre * expo.min(OVERFLOW_EXPONENT).exp();
        out[0] = if value.is_finite() { value } else { f64::MAX.sqrt() };
        out[1] = if over || !value.is_finite() { 1.0 } else { 0.0 };
        Ok(())
    })?;
    Ok(ConditionReport {
        condition,
        estimate: est[0].mean,
        se: est[0].se,
        overflow: est[1].mean > 0.0,
        n_mc,
        seed,
        note: "heuristic Monte Carlo check, not a proof of integrability".into(),
    })
}

/// `X_t = X₀ ~ N(0, I_d)` for every `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticProcess {
    pub dim: usize,
}

impl PairProcess for StaticProcess {
    fn dim(&self) -> usize {
        self.dim
    }

    fn scale(&self) -> f64 {
        1.0
    }

    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<PairSample> {
        let mut x = vec![0.0; self.dim];
        standard_normal_vec(rng, &mut x);
        PairSample::new(x.clone(), x, t)
    }

    fn displacement_bound(&self, _t: TimePoint) -> Option<f64> {
        Some(0.0)
    }

    fn exchangeable(&self) -> bool {
        true
    }
}

/// `X_t = X₀ + shift` with `X₀` from an inner process: not exchangeable.
pub struct ShiftedProcess<'a> {
    pub inner: &'a dyn PairProcess,
    pub shift: Vec<f64>,
}

impl PairProcess for ShiftedProcess<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<PairSample> {
        let x0 = self.inner.sample(t, rng)?.x0;
        let xt = x0.iter().zip(&self.shift).map(|(x, s)| x + s).collect();
        PairSample::new(x0, xt, t)
    }
}

/// `X₀`, `X_t` independent with standard Cauchy coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyProcess {
    pub dim: usize,
}

impl PairProcess for CauchyProcess {
    fn dim(&self) -> usize {
        self.dim
    }

    fn scale(&self) -> f64 {
        1.0
    }

    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<PairSample> {
        let draw = |rng: &mut McRng| -> Vec<f64> {
            (0..self.dim)
                .map(|_| (std::f64::consts::PI * (rand::Rng::random::<f64>(rng) - 0.5)).tan())
                .collect()
        };
        let x0 = draw(rng);
        let xt = draw(rng);
        PairSample::new(x0, xt, t)
    }

    fn exchangeable(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clt::{CltProcess, Coordinate, ProductModel};

    fn tp(t: f64) -> TimePoint {
        TimePoint::new(t).unwrap()
    }

    #[test]
    fn hermite_sum_matches_generating_function() {
        // Σ_α u^α H_α(z)/α! → exp(u·z - ‖u‖²/2)
        let u = [0.3f64, -0.2];
        let z = [0.7, 1.1];
        let full = (u[0] * z[0] + u[1] * z[1] - (u[0] * u[0] + u[1] * u[1]) / 2.0).exp();
        assert!((truncated_hermite_sum(&u, &z, 30) - full).abs() < 1e-14);
        assert_eq!(truncated_hermite_sum(&u, &z, 0), 1.0);
        let one = 1.0 + u[0] * z[0] + u[1] * z[1];
        assert!((truncated_hermite_sum(&u, &z, 1) - one).abs() < 1e-15);
    }

    #[test]
    fn tail_norm_is_accurate_for_small_arguments() {
        let x: f64 = 1e-3;
        let want = (x.powi(3) / 6.0 * (1.0 + x / 4.0 + x * x / 20.0 + x.powi(3) / 120.0)).sqrt();
        assert!((tail_norm(x, 2) - want).abs() < 1e-10 * want);
        assert!((tail_norm(2.0, 0) - (2f64.exp() - 1.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn score_residual_cases() {
        let g = GaussianLaw { dim: 2 };
        let c = score_ibp_residual(&g, tp(0.5), &TestFunction::Constant(2.0), ScoreForm::Exact, 100_000, 1)
            .unwrap();
        assert!(c.iter().all(|r| r.pass), "{c:?}");
        let x = score_ibp_residual(&g, tp(0.5), &TestFunction::Coordinate(0), ScoreForm::Exact, 200_000, 2)
            .unwrap();
        assert!(x.iter().all(|r| r.pass), "{x:?}");
        let bad = score_ibp_residual(&g, tp(0.5), &TestFunction::Coordinate(0), ScoreForm::DropNoise, 1_000_000, 3)
            .unwrap();
        assert!(!bad[0].pass, "{bad:?}");
        // the broken statistic has mean -e^{-2t} in the tested coordinate
        assert!((bad[0].estimate + (-1f64).exp()).abs() < 4.0 * bad[0].se);
    }

    #[test]
    fn tau_residual_static_process_is_exactly_zero() {
        let r = tau_exch_residual(&StaticProcess { dim: 2 }, tp(0.4), 1.0, 3, &TestFunction::Coordinate(1), 1000, 1)
            .unwrap();
        for rep in r {
            assert_eq!((rep.estimate, rep.se, rep.remainder), (0.0, 0.0, 0.0));
            assert!(rep.pass);
        }
    }

    #[test]
    fn tau_residual_needs_exchangeability() {
        let st = StaticProcess { dim: 1 };
        let sh = ShiftedProcess { inner: &st, shift: vec![1.0] };
        let r = tau_exch_residual(&sh, tp(1.0), 1.0, 2, &TestFunction::Constant(1.0), 10, 0);
        assert!(matches!(r, Err(Error::NotExchangeable(_))));
    }

    #[test]
    fn tau_residual_on_the_clt_process() {
        let m = ProductModel::new(Coordinate::Rademacher, 1).unwrap();
        let proc = CltProcess { model: &m, n: 8 };
        let phi = TestFunction::Tanh { weights: vec![1.0], offset: 0.5 };
        let t = tp(1.0);
        let full = tau_exch_residual(&proc, t, 1.0 / 8.0, 6, &phi, 400_000, 9).unwrap();
        assert!(full[0].pass, "{full:?}");
        assert!(full[0].remainder < 1e-4, "{full:?}");
        let lead = tau_exch_residual(&proc, t, 1.0 / 8.0, 0, &phi, 400_000, 9).unwrap();
        // without the K ≥ 1 correction the mean is visibly off zero
        assert!(lead[0].estimate.abs() > PASS_SE * lead[0].se, "{lead:?}");
        assert!(lead[0].remainder >= lead[0].estimate.abs());
        assert!((lead[0].estimate - full[0].estimate).abs() > 0.5 * lead[0].estimate.abs());
    }

    #[test]
    fn exchangeability_cases() {
        let m = ProductModel::new(Coordinate::Exponential, 2).unwrap();
        let proc = CltProcess { model: &m, n: 8 };
        let r = exchangeability_check(&proc, tp(0.3), 200_000, 4).unwrap();
        assert_eq!(r.len(), 6);
        assert!(r.iter().all(|x| x.pass), "{r:?}");
        let st = StaticProcess { dim: 2 };
        for x in exchangeability_check(&st, tp(0.3), 1000, 4).unwrap() {
            assert_eq!((x.estimate, x.se), (0.0, 0.0));
        }
        let sh = ShiftedProcess { inner: &st, shift: vec![1.0, 0.0] };
        let r = exchangeability_check(&sh, tp(0.3), 1000, 4).unwrap();
        assert!((r[0].estimate - 1.0).abs() < 1e-12);
        assert!(!r[0].pass);
    }

    #[test]
    fn conditions() {
        let m = ProductModel::new(Coordinate::Gaussian, 1).unwrap();
        let proc = CltProcess { model: &m, n: 16 };
        for c in [Condition::C1, Condition::C2, Condition::C3] {
            let r = condition_check(&proc, tp(0.5), 0.5, 3.0, c, 20_000, 1).unwrap();
            assert!(!r.overflow && r.estimate.is_finite(), "{r:?}");
        }
        // ‖D‖² ≤ 4Δ caps the C1 exponent at 4(1 + ξ)
        let r = condition_check(&proc, tp(0.5), 0.5, 2.0, Condition::C1, 20_000, 1).unwrap();
        assert!(r.estimate <= 6f64.exp());
        let st = StaticProcess { dim: 3 };
        let r = condition_check(&st, tp(0.5), 1.0, 2.0, Condition::C1, 100, 1).unwrap();
        assert_eq!((r.estimate, r.se), (1.0, 0.0));
        let r = condition_check(&CauchyProcess { dim: 1 }, tp(0.5), 0.1, 2.0, Condition::C1, 10_000, 1)
            .unwrap();
        assert!(r.overflow);
    }
}

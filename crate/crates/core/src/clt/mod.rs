//! Normalized sums `S_n = n^{-1/2} Σ X_i` of i.i.d. summands.
//!
//! The exchangeable pair is
//! `(S_n)_t = S_n + n^{-1/2} (X'_I - X_I) 1{max(‖X_I‖, ‖X'_I‖) ≤ √(nΔ(t))}`
//! with `X'` an independent copy of the summands and `I` uniform on
//! `{1..n}`, so `‖(S_n)_t - S_n‖ ≤ 2√Δ(t)` and the scale is `s = 1/n`.
//! Writing `v_i = (X'_i - X_i) 1{max(‖X_i‖, ‖X'_i‖) ≤ √(nΔ)}`, the
//! surrogate of the integrand is
//!
//! `R(t) = n^{-1} ‖Σ (X_i - X'_i) 1{max > √(nΔ)}‖² + c₂ ‖Σ v_i^{⊗2}/(2n) - E[X^{⊗2}]‖²/Δ
//!        + Σ_{k≥3} w_k ‖Σ v_i^{⊗k}‖² / n^{k+2}`
//!
//! with the weights `c₂, w_k` of [`Route::Quadratic`] (`p = 2`) or
//! [`Route::Exchangeable`] (`p > 2`) at `s = 1/n`.

mod bounds;
mod constants;
mod models;
mod moments;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mc::{derive_seed, substream, McRng, DEFAULT_CHUNK};
use crate::ou::TimePoint;
use crate::stein_bound::{
    ln_series_term_weight, series_depth, term_weight, PairProcess, PairSample, Route,
    SurrogateOracle, DEFAULT_TRUNCATION_TOL,
};
use crate::tensor::{hs_norm_sq, SymTensor};
use crate::wasserstein::EmpiricalMeasure;

pub use bounds::{bound_w2_general, bound_w2_identity_cov, bound_wp, m_coefficients, MlForm, WpBound};
pub use constants::{clt_constants, CltConstants};
pub use models::{
    Coordinate, DistributionModel, ModelSpec, PointMassModel, ProductModel, ScaledModel,
    SphereModel,
};
pub use moments::{moment_stats, Moment, MomentGrid, MomentTable, SE_FOLD};

/// Weight family of `R(t)` for order `p`.
pub fn clt_route(p: f64) -> Route {
    if p == 2.0 {
        Route::Quadratic
    } else {
        Route::Exchangeable
    }
}

/// Series depth of `R(t)` certified by `‖v_i‖ ≤ 2√(nΔ)`.
pub fn clt_series_depth(n: usize, t: TimePoint, p: f64, tol: f64) -> Result<u32> {
    let delta = t.delta();
    series_depth(clt_route(p), p, 2.0 * delta.sqrt(), delta, 1.0 / n as f64, tol)
}

/// One draw of `X_1..X_n`, `X'_1..X'_n` and `I`, reusable across times.
#[derive(Clone, Debug, PartialEq)]
pub struct CltDraw {
    n: usize,
    dim: usize,
    x: Vec<f64>,
    xp: Vec<f64>,
    /// `max(‖X_i‖, ‖X'_i‖)`.
    reach: Vec<f64>,
    index: usize,
    sum: Vec<f64>,
}

/// The groups of one `R(t)` sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RTerms {
    pub drift: f64,
    pub second: f64,
    /// Weighted series terms for `k = 3, 4, ...`.
    pub series: Vec<f64>,
}

impl RTerms {
    pub fn total(&self) -> f64 {
        self.drift + self.second + self.series.iter().sum::<f64>()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl CltDraw {
    pub fn new(model: &dyn DistributionModel, n: usize, rng: &mut McRng) -> Result<Self> {
        if n == 0 {
            return Err(invalid("need at least one summand"));
        }
        let d = model.dim();
        let mut x = vec![0.0; n * d];
        let mut xp = vec![0.0; n * d];
        for row in x.chunks_exact_mut(d) {
            model.sample(rng, row);
        }
        for row in xp.chunks_exact_mut(d) {
            model.sample(rng, row);
        }
        let index = rand::Rng::random_range(rng, 0..n);
        let reach = x
            .chunks_exact(d)
            .zip(xp.chunks_exact(d))
            .map(|(a, b)| norm(a).max(norm(b)))
            .collect();
        let mut sum = vec![0.0; d];
        for row in x.chunks_exact(d) {
            sum.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        Ok(CltDraw { n, dim: d, x, xp, reach, index, sum })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn summand(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn copy(&self, i: usize) -> &[f64] {
        &self.xp[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `√(nΔ(t))`.
    pub fn threshold(&self, t: TimePoint) -> f64 {
        (self.n as f64 * t.delta()).sqrt()
    }

    /// `(S_n, (S_n)_t)`.
    pub fn pair(&self, t: TimePoint) -> Result<PairSample> {
        let r = (self.n as f64).sqrt();
        let x0: Vec<f64> = self.sum.iter().map(|s| s / r).collect();
        let mut xt = x0.clone();
        let i = self.index;
        if self.reach[i] <= self.threshold(t) {
            for ((v, a), b) in xt.iter_mut().zip(self.summand(i)).zip(self.copy(i)) {
                *v += (b - a) / r;
            }
        }
        PairSample::new(x0, xt, t)
    }

    /// The groups of `R(t)` for order `p ≥ 2`, given `E[X^{⊗2}]`.
    pub fn r_terms(&self, cov: &SymTensor, t: TimePoint, p: f64, tol: f64) -> Result<RTerms> {
        let depth = clt_series_depth(self.n, t, p, tol)?;
        self.r_terms_to_depth(cov, t, p, depth)
    }

    /// [`CltDraw::r_terms`] with the series cut after `k = depth`.
    pub fn r_terms_to_depth(
        &self,
        cov: &SymTensor,
        t: TimePoint,
        p: f64,
        depth: u32,
    ) -> Result<RTerms> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(invalid(format!("the CLT surrogate needs p >= 2, got {p}")));
        }
        if t.value() <= 0.0 {
            return Err(invalid("R(t) is defined for t > 0"));
        }
        let (n, d) = (self.n, self.dim);
        if cov.dim() != d || cov.degree() != 2 {
            return Err(Error::ShapeMismatch(d, 2, cov.dim(), cov.degree() as usize));
        }
        let nf = n as f64;
        let delta = t.delta();
        let c = self.threshold(t);
        let route = clt_route(p);
        let s = 1.0 / nf;

        let mut excluded = vec![0.0; d];
        let mut kept = Vec::new();
        for i in 0..n {
            let (a, b) = (self.summand(i), self.copy(i));
            if self.reach[i] > c {
                excluded.iter_mut().zip(a.iter().zip(b)).for_each(|(e, (u, v))| *e += u - v);
            } else {
                kept.extend(a.iter().zip(b).map(|(u, v)| v - u));
            }
        }
        let drift = excluded.iter().map(|v| v * v).sum::<f64>() / nf;

        let mut t2 = SymTensor::zeros(d, 2)?;
        for v in kept.chunks_exact(d) {
            t2.add_power(1.0, v)?;
        }
        let mut centered = t2.scaled(1.0 / (2.0 * nf));
        centered.axpy(-1.0, cov)?;
        let second = term_weight(route, 2, p, s, delta) * hs_norm_sq(&centered);

        let mut series = Vec::with_capacity(depth.saturating_sub(2) as usize);
        // d = 1: running powers v_i^k
        let mut pw: Vec<f64> = if d == 1 { kept.iter().map(|v| v * v).collect() } else { Vec::new() };
        for k in 3..=depth {
            let ns = if d == 1 {
                let mut acc = 0.0;
                for (pk, v) in pw.iter_mut().zip(&kept) {
                    *pk *= v;
                    acc += *pk;
                }
                acc * acc
            } else {
                let mut tk = SymTensor::zeros(d, k)?;
                for v in kept.chunks_exact(d) {
                    tk.add_power(1.0, v)?;
                }
                hs_norm_sq(&tk)
            };
            series.push(if ns > 0.0 {
                (ln_series_term_weight(route, k, p, s, delta) + ns.ln() - (k as f64 + 2.0) * nf.ln())
                    .exp()
            } else {
                0.0
            });
        }
        Ok(RTerms { drift, second, series })
    }
}

/// Draws `(S_n, (S_n)_t)`.
pub fn sample_pair(
    model: &dyn DistributionModel,
    n: usize,
    t: TimePoint,
    rng: &mut McRng,
) -> Result<PairSample> {
    CltDraw::new(model, n, rng)?.pair(t)
}

fn model_cov(model: &dyn DistributionModel) -> Result<SymTensor> {
    model.cov().ok_or_else(|| Error::MissingMoment { model: model.name(), what: "E[X⊗X]".into() })
}

/// One sample of `R(t)` with the default truncation tolerance.
pub fn r_t_sample(
    model: &dyn DistributionModel,
    n: usize,
    t: TimePoint,
    p: f64,
    rng: &mut McRng,
) -> Result<f64> {
    let cov = model_cov(model)?;
    Ok(CltDraw::new(model, n, rng)?.r_terms(&cov, t, p, DEFAULT_TRUNCATION_TOL)?.total())
}

/// `R(t)` packaged for [`crate::stein_bound::w_bound`].
pub struct CltSurrogate<'a> {
    model: &'a dyn DistributionModel,
    n: usize,
    p: f64,
    cov: SymTensor,
    tol: f64,
    /// Depth at `tol`; the ratio `B²/Δ = 4` makes it independent of `t`.
    depth: u32,
}

pub fn surrogate(model: &dyn DistributionModel, n: usize, p: f64) -> Result<CltSurrogate<'_>> {
    if n == 0 {
        return Err(invalid("need at least one summand"));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("the CLT surrogate needs p >= 2, got {p}")));
    }
    let tol = DEFAULT_TRUNCATION_TOL;
    let depth = clt_series_depth(n, TimePoint::new(1.0)?, p, tol)?;
    Ok(CltSurrogate { model, n, p, cov: model_cov(model)?, tol, depth })
}

impl CltSurrogate<'_> {
    pub fn with_tolerance(mut self, tol: f64) -> Result<Self> {
        self.depth = clt_series_depth(self.n, TimePoint::new(1.0)?, self.p, tol)?;
        self.tol = tol;
        Ok(self)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Scale `s = 1/n` implied by the normalization of `R(t)`.
    pub fn scale(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn exchangeable(&self) -> bool {
        true
    }
}

impl SurrogateOracle for CltSurrogate<'_> {
    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<f64> {
        let draw = CltDraw::new(self.model, self.n, rng)?;
        Ok(draw.r_terms_to_depth(&self.cov, t, self.p, self.depth)?.total())
    }

    fn breakpoints(&self) -> Vec<f64> {
        // with ‖X‖ constant every indicator flips at nΔ = ‖X‖²
        match self.model.constant_norm() {
            Some(r) if r > 0.0 => vec![0.5 * (r * r / self.n as f64).ln_1p()],
            _ => Vec::new(),
        }
    }

    fn series_depth(&self, _t: TimePoint) -> Result<Option<u32>> {
        Ok(Some(self.depth))
    }
}

/// `(S_n, (S_n)_t)` as a [`PairProcess`].
pub struct CltProcess<'a> {
    pub model: &'a dyn DistributionModel,
    pub n: usize,
}

impl PairProcess for CltProcess<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn scale(&self) -> f64 {
        1.0 / self.n as f64
    }

    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<PairSample> {
        sample_pair(self.model, self.n, t, rng)
    }

    fn displacement_bound(&self, t: TimePoint) -> Option<f64> {
        Some(2.0 * t.delta().sqrt())
    }

    fn exchangeable(&self) -> bool {
        true
    }
}

/// `count` independent copies of `S_n`, generated in parallel chunks with
/// streams derived from `seed`.
pub fn normalized_sums(
    model: &dyn DistributionModel,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(invalid("need at least one summand"));
    }
    let d = model.dim();
    let scale = 1.0 / (n as f64).sqrt();
    let base = derive_seed(seed, n as u64);
    let mut data = vec![0.0; count * d];
    data.par_chunks_mut(DEFAULT_CHUNK * d).enumerate().for_each(|(c, chunk)| {
        let mut rng = substream(base, c as u64);
        for row in chunk.chunks_exact_mut(d) {
            model.sample_sum(n, &mut rng, row);
            row.iter_mut().for_each(|v| *v *= scale);
        }
    });
    EmpiricalMeasure::new(count, d, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{mc_vec, McConfig};
    use crate::stein_bound::{w_bound, BoundConfig, Integrand};

    fn rad(d: usize) -> ProductModel {
        ProductModel::new(Coordinate::Rademacher, d).unwrap()
    }

    fn tp(t: f64) -> TimePoint {
        TimePoint::new(t).unwrap()
    }

    #[test]
    fn degenerate_summands_give_zero() {
        let m = PointMassModel { dim: 2 };
        let mut rng = substream(1, 0);
        for t in [0.01, 1.0] {
            assert_eq!(r_t_sample(&m, 10, tp(t), 2.0, &mut rng).unwrap(), 0.0);
            assert_eq!(r_t_sample(&m, 10, tp(t), 4.0, &mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn rademacher_at_large_time() {
        let m = rad(1);
        let (n, t) = (16, tp(3.0));
        let mut rng = substream(2, 0);
        for _ in 0..50 {
            let draw = CltDraw::new(&m, n, &mut rng).unwrap();
            let r = draw.r_terms(&m.cov().unwrap(), t, 2.0, 1e-10).unwrap();
            assert_eq!(r.drift, 0.0);
            let s: f64 = (0..n).map(|i| (draw.copy(i)[0] - draw.summand(i)[0]).powi(2) - 2.0).sum();
            let want = s * s / (4.0 * (n * n) as f64 * t.delta());
            assert!((r.second - want).abs() <= 1e-12 * want.max(1e-300), "{} vs {want}", r.second);
        }
    }

    #[test]
    fn pair_at_time_zero_and_displacement_bound() {
        let m = ProductModel::new(Coordinate::Gaussian, 2).unwrap();
        let mut rng = substream(3, 0);
        for _ in 0..200 {
            let draw = CltDraw::new(&m, 9, &mut rng).unwrap();
            let p0 = draw.pair(TimePoint::new(0.0).unwrap()).unwrap();
            assert_eq!(p0.x0, p0.xt);
            for t in [0.05, 0.5, 5.0] {
                let pr = draw.pair(tp(t)).unwrap();
                assert!(norm(&pr.displacement()) <= 2.0 * tp(t).delta().sqrt() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn bounded_summands_always_move_at_large_time() {
        let m = ProductModel::new(Coordinate::Uniform, 1).unwrap();
        let mut rng = substream(4, 0);
        let t = tp(2.0);
        for _ in 0..100 {
            let draw = CltDraw::new(&m, 4, &mut rng).unwrap();
            assert!(draw.threshold(t) > m.norm_bound().unwrap());
            let pr = draw.pair(t).unwrap();
            let i = draw.index();
            let want = (draw.copy(i)[0] - draw.summand(i)[0]) / 2.0;
            assert!((pr.displacement()[0] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn marginals_do_not_depend_on_time() {
        let m = ProductModel::new(Coordinate::Exponential, 1).unwrap();
        for t in [0.02, 0.3, 2.0] {
            let est = mc_vec(McConfig::new(100_000, 6), 4, |rng, out| {
                let pr = sample_pair(&m, 5, tp(t), rng)?;
                out[0] = pr.xt[0];
                out[1] = pr.xt[0] * pr.xt[0] - pr.x0[0] * pr.x0[0];
                out[2] = pr.xt[0] - pr.x0[0];
                out[3] = pr.x0[0];
                Ok(())
            })
            .unwrap();
            assert!(est[0].within(0.0, 4.0), "{:?}", est[0]);
            assert!(est[1].within(0.0, 4.0), "{:?}", est[1]);
            assert!(est[2].within(0.0, 4.0), "{:?}", est[2]);
        }
    }

    /// Direct evaluation of `R(t)` for `p = 2`, `d = 1` with 40 series terms.
    fn r_direct(x: &[f64], xp: &[f64], t: f64) -> f64 {
        let n = x.len() as f64;
        let delta = (2.0 * t).exp() - 1.0;
        let c = (n * delta).sqrt();
        let mut drift = 0.0;
        let mut v = Vec::new();
        for (a, b) in x.iter().zip(xp) {
            if a.abs().max(b.abs()) > c {
                drift += a - b;
            } else {
                v.push(b - a);
            }
        }
        let s2: f64 = v.iter().map(|u| u * u).sum::<f64>() - 2.0 * n;
        let mut r = drift * drift / n + s2 * s2 / (4.0 * n * n * delta);
        let mut fact = 2.0;
        for k in 3..=40 {
            fact *= k as f64;
            let tk: f64 = v.iter().map(|u| u.powi(k)).sum();
            r += tk * tk / (n.powi(k) * k as f64 * fact * delta.powi(k - 1));
        }
        r
    }

    #[test]
    fn surrogate_mean_matches_direct_evaluation() {
        let m = rad(1);
        let (n, t) = (16, tp(1.0));
        let sur = surrogate(&m, n, 2.0).unwrap();
        let ours = mc_vec(McConfig::new(400_000, 11), 1, |rng, out| {
            out[0] = sur.sample(t, rng)?;
            Ok(())
        })
        .unwrap()[0];
        let direct = mc_vec(McConfig::new(1_000_000, 12), 1, |rng, out| {
            let x: Vec<f64> = (0..n).map(|_| if rand::Rng::random::<bool>(rng) { 1.0 } else { -1.0 }).collect();
            let xp: Vec<f64> = (0..n).map(|_| if rand::Rng::random::<bool>(rng) { 1.0 } else { -1.0 }).collect();
            out[0] = r_direct(&x, &xp, 1.0);
            Ok(())
        })
        .unwrap()[0];
        let se = (ours.se.powi(2) + direct.se.powi(2)).sqrt();
        assert!((ours.mean - direct.mean).abs() <= 4.0 * se, "{ours:?} vs {direct:?}");
    }

    #[test]
    fn tensor_series_matches_gram_identity() {
        let m = ProductModel::new(Coordinate::Gaussian, 3).unwrap();
        let cov = m.cov().unwrap();
        let mut rng = substream(7, 0);
        let (n, t) = (6, tp(0.8));
        let nf = n as f64;
        let delta = t.delta();
        for _ in 0..5 {
            let draw = CltDraw::new(&m, n, &mut rng).unwrap();
            let c = draw.threshold(t);
            let v: Vec<Vec<f64>> = (0..n)
                .filter(|&i| draw.reach[i] <= c)
                .map(|i| draw.copy(i).iter().zip(draw.summand(i)).map(|(b, a)| b - a).collect())
                .collect();
            let r = draw.r_terms(&cov, t, 2.0, 1e-10).unwrap();
            let mut fact = 2.0;
            for (j, term) in r.series.iter().enumerate() {
                let k = j as i32 + 3;
                fact *= k as f64;
                let mut gram = 0.0;
                for a in &v {
                    for b in &v {
                        gram += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().powi(k);
                    }
                }
                let want = gram / (nf.powi(k) * k as f64 * fact * delta.powi(k - 1));
                assert!((term - want).abs() <= 1e-10 * want.abs() + 1e-300, "k={k}: {term} vs {want}");
            }
        }
    }

    #[test]
    fn odd_terms_follow_the_symmetric_prediction() {
        let m = rad(1);
        let (n, t, p) = (8, tp(1.0), 2.0);
        let delta = t.delta();
        let est = mc_vec(McConfig::new(400_000, 21), 2, |rng, out| {
            let r = CltDraw::new(&m, n, rng)?.r_terms(&m.cov().unwrap(), t, p, 1e-10)?;
            out[0] = r.series[0];
            out[1] = r.series[2];
            Ok(())
        })
        .unwrap();
        let nf = n as f64;
        for (e, k) in est.iter().zip([3u32, 5]) {
            // E‖Σ v_i^{⊗k}‖² = n E|v|^{2k} = n 4^k / 2 for odd k
            let w = term_weight(Route::Quadratic, k, p, 1.0 / nf, delta);
            let want = w * nf * 4f64.powi(k as i32) / 2.0 / nf.powi(k as i32 + 2);
            assert!(e.within(want, 4.0), "k={k}: {e:?} vs {want}");
        }
    }

    #[test]
    fn higher_order_weights() {
        let m = rad(1);
        let (n, t, p) = (10, tp(0.7), 4.0);
        let delta = t.delta();
        let nf = n as f64;
        let draw = CltDraw::new(&m, n, &mut substream(8, 0)).unwrap();
        let r = draw.r_terms(&m.cov().unwrap(), t, p, 1e-10).unwrap();
        let c = draw.threshold(t);
        let v: Vec<f64> = (0..n)
            .filter(|&i| draw.reach[i] <= c)
            .map(|i| draw.copy(i)[0] - draw.summand(i)[0])
            .collect();
        let s2: f64 = v.iter().map(|u| u * u).sum::<f64>() - 2.0 * nf;
        assert!((r.second - 3.0 * s2 * s2 / (4.0 * nf * nf * delta)).abs() < 1e-12 * r.second.max(1.0));
        let mut fact = 1.0;
        for (j, term) in r.series.iter().enumerate() {
            let k = j as i32 + 3;
            fact *= (k - 1) as f64;
            let tk: f64 = v.iter().map(|u| u.powi(k)).sum();
            let want = 3f64.powi(k - 1) * tk * tk / (4.0 * nf.powi(k) * fact * delta.powi(k - 1));
            assert!((term - want).abs() <= 1e-10 * want.abs() + 1e-300, "k={k}: {term} vs {want}");
        }
    }

    #[test]
    fn surrogate_bound_end_to_end() {
        let m = rad(1);
        let sur = surrogate(&m, 16, 2.0).unwrap();
        assert_eq!(sur.scale(), 1.0 / 16.0);
        assert!(sur.exchangeable());
        let b = sur.breakpoints();
        assert_eq!(b.len(), 1);
        assert!((b[0] - 0.5 * (17.0f64 / 16.0).ln()).abs() < 1e-15);
        let rep = w_bound(Integrand::Surrogate(&sur), 2.0, BoundConfig::new(20_000, 1)).unwrap();
        assert!(rep.bound.is_finite() && rep.bound > 0.0, "{}", rep.bound);
        assert_eq!(rep.label, "upper bound via Jensen surrogate");
        assert!(rep.truncation_k.unwrap() >= 3);
    }

    #[test]
    fn surrogate_seeds_differ_but_agree_in_mean() {
        let m = ProductModel::new(Coordinate::Uniform, 2).unwrap();
        let sur = surrogate(&m, 12, 2.0).unwrap();
        let t = tp(0.4);
        let run = |seed| {
            mc_vec(McConfig::new(100_000, seed), 1, |rng, out| {
                out[0] = sur.sample(t, rng)?;
                assert!(out[0] >= 0.0);
                Ok(())
            })
            .unwrap()[0]
        };
        let (a, b) = (run(1), run(2));
        assert_ne!(a.mean, b.mean);
        assert!((a.mean - b.mean).abs() <= 4.0 * (a.se.powi(2) + b.se.powi(2)).sqrt());
        let one = sur.sample(t, &mut substream(1, 0)).unwrap();
        let two = sur.sample(t, &mut substream(2, 0)).unwrap();
        assert_ne!(one, two);
    }

    #[test]
    fn normalized_sums_are_reproducible_and_standardized() {
        let m = rad(2);
        let a = normalized_sums(&m, 25, 10_000, 3).unwrap();
        assert_eq!(a, normalized_sums(&m, 25, 10_000, 3).unwrap());
        let mean: f64 = a.rows().map(|r| r[1]).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 4.0 / 100.0);
        let var: f64 = a.rows().map(|r| r[0] * r[0]).sum::<f64>() / 10_000.0;
        assert!((var - 1.0).abs() < 4.0 * 2f64.sqrt() / 100.0);
    }

    #[test]
    fn depth_does_not_depend_on_time_or_size() {
        for p in [2.0, 3.0, 4.0] {
            let k = clt_series_depth(16, tp(1.0), p, 1e-10).unwrap();
            for (n, t) in [(2, 1e-4), (1000, 0.3), (64, 20.0)] {
                assert_eq!(clt_series_depth(n, tp(t), p, 1e-10).unwrap(), k, "p={p}");
            }
        }
    }

    #[test]
    fn bad_orders_rejected() {
        let m = rad(1);
        assert!(surrogate(&m, 4, 1.5).is_err());
        assert!(r_t_sample(&m, 4, tp(1.0), 1.0, &mut substream(0, 0)).is_err());
        assert!(surrogate(&m, 0, 2.0).is_err());
    }
}

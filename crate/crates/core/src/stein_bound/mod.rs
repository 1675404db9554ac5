//! Stein-method upper bounds on `W_p(ν, γ)` built from a stochastic process
//! `(X_t)` with `X_t ~ ν`.
//!
//! For a time `t` and `Δ = e^{2t} - 1`, the integrand `S_p(t)` evaluated at a
//! draw of `X₀` combines
//!
//! * the drift term `‖E[(X_t - X₀)/s + X₀ | X₀]‖²`,
//! * the second-moment term `c₂ Δ^{-1} ‖E[(X_t - X₀)^{⊗2}/(2s) - I | X₀]‖²`,
//! * the series `Σ_{k>2} w_k ‖E[(X_t - X₀)^{⊗k} | X₀]‖²`,
//!
//! with weights set by the [`Route`]. The bound is
//! `∫_0^∞ e^{-t} E[S_p(t)^{p/2}]^{1/p} dt`.
//!
//! Conditional moments are never smoothed out of samples. Either the caller
//! supplies them exactly through a [`ConditionalMomentOracle`], or supplies a
//! [`SurrogateOracle`] whose samples dominate the integrand in expectation.

mod quadrature;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::mc::{mc_vec, Estimate, McConfig, McRng};
use crate::ou::TimePoint;
use crate::tensor::{hs_norm_sq, identity, SymTensor};

pub use quadrature::{integrate_time, integrate_time_with_breaks, QuadConfig, QuadNode, QuadResult};

/// Largest admissible series depth.
pub const MAX_DEPTH: u32 = 60;

/// Default relative tolerance for the series tail.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

/// One draw of `(X₀, X_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub x0: Vec<f64>,
    pub xt: Vec<f64>,
    pub t: TimePoint,
}

impl PairSample {
    pub fn new(x0: Vec<f64>, xt: Vec<f64>, t: TimePoint) -> Result<Self> {
        if x0.len() != xt.len() {
            return Err(Error::LengthMismatch { expected: x0.len(), got: xt.len() });
        }
        if x0.iter().chain(&xt).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pair sample entry".into()));
        }
        Ok(PairSample { x0, xt, t })
    }

    pub fn displacement(&self) -> Vec<f64> {
        self.xt.iter().zip(&self.x0).map(|(a, b)| a - b).collect()
    }
}

/// A process `(X_t)` whose `X₀`-marginal does not depend on `t`.
pub trait PairProcess: Sync {
    fn dim(&self) -> usize;

    /// Rescaling factor `s > 0`.
    fn scale(&self) -> f64;

    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<PairSample>;

    /// `B(t)` with `‖X_t - X₀‖ ≤ B(t)` almost surely, when known.
    fn displacement_bound(&self, _t: TimePoint) -> Option<f64> {
        None
    }

    /// Whether `(X₀, X_t)` and `(X_t, X₀)` have the same law for every `t`.
    fn exchangeable(&self) -> bool {
        false
    }
}

/// Exact conditional moments `E[(X_t - X₀)^{⊗k} | X₀ = x0]`.
pub trait ConditionalMomentOracle: Sync {
    fn moment(&self, x0: &[f64], t: TimePoint, k: u32) -> Result<SymTensor>;

    /// Highest available order; `None` means unlimited.
    fn max_k(&self) -> Option<u32> {
        None
    }
}

/// Samples of a non-negative `R(t)` with `E[S_p(t)^{p/2}] ≤ E[R(t)^{p/2}]`.
pub trait SurrogateOracle: Sync {
    fn sample(&self, t: TimePoint, rng: &mut McRng) -> Result<f64>;

    /// Times at which `E[R(t)^{p/2}]` may jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Series depth used at time `t`, when `R(t)` is a truncated series.
    fn series_depth(&self, _t: TimePoint) -> Result<Option<u32>> {
        Ok(None)
    }
}

/// Weight family for the integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `W₂` in any dimension: `c₂ = 1`, `w_k = 1/(s² k k! Δ^{k-1})`.
    Quadratic,
    /// `W_p` for `d = 1`: `c₂ = b`, `w_k = b^{k-1}/(s² k k! Δ^{k-1})`,
    /// `b = max(1, p - 1)`.
    OneDim,
    /// `W_p` for exchangeable pairs: `c₂ = b`,
    /// `w_k = b^{k-1}/(4 s² (k-1)! Δ^{k-1})`.
    Exchangeable,
}

impl Route {
    /// Default route: `Quadratic` for `p = 2`, otherwise `OneDim` when
    /// `d = 1`, otherwise `Exchangeable`, which needs an exchangeable process.
    pub fn select(p: f64, dim: usize, exchangeable: bool) -> Result<Route> {
        if p == 2.0 {
            Ok(Route::Quadratic)
        } else if dim == 1 {
            Ok(Route::OneDim)
        } else if exchangeable {
            Ok(Route::Exchangeable)
        } else {
            Err(Error::NotExchangeable(format!(
                "the W_p bound with p = {p} in dimension {dim} requires (X₀, X_t) and (X_t, X₀) \
                 to share the same law"
            )))
        }
    }

    fn check(self, p: f64, dim: usize, exchangeable: bool) -> Result<()> {
        match self {
            Route::Quadratic if p != 2.0 => {
                Err(invalid(format!("the quadratic route bounds W_2 only, got p = {p}")))
            }
            Route::OneDim if dim != 1 => {
                Err(invalid(format!("the one-dimensional route needs d = 1, got d = {dim}")))
            }
            Route::Exchangeable if !exchangeable => Err(Error::NotExchangeable(
                "the exchangeable route requires (X₀, X_t) and (X_t, X₀) to share the same law"
                    .into(),
            )),
            _ => Ok(()),
        }
    }

    /// `ln w_k` for `k ≥ 3` without the `Δ` factor: `w_k = e^{ln} / Δ^{k-1}`.
    fn ln_series_weight(self, k: u32, p: f64, s: f64) -> f64 {
        let kf = k as f64;
        let lb = base(p).ln();
        match self {
            Route::Quadratic => -2.0 * s.ln() - kf.ln() - ln_gamma(kf + 1.0),
            Route::OneDim => (kf - 1.0) * lb - 2.0 * s.ln() - kf.ln() - ln_gamma(kf + 1.0),
            Route::Exchangeable => {
                (kf - 1.0) * lb - 4f64.ln() - 2.0 * s.ln() - ln_gamma(kf)
            }
        }
    }

    /// An upper bound on `term_{j+1}/term_j` for every `j ≥ k` when
    /// `term_k = B^{2k} w_k`.
    fn ratio_bound(self, k: u32, p: f64, b2_over_delta: f64) -> f64 {
        match self {
            Route::Quadratic => b2_over_delta / (k as f64 + 1.0),
            Route::OneDim => base(p) * b2_over_delta / (k as f64 + 1.0),
            Route::Exchangeable => base(p) * b2_over_delta / k as f64,
        }
    }
}

fn base(p: f64) -> f64 {
    (p - 1.0).max(1.0)
}

/// Coefficient of the `k`-th group of `S_p(t)`.
///
/// `k = 1` multiplies the drift term, `k = 2` multiplies
/// `‖m₂/(2s) - I‖²`, and `k ≥ 3` multiplies `‖m_k‖²`.
pub fn term_weight(route: Route, k: u32, p: f64, s: f64, delta: f64) -> f64 {
    match k {
        0 => 0.0,
        1 => 1.0,
        2 => match route {
            Route::Quadratic => 1.0 / delta,
            _ => base(p) / delta,
        },
        _ => ln_series_term_weight(route, k, p, s, delta).exp(),
    }
}

/// `ln w_k` for `k ≥ 3`; finite where `w_k` itself overflows.
pub(crate) fn ln_series_term_weight(route: Route, k: u32, p: f64, s: f64, delta: f64) -> f64 {
    route.ln_series_weight(k, p, s) - (k as f64 - 1.0) * delta.ln()
}

/// Series depth for the quadratic route with displacement bound `b`.
///
/// Returns the smallest `K ≥ 3` such that the ratio bound
/// `r = B²/((K+2)Δ)` is below `1/2` and the geometric tail estimate
/// `term_{K+1}/(1 - r)` of `term_k = B^{2k}/(s² k k! Δ^{k-1})` is below
/// `tol` times the partial sum `Σ_{3≤k≤K} term_k`.
pub fn truncation_depth(b: f64, delta: f64, s: f64, tol: f64) -> Result<u32> {
    series_depth(Route::Quadratic, 2.0, b, delta, s, tol)
}

/// [`truncation_depth`] for any route and order `p`.
pub fn series_depth(route: Route, p: f64, b: f64, delta: f64, s: f64, tol: f64) -> Result<u32> {
    if !(b >= 0.0) || !(delta > 0.0) || !(s > 0.0) || !(tol > 0.0) {
        return Err(invalid(format!(
            "series depth needs B >= 0 and Δ, s, tol > 0 (B = {b}, Δ = {delta}, s = {s}, tol = {tol})"
        )));
    }
    if b == 0.0 {
        return Ok(3);
    }
    let lq = (b * b / delta).ln();
    let ln_term = |k: u32| delta.ln() + k as f64 * lq + route.ln_series_weight(k, p, s);
    let b2d = b * b / delta;
    let mut partial = 0.0;
    for k in 3..=MAX_DEPTH {
        partial += (ln_term(k) - ln_term(3)).exp();
        let r = route.ratio_bound(k + 1, p, b2d);
        if r < 0.5 {
            let tail = (ln_term(k + 1) - ln_term(3)).exp() / (1.0 - r);
            if tail < tol * partial {
                return Ok(k);
            }
        }
    }
    Err(Error::TruncationNotCertified(format!(
        "B²/Δ = {b2d:e} needs more than {MAX_DEPTH} series terms"
    )))
}

/// How the `k > 2` series is cut off.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Depth from [`series_depth`] with the process displacement bound.
    Certified { tol: f64 },
    /// A fixed depth; reports mark the bound as uncertified.
    Fixed { depth: u32 },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Certified { tol: DEFAULT_TRUNCATION_TOL }
    }
}

/// Source of the integrand.
#[derive(Clone, Copy)]
pub enum Integrand<'a> {
    Moments {
        process: &'a dyn PairProcess,
        oracle: &'a dyn ConditionalMomentOracle,
        truncation: Truncation,
    },
    Surrogate(&'a dyn SurrogateOracle),
}

/// Monte Carlo estimate of `E[S_p(t)^{p/2}]` with its groups.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrandEstimate {
    pub value: Estimate,
    /// Mean drift, second-moment and series contributions to `S_p(t)`;
    /// absent for surrogates.
    pub terms: Option<[f64; 3]>,
    pub depth: Option<u32>,
}

fn depth_for(
    route: Route,
    p: f64,
    process: &dyn PairProcess,
    oracle: &dyn ConditionalMomentOracle,
    truncation: Truncation,
    t: TimePoint,
) -> Result<u32> {
    let k = match truncation {
        Truncation::Fixed { depth } => depth.max(2),
        Truncation::Certified { tol } => {
            let b = process.displacement_bound(t).ok_or_else(|| {
                Error::SeriesNotCertifiable(
                    "no almost-sure displacement bound; supply one or fix the depth".into(),
                )
            })?;
            series_depth(route, p, b, t.delta(), process.scale(), tol)?
        }
    };
    if let Some(max) = oracle.max_k() {
        if max < k {
            return Err(Error::SeriesNotCertifiable(format!(
                "depth {k} needed but moments are available up to order {max}"
            )));
        }
    }
    Ok(k)
}

/// The three groups of `S_p(t)` at `x0`.
fn groups(
    route: Route,
    p: f64,
    s: f64,
    t: TimePoint,
    x0: &[f64],
    oracle: &dyn ConditionalMomentOracle,
    depth: u32,
) -> Result<[f64; 3]> {
    let d = x0.len();
    let delta = t.delta();
    let m1 = oracle.moment(x0, t, 1)?;
    if m1.dim() != d || m1.degree() != 1 {
        return Err(Error::ShapeMismatch(d, 1, m1.dim(), m1.degree() as usize));
    }
    let drift: f64 = m1.coeffs().iter().zip(x0).map(|(m, x)| (m / s + x).powi(2)).sum();
    let mut c2 = oracle.moment(x0, t, 2)?.scaled(1.0 / (2.0 * s));
    c2.axpy(-1.0, &identity(d)?)?;
    let second = term_weight(route, 2, p, s, delta) * hs_norm_sq(&c2);
    let mut series = 0.0;
    for k in 3..=depth {
        let mk = oracle.moment(x0, t, k)?;
        if mk.degree() != k || mk.dim() != d {
            return Err(Error::ShapeMismatch(d, k as usize, mk.dim(), mk.degree() as usize));
        }
        series += term_weight(route, k, p, s, delta) * hs_norm_sq(&mk);
    }
    Ok([drift, second, series])
}

fn check_time(t: TimePoint) -> Result<()> {
    if t.value() <= 0.0 {
        return Err(invalid("the integrand is defined for t > 0"));
    }
    Ok(())
}

/// `E[S_p(t)^{p/2}]` by Monte Carlo; with a surrogate, `E[R(t)^{p/2}]`.
fn power_mean(
    integrand: Integrand<'_>,
    route: Route,
    p: f64,
    t: TimePoint,
    mc: McConfig,
) -> Result<IntegrandEstimate> {
    check_time(t)?;
    match integrand {
        Integrand::Surrogate(sur) => {
            let est = mc_vec(mc, 1, |rng, out| {
                let r = sur.sample(t, rng)?;
                if r < 0.0 {
                    return Err(invalid(format!("surrogate returned a negative sample {r}")));
                }
                out[0] = if p == 2.0 { r } else { r.powf(p / 2.0) };
                Ok(())
            })?;
            Ok(IntegrandEstimate { value: est[0], terms: None, depth: sur.series_depth(t)? })
        }
        Integrand::Moments { process, oracle, truncation } => {
            route.check(p, process.dim(), process.exchangeable())?;
            let depth = depth_for(route, p, process, oracle, truncation, t)?;
            let s = process.scale();
            let est = mc_vec(mc, 4, |rng, out| {
                let pair = process.sample(t, rng)?;
                let g = groups(route, p, s, t, &pair.x0, oracle, depth)?;
                let total = g[0] + g[1] + g[2];
                out[0] = if p == 2.0 { total } else { total.powf(p / 2.0) };
                out[1..].copy_from_slice(&g);
                Ok(())
            })?;
            Ok(IntegrandEstimate {
                value: est[0],
                terms: Some([est[1].mean, est[2].mean, est[3].mean]),
                depth: Some(depth),
            })
        }
    }
}

/// Estimate of `E[S(t)]` for the `W₂` bound (or `E[R(t)]` for a surrogate).
pub fn s2_integrand(integrand: Integrand<'_>, t: TimePoint, mc: McConfig) -> Result<IntegrandEstimate> {
    power_mean(integrand, Route::Quadratic, 2.0, t, mc)
}

/// Estimate of `E[S_p(t)^{p/2}]^{1/p}` with a delta-method standard error.
///
/// `route = None` picks [`Route::select`]; surrogates ignore the route.
pub fn sp_integrand(
    integrand: Integrand<'_>,
    route: Option<Route>,
    t: TimePoint,
    p: f64,
    mc: McConfig,
) -> Result<IntegrandEstimate> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("order p must be finite and >= 1, got {p}")));
    }
    let route = match (route, integrand) {
        (Some(r), _) => r,
        (None, Integrand::Moments { process, .. }) => {
            Route::select(p, process.dim(), process.exchangeable())?
        }
        (None, Integrand::Surrogate(_)) => Route::Quadratic,
    };
    let raw = power_mean(integrand, route, p, t, mc)?;
    let m = raw.value.mean.max(0.0);
    let mean = m.powf(1.0 / p);
    let se = if m > 0.0 { mean / (p * m) * raw.value.se } else { 0.0 };
    Ok(IntegrandEstimate { value: Estimate { mean, se, n: raw.value.n }, ..raw })
}

/// Quadrature node of a bound: `bound = Σ weight · estimate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub t: f64,
    pub weight: f64,
    pub estimate: f64,
    pub se: f64,
    /// Mean drift, second-moment and series contributions to `S_p(t)`.
    pub terms: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub p: f64,
    pub route: Option<Route>,
    pub truncation: Option<Truncation>,
    pub quad_tol: f64,
    pub quad_split: f64,
    pub max_panels: usize,
    pub n_mc: usize,
    pub chunk_size: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: f64,
    pub label: String,
    pub per_node: Vec<NodeReport>,
    /// Largest series depth used over the nodes.
    pub truncation_k: Option<u32>,
    pub truncation_certified: bool,
    pub quad_error: f64,
    pub mc_error: f64,
    pub config: ConfigEcho,
}

/// Settings for [`w_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundConfig {
    pub quad: QuadConfig,
    pub mc: McConfig,
    pub route: Option<Route>,
}

impl BoundConfig {
    pub fn new(n_mc: usize, seed: u64) -> Self {
        BoundConfig { quad: QuadConfig::default(), mc: McConfig::new(n_mc, seed), route: None }
    }
}

/// Upper bound on `W_p(ν, γ)`: `∫_0^∞ e^{-t} E[S_p(t)^{p/2}]^{1/p} dt`.
///
/// Every node reuses the same Monte Carlo seed, so the integrand is a
/// smooth function of `t` for a fixed set of draws.
pub fn w_bound(integrand: Integrand<'_>, p: f64, cfg: BoundConfig) -> Result<BoundReport> {
    let (route, truncation, label) = match integrand {
        Integrand::Moments { process, truncation, .. } => {
            let route = match cfg.route {
                Some(r) => r,
                None => Route::select(p, process.dim(), process.exchangeable())?,
            };
            route.check(p, process.dim(), process.exchangeable())?;
            (Some(route), Some(truncation), "upper bound from exact conditional moments")
        }
        Integrand::Surrogate(_) => (None, None, "upper bound via Jensen surrogate"),
    };
    let breaks = match integrand {
        Integrand::Surrogate(sur) => sur.breakpoints(),
        Integrand::Moments { .. } => Vec::new(),
    };
    let evals = std::sync::Mutex::new(Vec::new());
    let quad = integrate_time_with_breaks(
        |t| {
            let est = sp_integrand(integrand, route, TimePoint::new(t)?, p, cfg.mc)?;
            evals.lock().expect("poisoned").push((t.to_bits(), est.terms, est.depth));
            Ok((est.value.mean, est.value.se))
        },
        cfg.quad,
        &breaks,
    )?;
    let evals = evals.into_inner().expect("poisoned");
    let lookup = |t: f64| evals.iter().find(|e| e.0 == t.to_bits());
    let per_node: Vec<NodeReport> = quad
        .nodes
        .iter()
        .map(|n| NodeReport {
            t: n.t,
            weight: n.weight,
            estimate: n.value,
            se: n.se,
            terms: lookup(n.t).and_then(|e| e.1),
        })
        .collect();
    let truncation_k = per_node.iter().filter_map(|n| lookup(n.t).and_then(|e| e.2)).max();
    let truncation_certified = !matches!(truncation, Some(Truncation::Fixed { .. }));
    Ok(BoundReport {
        bound: quad.integral,
        label: label.into(),
        per_node,
        truncation_k,
        truncation_certified,
        quad_error: quad.quad_error,
        mc_error: quad.mc_error,
        config: ConfigEcho {
            p,
            route,
            truncation,
            quad_tol: cfg.quad.tol,
            quad_split: cfg.quad.split,
            max_panels: cfg.quad.max_panels,
            n_mc: cfg.mc.n_samples,
            chunk_size: cfg.mc.chunk_size,
            seed: cfg.mc.seed,
        },
    })
}

//! Configuration-driven sweeps comparing the bounds with empirical
//! Wasserstein distances.
//!
//! A row passes when
//! `empirical_mean - allowance <= min(bounds) + combined_error`, where the
//! minimum runs over `bound_mc` and, when `closed_form_exact` is set,
//! `bound_closed_form`. The allowance is `mean + 2 SD` of the distance
//! between two independent Gaussian samples of the same size, which is what
//! the empirical estimate reads when the true distance is zero.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clt::{
    bound_w2_general, bound_w2_identity_cov, bound_wp, moment_stats, normalized_sums, surrogate,
    CltProcess, DistributionModel, MlForm, MomentGrid, ModelSpec,
};
use crate::diagnostics::{
    exchangeability_check, score_ibp_residual, tau_exch_residual, ProcessLaw, ResidualReport,
    ScoreForm, ShiftedProcess, TestFunction,
};
use crate::error::{Error, Result};
use crate::mc::{derive_seed, substream};
use crate::ou::TimePoint;
use crate::stein_bound::{w_bound, BoundConfig, Integrand, QuadConfig};
use crate::wasserstein::{gaussian_sample, wp_empirical};

const GAUSS_TAG: u64 = 101;
const NULL_TAG: u64 = 102;
const MOMENT_TAG: u64 = 103;
const BOUND_TAG: u64 = 104;

fn default_model() -> String {
    "rademacher".into()
}
fn default_n() -> Vec<usize> {
    vec![16, 64, 256]
}
fn one() -> usize {
    1
}
fn two() -> f64 {
    2.0
}
fn default_n_mc() -> usize {
    5000
}
fn default_quad_tol() -> f64 {
    QuadConfig::default().tol
}
fn default_n_emp() -> usize {
    4096
}
fn default_replicates() -> usize {
    10
}
fn default_null() -> usize {
    20
}
fn default_cap() -> usize {
    4096
}
fn yes() -> bool {
    true
}
fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "one")]
    pub d: usize,
    #[serde(default = "two")]
    pub p: f64,
    /// Moment exponent `m ∈ (0, 2]` of the general `W₂` bound.
    #[serde(default = "two")]
    pub m: f64,
    /// Extra moment `q ∈ [0, 2]` of the `W_p` bound.
    #[serde(default = "two")]
    pub q: f64,
    /// Constant dividing the `W_p` bracket.
    #[serde(default = "unit")]
    pub c_p: f64,
    /// Monte Carlo size for moments and for each surrogate node.
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Whether to integrate the surrogate bound.
    #[serde(default = "yes")]
    pub mc_bound: bool,
    #[serde(default = "default_n_emp")]
    pub n_emp: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_null")]
    pub null_replicates: usize,
    /// Largest sample handed to the assignment solver.
    #[serde(default = "default_cap")]
    pub exact_cap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl SweepConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec { name: self.model.clone(), dim: self.d, params: self.params.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n grid must be strictly ascending, got {:?}", self.n));
        }
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return bad(format!("p must be at least 2, got {}", self.p));
        }
        if self.p == 2.0 {
            if let Some(n) = self.n.iter().find(|&&n| n <= 4) {
                return bad(format!("the W₂ bound needs n > 4, got n = {n}"));
            }
        } else if self.n.contains(&0) {
            return bad("n must be positive".into());
        }
        if !(self.m > 0.0 && self.m <= 2.0) {
            return bad(format!("m must lie in (0, 2], got {}", self.m));
        }
        if !(0.0..=2.0).contains(&self.q) {
            return bad(format!("q must lie in [0, 2], got {}", self.q));
        }
        if !(self.quad_tol > 0.0) || !(self.c_p > 0.0) {
            return bad("quad_tol and c_p must be positive".into());
        }
        if self.n_mc < 2 || self.n_emp < 2 || self.replicates == 0 || self.null_replicates < 2 {
            return bad("n_mc, n_emp and null_replicates need at least 2, replicates at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        self.model_spec().build().map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub d: usize,
    pub p: f64,
    pub bound_closed_form: Option<f64>,
    /// Whether `bound_closed_form` is a bound rather than a bound up to a
    /// constant.
    pub closed_form_exact: bool,
    pub bound_mc: Option<f64>,
    /// Quadrature plus Monte Carlo error of `bound_mc`.
    pub combined_error: f64,
    pub empirical_mean: Option<f64>,
    pub empirical_sd: Option<f64>,
    pub allowance: f64,
    pub pass: bool,
    pub reason: Option<String>,
}

impl ReportRow {
    /// The pass rule, from the row fields alone.
    pub fn recompute_pass(&self) -> bool {
        if self.reason.is_some() {
            return false;
        }
        let mut best = self.bound_mc;
        if self.closed_form_exact {
            best = match (best, self.bound_closed_form) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        match (best, self.empirical_mean) {
            (Some(b), Some(e)) => e - self.allowance <= b + self.combined_error,
            _ => false,
        }
    }

    fn failed(cfg: &SweepConfig, n: usize, allowance: f64, reason: String) -> Self {
        ReportRow {
            n,
            d: cfg.d,
            p: cfg.p,
            bound_closed_form: None,
            closed_form_exact: cfg.p == 2.0,
            bound_mc: None,
            combined_error: 0.0,
            empirical_mean: None,
            empirical_sd: None,
            allowance,
            pass: false,
            reason: Some(reason),
        }
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `W_p` between two independent Gaussian samples, replicated:
/// `(mean, sd, mean + 2 sd)`.
pub fn null_allowance(cfg: &SweepConfig) -> Result<(f64, f64, f64)> {
    let base = derive_seed(cfg.seed, NULL_TAG);
    let vals = (0..cfg.null_replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = gaussian_sample(cfg.d, cfg.n_emp, &mut substream(base, 2 * r))?;
            let y = gaussian_sample(cfg.d, cfg.n_emp, &mut substream(base, 2 * r + 1))?;
            wp_empirical(&x, &y, cfg.p, cfg.exact_cap)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (m, s) = mean_sd(&vals);
    Ok((m, s, m + 2.0 * s))
}

/// Empirical `W_p(S_n, γ)` over the configured replicates. The Gaussian
/// samples depend on the replicate only, so every `n` sees the same ones.
pub fn empirical_wp(model: &dyn DistributionModel, n: usize, cfg: &SweepConfig) -> Result<Vec<f64>> {
    let gauss = derive_seed(cfg.seed, GAUSS_TAG);
    (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = normalized_sums(model, n, cfg.n_emp, derive_seed(cfg.seed, r))?;
            let y = gaussian_sample(cfg.d, cfg.n_emp, &mut substream(gauss, r))?;
            wp_empirical(&x, &y, cfg.p, cfg.exact_cap)
        })
        .collect()
}

/// Closed-form bound for `n` and whether it is a genuine bound.
pub fn closed_form_bound(model: &dyn DistributionModel, n: usize, cfg: &SweepConfig) -> Result<(f64, bool)> {
    let seed = derive_seed(cfg.seed, MOMENT_TAG);
    if cfg.p == 2.0 {
        let grid = MomentGrid::for_w2(cfg.m).merge(&MomentGrid { l: vec![2.0], r: vec![] });
        let table = moment_stats(model, &grid, cfg.n_mc, seed)?;
        let mut b = bound_w2_general(&table, n, cfg.m, MlForm::default())?;
        if table.identity_covariance() {
            b = b.min(bound_w2_identity_cov(&table, n)?);
        }
        Ok((b, true))
    } else {
        let table = moment_stats(model, &MomentGrid::for_wp(cfg.p, cfg.q), cfg.n_mc, seed)?;
        Ok((bound_wp(&table, n, cfg.p, cfg.q, cfg.c_p)?.value, false))
    }
}

/// Integrated surrogate bound and its combined error.
pub fn mc_bound(model: &dyn DistributionModel, n: usize, cfg: &SweepConfig) -> Result<(f64, f64)> {
    let sur = surrogate(model, n, cfg.p)?;
    let mut bc = BoundConfig::new(cfg.n_mc, derive_seed(cfg.seed, BOUND_TAG));
    bc.quad.tol = cfg.quad_tol;
    let r = w_bound(Integrand::Surrogate(&sur), cfg.p, bc)?;
    Ok((r.bound, r.quad_error + r.mc_error))
}

fn sweep_row(model: &dyn DistributionModel, n: usize, cfg: &SweepConfig, allowance: f64) -> Result<ReportRow> {
    let (closed, exact) = closed_form_bound(model, n, cfg)?;
    let (bmc, err) = if cfg.mc_bound {
        let (b, e) = mc_bound(model, n, cfg)?;
        (Some(b), e)
    } else {
        (None, 0.0)
    };
    let (mean, sd) = mean_sd(&empirical_wp(model, n, cfg)?);
    let mut row = ReportRow {
        n,
        d: cfg.d,
        p: cfg.p,
        bound_closed_form: Some(closed),
        closed_form_exact: exact,
        bound_mc: bmc,
        combined_error: err,
        empirical_mean: Some(mean),
        empirical_sd: Some(sd),
        allowance,
        pass: false,
        reason: None,
    };
    row.pass = row.recompute_pass();
    Ok(row)
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// One row per `n`, in grid order. A failing row records its error and the
/// sweep moves on.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    if cfg.n.is_empty() {
        return Ok(Vec::new());
    }
    let model = cfg.model_spec().build()?;
    with_pool(cfg.workers, || {
        let allowance = null_allowance(cfg)?.2;
        Ok(cfg
            .n
            .iter()
            .map(|&n| {
                sweep_row(model.as_ref(), n, cfg, allowance)
                    .unwrap_or_else(|e| ReportRow::failed(cfg, n, allowance, e.to_string()))
            })
            .collect())
    })?
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub used: usize,
    pub note: Option<String>,
}

/// Least squares of `ln(empirical_mean)` on `ln(n)`. Rows without a
/// positive finite empirical value are left out.
pub fn fit_rate(rows: &[ReportRow]) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.empirical_mean.filter(|e| *e > 0.0 && e.is_finite()).map(|e| (r.n, e)))
        .map(|(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    let dropped = rows.len() - pts.len();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 3 rows with positive empirical values, got {}",
            pts.len()
        )));
    }
    if pts.windows(2).any(|w| w[0].0 == w[1].0) && pts.iter().all(|p| p.0 == pts[0].0) {
        return Err(Error::InvalidArgument("rate fit needs at least two distinct n".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateFit {
        slope,
        intercept,
        r2,
        used: pts.len(),
        note: (dropped > 0).then(|| format!("{dropped} rows without a positive empirical value left out")),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 12] = [
    "n",
    "d",
    "p",
    "bound_closed_form",
    "closed_form_exact",
    "bound_mc",
    "combined_error",
    "empirical_mean",
    "empirical_sd",
    "allowance",
    "pass",
    "reason",
];

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// Serialized report; identical rows give identical bytes.
pub fn render_report(rows: &[ReportRow], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(rows)?;
            s.push(b'\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    r.d.to_string(),
                    fmt_f(r.p),
                    fmt_opt(r.bound_closed_form),
                    r.closed_form_exact.to_string(),
                    fmt_opt(r.bound_mc),
                    fmt_f(r.combined_error),
                    fmt_opt(r.empirical_mean),
                    fmt_opt(r.empirical_sd),
                    fmt_f(r.allowance),
                    r.pass.to_string(),
                    r.reason.clone().unwrap_or_default(),
                ])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}

pub fn write_report(rows: &[ReportRow], path: impl AsRef<Path>, format: Format) -> Result<()> {
    let bytes = render_report(rows, format)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>, format: Format) -> Result<Vec<ReportRow>> {
    match format {
        Format::Json => Ok(serde_json::from_str(&fs::read_to_string(path)?)?),
        Format::Csv => {
            let mut r = csv::Reader::from_path(path)?;
            let mut rows = Vec::new();
            for rec in r.deserialize() {
                let mut row: ReportRow = rec?;
                if row.reason.as_deref() == Some("") {
                    row.reason = None;
                }
                rows.push(row);
            }
            Ok(rows)
        }
    }
}

/// A diagnostic with the outcome it should have.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagEntry {
    pub report: ResidualReport,
    pub expect_pass: bool,
}

impl DiagEntry {
    pub fn ok(&self) -> bool {
        self.report.pass == self.expect_pass
    }
}

/// Residual battery on the CLT process of `model` with `n` summands: the
/// score and exchangeable-pair identities and the exchangeability battery
/// should pass, the score with the noise term dropped and a shifted pair
/// should fail.
pub fn diagnostics_battery(model: &dyn DistributionModel, n: usize, n_mc: usize, seed: u64) -> Result<Vec<DiagEntry>> {
    let d = model.dim();
    let process = CltProcess { model, n };
    let weights: Vec<f64> = (0..d).map(|j| 1.0 / (1.0 + j as f64)).collect();
    let phi = TestFunction::Tanh { weights, offset: 0.3 };
    let (t_score, t_tau) = (TimePoint::new(0.5)?, TimePoint::new(1.0)?);
    let mut out = Vec::new();
    let mut push = |reports: Vec<ResidualReport>, expect: bool| {
        out.extend(reports.into_iter().map(|report| DiagEntry { report, expect_pass: expect }))
    };
    let law = ProcessLaw(&process);
    push(score_ibp_residual(&law, t_score, &phi, ScoreForm::Exact, n_mc, derive_seed(seed, 1))?, true);
    push(score_ibp_residual(&law, t_score, &phi, ScoreForm::DropNoise, n_mc, derive_seed(seed, 2))?, false);
    push(tau_exch_residual(&process, t_tau, 1.0 / n as f64, 6, &phi, n_mc, derive_seed(seed, 3))?, true);
    push(exchangeability_check(&process, t_score, n_mc, derive_seed(seed, 4))?, true);
    let mut shift = vec![0.0; d];
    shift[0] = 1.0;
    let shifted = ShiftedProcess { inner: &process, shift };
    let mut r = exchangeability_check(&shifted, t_score, n_mc, derive_seed(seed, 5))?;
    r.truncate(1);
    push(r, false);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, e: f64) -> ReportRow {
        ReportRow {
            n,
            d: 1,
            p: 2.0,
            bound_closed_form: Some(1.0 / 3.0),
            closed_form_exact: true,
            bound_mc: None,
            combined_error: 0.0,
            empirical_mean: Some(e),
            empirical_sd: Some(0.1),
            allowance: 0.01,
            pass: true,
            reason: None,
        }
    }

    #[test]
    fn fit_rate_cases() {
        let rows: Vec<_> = [16, 64, 256, 1024].iter().map(|&n| row(n, 3.0 / (n as f64).sqrt())).collect();
        let f = fit_rate(&rows).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let flat: Vec<_> = [16, 64, 256].iter().map(|&n| row(n, 0.2)).collect();
        assert_eq!(fit_rate(&flat).unwrap().slope, 0.0);
        let mut short = flat.clone();
        short[0].empirical_mean = Some(0.0);
        assert!(fit_rate(&short).is_err());
        short.push(row(1024, 0.2));
        assert_eq!(fit_rate(&short).unwrap().used, 3);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rows = vec![row(16, 0.123_456_789_012_345_67), row(64, 1e-300)];
        rows[1].bound_mc = Some(0.7);
        rows[1].reason = Some("a, \"quoted\" reason".into());
        rows[1].empirical_mean = None;
        for fmt in [Format::Csv, Format::Json] {
            let path = dir.path().join("r");
            write_report(&rows, &path, fmt).unwrap();
            assert_eq!(read_report(&path, fmt).unwrap(), rows);
        }
        let empty = render_report(&[], Format::Csv).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = SweepConfig::default();
        assert_eq!((c.n.clone(), c.d, c.replicates, c.null_replicates), (vec![16, 64, 256], 1, 10, 20));
        c.validate().unwrap();
        let mut bad = c.clone();
        bad.n = vec![64, 16];
        assert!(bad.validate().is_err());
        bad.n = vec![4, 16];
        assert!(bad.validate().is_err());
        bad.p = 4.0;
        bad.validate().unwrap();
        bad.quad_tol = 0.0;
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<SweepConfig>(r#"{"modle": "x"}"#).is_err());
        let mut m = c.clone();
        m.model = "nope".into();
        assert!(m.validate().is_err());
    }

    #[test]
    fn empty_grid_gives_empty_report() {
        let c = SweepConfig { n: vec![], ..SweepConfig::default() };
        assert!(run_sweep(&c).unwrap().is_empty());
    }

    #[test]
    fn small_gaussian_sweep_is_deterministic() {
        let c = SweepConfig {
            model: "gaussian".into(),
            n: vec![8, 32],
            n_mc: 200,
            n_emp: 512,
            replicates: 3,
            null_replicates: 4,
            seed: 7,
            ..SweepConfig::default()
        };
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(render_report(&a, Format::Csv).unwrap(), render_report(&b, Format::Csv).unwrap());
        for r in &a {
            assert!(r.pass && r.reason.is_none(), "{r:?}");
            assert_eq!(r.pass, r.recompute_pass());
            assert!(r.bound_mc.unwrap() > 0.0);
        }
    }

    #[test]
    fn solver_cap_is_enforced() {
        let c = SweepConfig {
            d: 2,
            n: vec![8],
            n_mc: 100,
            n_emp: 64,
            exact_cap: 32,
            replicates: 1,
            null_replicates: 2,
            mc_bound: false,
            ..SweepConfig::default()
        };
        assert!(run_sweep(&c).is_err());
        let c = SweepConfig { exact_cap: 64, ..c };
        let rows = run_sweep(&c).unwrap();
        assert!(rows[0].reason.is_none());
    }
}

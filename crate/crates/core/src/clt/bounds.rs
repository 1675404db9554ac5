//! Closed-form CLT bounds for i.i.d. summands.
//!
//! Every moment enters through [`Moment::upper`], so Monte Carlo entries
//! only ever raise the bound.

use serde::{Deserialize, Serialize};

use super::constants::clt_constants;
use super::moments::{Moment, MomentTable};
use crate::error::{invalid, Result};

/// Form of the `M(l)²` coefficient in the `W₂` bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlForm {
    /// `M(0)² + 8‖E[X^{⊗2}]‖² (E‖X‖^l)² + 4‖E[X^{⊗2}‖X‖^l]‖²`.
    #[default]
    Squared,
    /// `M(0)² + 8‖E[X^{⊗2}]‖ E‖X‖^l + 4‖E[X^{⊗2}‖X‖^l]‖²`.
    Unsquared,
}

fn up(m: Result<Moment>) -> Result<f64> {
    m.map(|m| m.upper())
}

/// `M(0)²` and `M(l)²` of the `W₂` bound.
pub fn m_coefficients(table: &MomentTable, l: f64, form: MlForm) -> Result<(f64, f64)> {
    let k = clt_constants();
    let cov = table.cov_norm.upper();
    let m0 = k.sum16 * cov * cov;
    let a = up(table.absmom(l))?;
    let w = up(table.wcov(l))?;
    let mid = match form {
        MlForm::Squared => 8.0 * cov * cov * a * a,
        MlForm::Unsquared => 8.0 * cov * a,
    };
    Ok((m0, m0 + mid + 4.0 * w * w))
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 0.0 && m <= 2.0) {
        return Err(invalid(format!("moment exponent m must lie in (0, 2], got {m}")));
    }
    Ok(())
}

/// `W₂(ν_n, γ)` bound for `n > 4` i.i.d. summands with finite `E‖X‖^{2+m}`.
pub fn bound_w2_general(table: &MomentTable, n: usize, m: f64, form: MlForm) -> Result<f64> {
    check_m(m)?;
    if n <= 4 {
        return Err(invalid(format!("the W₂ bound holds for n > 4, got n = {n}")));
    }
    let k = clt_constants();
    let nf = n as f64;
    let cov = table.cov_norm.upper();
    let head = (k.c * nf * up(table.absmom(2.0 + m))?).sqrt() / nf.powf((2.0 + m) / 4.0)
        + (2.0 * nf * cov * cov).sqrt() / nf;
    let (m0sq, _) = m_coefficients(table, 0.0, form)?;
    let m0 = m0sq.sqrt();
    let tail = if m < 1.0 {
        let mm = m_coefficients(table, m, form)?.1.sqrt();
        2f64.sqrt() * m0 / nf.sqrt() + mm * nf.ln() / (2.0 * nf.powf(m / 2.0))
    } else if m < 2.0 {
        let m1 = m_coefficients(table, 1.0, form)?.1.sqrt();
        2f64.sqrt() * m0 / nf.sqrt() + m1 * nf.ln() / (2.0 * nf.sqrt())
    } else {
        let m2 = m_coefficients(table, 2.0, form)?.1.sqrt();
        2.0 * (m0 * m2 / nf).sqrt()
    };
    Ok(head + tail)
}

/// `C' d^{1/4} ‖E[X^{⊗2}‖X‖²]‖^{1/2} / √n` for summands with identity
/// covariance.
pub fn bound_w2_identity_cov(table: &MomentTable, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("need at least one summand"));
    }
    if !table.identity_covariance() {
        return Err(invalid(format!(
            "model `{}` does not have identity covariance",
            table.model
        )));
    }
    let w = up(table.wcov(2.0))?;
    Ok(clt_constants().c_prime * (table.dim as f64).powf(0.25) * w.sqrt() / (n as f64).sqrt())
}

/// A bound known only up to a multiplicative constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WpBound {
    /// `bracket / c_p`.
    pub value: f64,
    pub bracket: f64,
    pub c_p: f64,
    pub label: String,
}

/// `W_p(ν_n, γ)` bound for `p > 2` given `E‖X‖^{p+q}`, `q ∈ [0, 2]`, up to
/// the unspecified constant `C_p`.
pub fn bound_wp(table: &MomentTable, n: usize, p: f64, q: f64, c_p: f64) -> Result<WpBound> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(invalid(format!("the W_p bound needs p > 2, got {p}")));
    }
    if !(0.0..=2.0).contains(&q) {
        return Err(invalid(format!("q must lie in [0, 2], got {q}")));
    }
    if !(c_p > 0.0) || !c_p.is_finite() {
        return Err(invalid(format!("C_p must be positive, got {c_p}")));
    }
    if n == 0 {
        return Err(invalid("need at least one summand"));
    }
    let m = (p + q - 2.0).min(2.0);
    let nf = n as f64;
    let cov = table.cov_norm.upper();
    let ml = |l: f64| -> Result<f64> {
        let a = up(table.absmom(l))?;
        let w = up(table.wcov(l))?;
        Ok((cov * cov * a * a + w * w).sqrt())
    };
    let m0 = ml(0.0)?;
    let mut bracket = (nf * up(table.absmom(p + q))?).powf(1.0 / p)
        / nf.powf(0.5 + q / (2.0 * p))
        + (nf * up(table.absmom(2.0 + m))?).sqrt() / nf.powf(0.5 + m / 4.0)
        + (nf * cov * cov).sqrt() / nf;
    bracket += if m < 1.0 {
        m0 / nf.sqrt() + ml(m)? * nf.ln() / nf.powf(m / 2.0)
    } else if m < 2.0 {
        m0 / nf.sqrt() + ml(1.0)? * nf.ln() / nf.sqrt()
    } else {
        (m0 * ml(2.0)? / nf).sqrt()
    };
    Ok(WpBound {
        value: bracket / c_p,
        bracket,
        c_p,
        label: format!("W_{p} bound up to the constant C_p (C_p = {c_p})"),
    })
}

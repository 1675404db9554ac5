//! Probabilists' Hermite polynomials and truncated Hermite series.
//!
//! `H_α(x) = (-1)^{|α|} e^{‖x‖²/2} ∂^α e^{-‖x‖²/2}` factorizes over
//! coordinates, so it is evaluated as `Π_i H_{α_i}(x_i)` with the 1-D
//! recurrence `H_{k+1}(x) = x H_k(x) - k H_{k-1}(x)`. The sign convention
//! uses the total order `|α|` in the Rodrigues prefactor.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::tensor::MultiIndex;

/// `H_k(x)` for the probabilists' normalization.
pub fn hermite_1d(k: u32, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for j in 1..k {
                let next = x * cur - j as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `[H_0(x), ..., H_max(x)]`.
pub fn hermite_1d_all(max: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(1.0);
    if max >= 1 {
        out.push(x);
    }
    for j in 1..max as usize {
        let next = x * out[j] - j as f64 * out[j - 1];
        out.push(next);
    }
    out
}

/// Multivariate `H_α(x) = Π_i H_{α_i}(x_i)`.
pub fn hermite_eval(alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    if x.len() != alpha.dim() {
        return Err(Error::LengthMismatch { expected: alpha.dim(), got: x.len() });
    }
    Ok(alpha.entries().iter().zip(x).map(|(&a, &xi)| hermite_1d(a, xi)).product())
}

/// Per-coordinate tables `H_j(x_i)` for `j <= max`; `H_α(x)` is then a
/// product of table lookups.
pub(crate) struct HermiteTable {
    rows: Vec<Vec<f64>>,
}

impl HermiteTable {
    pub(crate) fn new(max: u32, x: &[f64]) -> Self {
        HermiteTable { rows: x.iter().map(|&xi| hermite_1d_all(max, xi)).collect() }
    }

    pub(crate) fn eval(&self, alpha: &MultiIndex) -> f64 {
        alpha.entries().iter().zip(&self.rows).map(|(&a, row)| row[a as usize]).product()
    }
}

/// Finite series `Σ_α M_α H_α(z)` with vector coefficients in `ℝ^{out_dim}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteSeries {
    dim: usize,
    out_dim: usize,
    max_degree: u32,
    terms: BTreeMap<MultiIndex, Vec<f64>>,
}

impl HermiteSeries {
    pub fn new(dim: usize, out_dim: usize, max_degree: u32) -> Result<Self> {
        if dim == 0 || out_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(HermiteSeries { dim, out_dim, max_degree, terms: BTreeMap::new() })
    }

    /// Sets (replacing) the coefficient of `H_α`.
    pub fn insert(&mut self, alpha: MultiIndex, coeff: Vec<f64>) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: alpha.dim() });
        }
        if coeff.len() != self.out_dim {
            return Err(Error::LengthMismatch { expected: self.out_dim, got: coeff.len() });
        }
        if alpha.abs() > self.max_degree {
            return Err(invalid(format!(
                "term {alpha} exceeds the series max degree {}",
                self.max_degree
            )));
        }
        if coeff.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient of {alpha}")));
        }
        self.terms.insert(alpha, coeff);
        Ok(())
    }

    pub fn with_term(mut self, alpha: MultiIndex, coeff: Vec<f64>) -> Result<Self> {
        self.insert(alpha, coeff)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<f64>)> {
        self.terms.iter()
    }
}

/// `Σ_α M_α H_α(z)`.
pub fn series_eval(series: &HermiteSeries, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != series.dim {
        return Err(Error::LengthMismatch { expected: series.dim, got: z.len() });
    }
    let table = HermiteTable::new(series.max_degree, z);
    let mut out = vec![0.0; series.out_dim];
    for (alpha, coeff) in &series.terms {
        let h = table.eval(alpha);
        for (o, c) in out.iter_mut().zip(coeff) {
            *o += c * h;
        }
    }
    Ok(out)
}

/// Gaussian-chaos moment bound `Σ_α max(1, p-1)^{|α|} α! ‖M_α‖²`, an upper
/// bound on `E[‖Σ_α M_α H_α(Z)‖^p]^{2/p}` for `Z ~ N(0, I)`.
pub fn hypercontractive_rhs(series: &HermiteSeries, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid(format!("hypercontractive bound needs p >= 1, got {p}")));
    }
    let base = (p - 1.0).max(1.0);
    Ok(series
        .terms
        .iter()
        .map(|(alpha, m)| {
            let norm_sq: f64 = m.iter().map(|c| c * c).sum();
            base.powi(alpha.abs() as i32) * alpha.factorial_f64() * norm_sq
        })
        .sum())
}

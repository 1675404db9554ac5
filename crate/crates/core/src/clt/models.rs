//! Summand laws for the normalized sum `n^{-1/2} Σ X_i`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::mc::McRng;
use crate::ou::standard_normal_vec;
use crate::tensor::{identity, SymTensor};

/// Law of one summand `X` with the analytic moments that are known.
pub trait DistributionModel: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Writes one draw of `X` into `out` (length `dim`).
    fn sample(&self, rng: &mut McRng, out: &mut [f64]);

    /// Writes `Σ_{i≤n} X_i` for `n` independent draws.
    fn sample_sum(&self, n: usize, rng: &mut McRng, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut x = vec![0.0; out.len()];
        for _ in 0..n {
            self.sample(rng, &mut x);
            out.iter_mut().zip(&x).for_each(|(o, v)| *o += v);
        }
    }

    /// `E[X^{⊗2}]`.
    fn cov(&self) -> Option<SymTensor>;

    /// `E[X^{⊗2} ‖X‖^l]`.
    fn wcov(&self, _l: f64) -> Option<SymTensor> {
        None
    }

    /// `E[‖X‖^r]`.
    fn absmom(&self, _r: f64) -> Option<f64> {
        None
    }

    /// `ρ` with `‖X‖ = ρ` almost surely.
    fn constant_norm(&self) -> Option<f64> {
        None
    }

    /// `sup ‖X‖` for bounded laws.
    fn norm_bound(&self) -> Option<f64> {
        self.constant_norm()
    }
}

/// One-dimensional standardized coordinate laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    Rademacher,
    Gaussian,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// `E - 1` with `E ~ Exp(1)`.
    Exponential,
}

impl Coordinate {
    fn sample(self, rng: &mut McRng, out: &mut [f64]) {
        match self {
            Coordinate::Rademacher => {
                for chunk in out.chunks_mut(64) {
                    let bits: u64 = rng.random();
                    for (j, v) in chunk.iter_mut().enumerate() {
                        *v = if bits >> j & 1 == 1 { 1.0 } else { -1.0 };
                    }
                }
            }
            Coordinate::Gaussian => standard_normal_vec(rng, out),
            Coordinate::Uniform => {
                let a = 3f64.sqrt();
                out.iter_mut().for_each(|v| *v = a * (2.0 * rng.random::<f64>() - 1.0));
            }
            Coordinate::Exponential => {
                out.iter_mut().for_each(|v| {
                    let e: f64 = Exp1.sample(rng);
                    *v = e - 1.0;
                });
            }
        }
    }

    /// `E[X^{2k}]`.
    fn even_moment(self, k: u32) -> f64 {
        match self {
            Coordinate::Rademacher => 1.0,
            // (2k-1)!!
            Coordinate::Gaussian => (1..=k).map(|j| (2 * j - 1) as f64).product(),
            Coordinate::Uniform => 3f64.powi(k as i32) / (2 * k + 1) as f64,
            Coordinate::Exponential => subfactorial(2 * k),
        }
    }

    /// `E|X|^r` for real `r ≥ 0`.
    fn abs_moment(self, r: f64) -> f64 {
        match self {
            Coordinate::Rademacher => 1.0,
            Coordinate::Gaussian => {
                (0.5 * r * 2f64.ln() + ln_gamma((r + 1.0) / 2.0) - ln_gamma(0.5)).exp()
            }
            Coordinate::Uniform => 3f64.powf(r / 2.0) / (r + 1.0),
            Coordinate::Exponential => {
                // ∫_0^1 y^r e^{y-1} dy + e^{-1} Γ(r+1)
                let mut head = 0.0;
                let mut fact = 1.0;
                for j in 0..60 {
                    if j > 0 {
                        fact *= j as f64;
                    }
                    head += 1.0 / (fact * (r + j as f64 + 1.0));
                }
                (-1f64).exp() * (head + ln_gamma(r + 1.0).exp())
            }
        }
    }

    fn symmetric(self) -> bool {
        self != Coordinate::Exponential
    }
}

/// `!n`, the central moments of `Exp(1)`.
fn subfactorial(n: u32) -> f64 {
    let mut d = 1.0;
    for j in 1..=n {
        d = j as f64 * d + if j % 2 == 0 { 1.0 } else { -1.0 };
    }
    d
}

/// `r/2` when `r` is an even integer of moderate size.
fn half_even(r: f64) -> Option<u32> {
    let h = r / 2.0;
    (r >= 0.0 && h.fract() == 0.0 && h <= 40.0).then_some(h as u32)
}

/// i.i.d. standardized coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductModel {
    pub coord: Coordinate,
    pub dim: usize,
}

impl ProductModel {
    pub fn new(coord: Coordinate, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(ProductModel { coord, dim })
    }

    /// `E[(Σ_{j≤m} X_j²)^k]` for `k = 0..=kmax`.
    fn sq_norm_moments(&self, m: usize, kmax: u32) -> Vec<f64> {
        let mu: Vec<f64> = (0..=kmax).map(|k| self.coord.even_moment(k)).collect();
        let mut acc = vec![0.0; kmax as usize + 1];
        acc[0] = 1.0;
        for _ in 0..m {
            let prev = acc.clone();
            for k in 0..=kmax as usize {
                let mut binom = 1.0;
                let mut s = 0.0;
                for i in 0..=k {
                    s += binom * prev[i] * mu[k - i];
                    binom = binom * (k - i) as f64 / (i + 1) as f64;
                }
                acc[k] = s;
            }
        }
        acc
    }
}

impl DistributionModel for ProductModel {
    fn name(&self) -> String {
        match self.coord {
            Coordinate::Rademacher => "rademacher",
            Coordinate::Gaussian => "gaussian",
            Coordinate::Uniform => "uniform",
            Coordinate::Exponential => "exponential",
        }
        .into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut McRng, out: &mut [f64]) {
        self.coord.sample(rng, out);
    }

    fn sample_sum(&self, n: usize, rng: &mut McRng, out: &mut [f64]) {
        match self.coord {
            Coordinate::Gaussian => {
                standard_normal_vec(rng, out);
                let r = (n as f64).sqrt();
                out.iter_mut().for_each(|v| *v *= r);
            }
            Coordinate::Rademacher => {
                for v in out.iter_mut() {
                    let mut ones = 0u32;
                    let mut left = n;
                    while left > 0 {
                        let take = left.min(64);
                        let bits: u64 = rng.random();
                        let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
                        ones += (bits & mask).count_ones();
                        left -= take;
                    }
                    *v = 2.0 * ones as f64 - n as f64;
                }
            }
            _ => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut x = vec![0.0; out.len()];
                for _ in 0..n {
                    self.sample(rng, &mut x);
                    out.iter_mut().zip(&x).for_each(|(o, v)| *o += v);
                }
            }
        }
    }

    fn cov(&self) -> Option<SymTensor> {
        identity(self.dim).ok()
    }

    fn wcov(&self, l: f64) -> Option<SymTensor> {
        if !(l >= 0.0) {
            return None;
        }
        let d = self.dim;
        let diag = match self.coord {
            Coordinate::Rademacher => (d as f64).powf(l / 2.0),
            Coordinate::Gaussian => self.absmom(2.0 + l)? / d as f64,
            _ if d == 1 => self.coord.abs_moment(2.0 + l),
            _ => {
                let h = half_even(l)?;
                if !self.coord.symmetric() && h > 1 {
                    return None;
                }
                // E[X_1² (X_1² + R)^h], R the squared norm of the other coordinates
                let rest = self.sq_norm_moments(d - 1, h);
                let mut binom = 1.0;
                let mut s = 0.0;
                for i in 0..=h as usize {
                    s += binom * self.coord.even_moment(i as u32 + 1) * rest[h as usize - i];
                    binom = binom * (h as usize - i) as f64 / (i + 1) as f64;
                }
                s
            }
        };
        identity(d).ok().map(|t| t.scaled(diag))
    }

    fn absmom(&self, r: f64) -> Option<f64> {
        if !(r >= 0.0) {
            return None;
        }
        let d = self.dim as f64;
        match self.coord {
            Coordinate::Rademacher => Some(d.powf(r / 2.0)),
            Coordinate::Gaussian => Some(
                (0.5 * r * 2f64.ln() + ln_gamma((d + r) / 2.0) - ln_gamma(d / 2.0)).exp(),
            ),
            _ if self.dim == 1 => Some(self.coord.abs_moment(r)),
            _ => {
                let h = half_even(r)?;
                Some(self.sq_norm_moments(self.dim, h)[h as usize])
            }
        }
    }

    fn constant_norm(&self) -> Option<f64> {
        (self.coord == Coordinate::Rademacher).then(|| (self.dim as f64).sqrt())
    }

    fn norm_bound(&self) -> Option<f64> {
        match self.coord {
            Coordinate::Rademacher => Some((self.dim as f64).sqrt()),
            Coordinate::Uniform => Some((3.0 * self.dim as f64).sqrt()),
            _ => None,
        }
    }
}

/// Uniform law on the sphere of radius `√d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereModel {
    pub dim: usize,
}

impl DistributionModel for SphereModel {
    fn name(&self) -> String {
        "sphere".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut McRng, out: &mut [f64]) {
        loop {
            standard_normal_vec(rng, out);
            let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                let scale = (self.dim as f64).sqrt() / norm;
                out.iter_mut().for_each(|v| *v *= scale);
                return;
            }
        }
    }

    fn cov(&self) -> Option<SymTensor> {
        identity(self.dim).ok()
    }

    fn wcov(&self, l: f64) -> Option<SymTensor> {
        identity(self.dim).ok().map(|t| t.scaled((self.dim as f64).powf(l / 2.0)))
    }

    fn absmom(&self, r: f64) -> Option<f64> {
        Some((self.dim as f64).powf(r / 2.0))
    }

    fn constant_norm(&self) -> Option<f64> {
        Some((self.dim as f64).sqrt())
    }
}

/// The degenerate law `X = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointMassModel {
    pub dim: usize,
}

impl DistributionModel for PointMassModel {
    fn name(&self) -> String {
        "point_mass".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, _rng: &mut McRng, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn sample_sum(&self, _n: usize, _rng: &mut McRng, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }

    fn cov(&self) -> Option<SymTensor> {
        SymTensor::zeros(self.dim, 2).ok()
    }

    fn wcov(&self, _l: f64) -> Option<SymTensor> {
        SymTensor::zeros(self.dim, 2).ok()
    }

    fn absmom(&self, r: f64) -> Option<f64> {
        Some(if r == 0.0 { 1.0 } else { 0.0 })
    }

    fn constant_norm(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `c · X` for an inner model `X`.
pub struct ScaledModel {
    pub inner: Box<dyn DistributionModel>,
    pub scale: f64,
}

impl DistributionModel for ScaledModel {
    fn name(&self) -> String {
        format!("{}*{}", self.scale, self.inner.name())
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sample(&self, rng: &mut McRng, out: &mut [f64]) {
        self.inner.sample(rng, out);
        out.iter_mut().for_each(|v| *v *= self.scale);
    }

    fn sample_sum(&self, n: usize, rng: &mut McRng, out: &mut [f64]) {
        self.inner.sample_sum(n, rng, out);
        out.iter_mut().for_each(|v| *v *= self.scale);
    }

    fn cov(&self) -> Option<SymTensor> {
        self.inner.cov().map(|t| t.scaled(self.scale * self.scale))
    }

    fn wcov(&self, l: f64) -> Option<SymTensor> {
        let c = self.scale.abs();
        self.inner.wcov(l).map(|t| t.scaled(c.powf(2.0 + l)))
    }

    fn absmom(&self, r: f64) -> Option<f64> {
        self.inner.absmom(r).map(|m| m * self.scale.abs().powf(r))
    }

    fn constant_norm(&self) -> Option<f64> {
        self.inner.constant_norm().map(|r| r * self.scale.abs())
    }

    fn norm_bound(&self) -> Option<f64> {
        self.inner.norm_bound().map(|r| r * self.scale.abs())
    }
}

/// Model selection by name, as read from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub dim: usize,
    /// Recognized key: `scale` (multiplies every draw).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        ModelSpec { name: name.into(), dim, params: BTreeMap::new() }
    }

    pub fn build(&self) -> Result<Box<dyn DistributionModel>> {
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let d = self.dim;
        let base: Box<dyn DistributionModel> = match self.name.as_str() {
            "rademacher" => Box::new(ProductModel::new(Coordinate::Rademacher, d)?),
            "gaussian" => Box::new(ProductModel::new(Coordinate::Gaussian, d)?),
            "uniform" => Box::new(ProductModel::new(Coordinate::Uniform, d)?),
            "exponential" => Box::new(ProductModel::new(Coordinate::Exponential, d)?),
            "sphere" => Box::new(SphereModel { dim: d }),
            "point_mass" => Box::new(PointMassModel { dim: d }),
            other => {
                return Err(Error::Config(format!(
                    "unknown model `{other}` (expected rademacher, gaussian, uniform, \
                     exponential, sphere or point_mass)"
                )))
            }
        };
        for key in self.params.keys() {
            if key != "scale" {
                return Err(Error::Config(format!("unknown model parameter `{key}`")));
            }
        }
        match self.params.get("scale") {
            Some(&c) if c != 1.0 => {
                if !c.is_finite() {
                    return Err(Error::Config(format!("model scale must be finite, got {c}")));
                }
                Ok(Box::new(ScaledModel { inner: base, scale: c }))
            }
            _ => Ok(base),
        }
    }
}

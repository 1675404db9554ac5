//! Multi-indices and symmetric tensor coefficient families.
//!
//! A [`SymTensor`] of dimension `d` and degree `k` holds one coefficient per
//! multi-index `α` with `|α| = k`, stored densely in the order produced by
//! [`enumerate`] (descending lexicographic: `(2,0), (1,1), (0,2)`). The inner
//! product weighs each coefficient by the multinomial `k!/α!`, which makes
//! `‖x^{⊗k}‖ = ‖x‖^k` and `⟨x^{⊗k}, y^{⊗k}⟩ = (x·y)^k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A `d`-tuple of non-negative integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(MultiIndex(entries))
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d.max(1)])
    }

    /// `e_i` scaled by `order`.
    pub fn axis(d: usize, i: usize, order: u32) -> Self {
        let mut v = vec![0; d.max(1)];
        v[i] = order;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ α_i`.
    pub fn abs(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = Π α_i!`, or `None` on `u128` overflow.
    pub fn factorial(&self) -> Option<u128> {
        self.0.iter().try_fold(1u128, |acc, &a| {
            (2..=a as u128).try_fold(acc, |p, j| p.checked_mul(j))
        })
    }

    /// `α!` in floating point; exact while the value fits in 53 bits.
    pub fn factorial_f64(&self) -> f64 {
        self.0.iter().map(|&a| factorial_f64(a)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial_f64(k: u32) -> f64 {
    (2..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// `C(n, k)` in `u64`; callers keep arguments small.
pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of multi-indices of dimension `d` with absolute value `k`.
pub fn count(d: usize, k: u32) -> usize {
    if d == 0 {
        return usize::from(k == 0);
    }
    binomial(d as u64 + k as u64 - 1, k as u64) as usize
}

/// All multi-indices of dimension `d` with `|α| = k`, descending lexicographic.
pub fn enumerate(d: usize, k: u32) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut out = Vec::with_capacity(count(d, k));
    let mut cur = vec![0u32; d];
    fn rec(i: usize, rem: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        let d = cur.len();
        if i == d - 1 {
            cur[i] = rem;
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for a in (0..=rem).rev() {
            cur[i] = a;
            rec(i + 1, rem - a, cur, out);
        }
    }
    rec(0, k, &mut cur, &mut out);
    Ok(out)
}

/// All multi-indices with `|α| <= max_degree`, grouped by degree.
pub fn enumerate_up_to(d: usize, max_degree: u32) -> Result<Vec<MultiIndex>> {
    let mut out = Vec::new();
    for k in 0..=max_degree {
        out.extend(enumerate(d, k)?);
    }
    Ok(out)
}

/// Position of `alpha` within `enumerate(alpha.dim(), alpha.abs())`.
pub fn rank(alpha: &MultiIndex) -> usize {
    let d = alpha.dim();
    let mut rem = alpha.abs();
    let mut pos = 0;
    for (i, &a) in alpha.0.iter().enumerate().take(d - 1) {
        // indices sharing the prefix but with a larger entry at i come first
        for v in (a + 1)..=rem {
            pos += count(d - i - 1, rem - v);
        }
        rem -= a;
    }
    pos
}

/// `x^α = Π x_i^{α_i}`, with `0^0 = 1`.
pub fn monomial(x: &[f64], alpha: &MultiIndex) -> Result<f64> {
    if x.len() != alpha.dim() {
        return Err(Error::LengthMismatch { expected: alpha.dim(), got: x.len() });
    }
    Ok(x.iter().zip(&alpha.0).map(|(&xi, &a)| xi.powi(a as i32)).product())
}

/// Multinomial weights `k!/α!` in enumeration order.
pub fn hs_weights(d: usize, k: u32) -> Result<Vec<f64>> {
    Ok(enumerate(d, k)?
        .iter()
        .map(|alpha| {
            // product of binomials avoids forming k! directly
            let mut rem = k as u64;
            let mut w = 1.0;
            for &a in alpha.entries() {
                w *= binomial(rem, a as u64) as f64;
                rem -= a as u64;
            }
            w
        })
        .collect())
}

/// Calls `f` with every monomial `x^α`, `|α| = k`, in enumeration order.
pub(crate) fn for_each_monomial(x: &[f64], k: u32, mut f: impl FnMut(f64)) {
    let d = x.len();
    let k = k as usize;
    // pow[i][j] = x_i^j
    let pow: Vec<Vec<f64>> = x
        .iter()
        .map(|&xi| {
            let mut p = Vec::with_capacity(k + 1);
            let mut acc = 1.0;
            for _ in 0..=k {
                p.push(acc);
                acc *= xi;
            }
            p
        })
        .collect();
    fn rec(i: usize, rem: usize, prod: f64, pow: &[Vec<f64>], f: &mut dyn FnMut(f64)) {
        if i == pow.len() - 1 {
            f(prod * pow[i][rem]);
            return;
        }
        for a in (0..=rem).rev() {
            rec(i + 1, rem - a, prod * pow[i][a], pow, f);
        }
    }
    if d > 0 {
        rec(0, k, 1.0, &pow, &mut f);
    }
}

/// Coefficient family `(M_α)_{|α|=k}` over dimension `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymTensor {
    dim: usize,
    degree: u32,
    coeffs: Vec<f64>,
}

impl SymTensor {
    pub fn zeros(dim: usize, degree: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(SymTensor { dim, degree, coeffs: vec![0.0; count(dim, degree)] })
    }

    /// Builds a tensor from coefficients listed in enumeration order.
    pub fn from_coeffs(dim: usize, degree: u32, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let expected = count(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::LengthMismatch { expected, got: coeffs.len() });
        }
        Ok(SymTensor { dim, degree, coeffs })
    }

    /// The degree-0 tensor holding `value`.
    pub fn scalar(dim: usize, value: f64) -> Result<Self> {
        Self::from_coeffs(dim, 0, vec![value])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn indices(&self) -> Vec<MultiIndex> {
        enumerate(self.dim, self.degree).expect("dim >= 1 by construction")
    }

    pub fn get(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check_index(alpha)?;
        Ok(self.coeffs[rank(alpha)])
    }

    pub fn set(&mut self, alpha: &MultiIndex, value: f64) -> Result<()> {
        self.check_index(alpha)?;
        let r = rank(alpha);
        self.coeffs[r] = value;
        Ok(())
    }

    fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.dim() != self.dim || alpha.abs() != self.degree {
            return Err(Error::ShapeMismatch(
                self.dim,
                self.degree as usize,
                alpha.dim(),
                alpha.abs() as usize,
            ));
        }
        Ok(())
    }

    fn check_shape(&self, other: &SymTensor) -> Result<()> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::ShapeMismatch(
                self.dim,
                self.degree as usize,
                other.dim,
                other.degree as usize,
            ));
        }
        Ok(())
    }

    /// `self += scale * other`.
    pub fn axpy(&mut self, scale: f64, other: &SymTensor) -> Result<()> {
        self.check_shape(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
        Ok(())
    }

    /// `self += scale * x^{⊗k}` without materializing the power.
    pub fn add_power(&mut self, scale: f64, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: x.len() });
        }
        let mut it = self.coeffs.iter_mut();
        for_each_monomial(x, self.degree, |m| {
            *it.next().expect("monomial count matches") += scale * m;
        });
        Ok(())
    }

    pub fn scaled(mut self, scale: f64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= scale);
        self
    }

    /// Degree-2 tensor back to a dense symmetric matrix.
    pub fn to_matrix(&self) -> Result<Vec<Vec<f64>>> {
        if self.degree != 2 {
            return Err(invalid(format!("to_matrix needs degree 2, got {}", self.degree)));
        }
        let d = self.dim;
        let mut m = vec![vec![0.0; d]; d];
        for (alpha, &c) in self.indices().iter().zip(&self.coeffs) {
            let nz: Vec<usize> = (0..d).filter(|&i| alpha.entries()[i] > 0).collect();
            match nz.as_slice() {
                [i] => m[*i][*i] = c,
                [i, j] => {
                    m[*i][*j] = c;
                    m[*j][*i] = c;
                }
                _ => unreachable!("degree-2 index has one or two non-zero entries"),
            }
        }
        Ok(m)
    }
}

/// `x^{⊗k}`: coefficient `x^α` at every `|α| = k`.
pub fn tensor_power(x: &[f64], k: u32) -> Result<SymTensor> {
    let mut t = SymTensor::zeros(x.len(), k)?;
    t.add_power(1.0, x)?;
    Ok(t)
}

/// Weighted Hilbert–Schmidt product `Σ_{|α|=k} (k!/α!) a_α b_α`.
pub fn hs_inner(a: &SymTensor, b: &SymTensor) -> Result<f64> {
    a.check_shape(b)?;
    let w = hs_weights(a.dim, a.degree)?;
    Ok(w.iter().zip(a.coeffs.iter().zip(&b.coeffs)).map(|(w, (x, y))| w * x * y).sum())
}

pub fn hs_norm_sq(a: &SymTensor) -> f64 {
    hs_inner(a, a).expect("same shape")
}

pub fn hs_norm(a: &SymTensor) -> f64 {
    hs_norm_sq(a).sqrt()
}

/// Embeds a symmetric matrix as a degree-2 family: `M_α = M_ii` when
/// `α_i = 2` and `M_ij` when `α_i = α_j = 1`.
pub fn sym_embed(m: &[Vec<f64>]) -> Result<SymTensor> {
    let d = m.len();
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: row.len() });
        }
        for j in 0..i {
            let gap = (m[i][j] - m[j][i]).abs();
            if gap > 1e-12 * m[i][j].abs().max(m[j][i].abs()).max(1.0) {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
    }
    let idx = enumerate(d, 2)?;
    let coeffs = idx
        .iter()
        .map(|alpha| {
            let nz: Vec<usize> = (0..d).filter(|&i| alpha.entries()[i] > 0).collect();
            match nz.as_slice() {
                [i] => m[*i][*i],
                [i, j] => m[*i][*j],
                _ => unreachable!(),
            }
        })
        .collect();
    SymTensor::from_coeffs(d, 2, coeffs)
}

/// `I_d` as a degree-2 family.
pub fn identity(d: usize) -> Result<SymTensor> {
    let m: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    sym_embed(&m)
}

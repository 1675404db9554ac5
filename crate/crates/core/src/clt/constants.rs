//! Numerical constants of the CLT bounds.

use serde::{Deserialize, Serialize};

/// Target for the certified tail of each partial sum.
const TAIL_TARGET: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltConstants {
    /// `8 + sum4`.
    pub c: f64,
    /// `√C + √2 + 2 sum16^{1/4} (12 + sum16)^{1/4}`.
    pub c_prime: f64,
    /// `Σ_{k≥1} 4^k / (k k!)`.
    pub sum4: f64,
    /// `Σ_{k≥1} 16^k / (2k (2k)!)`.
    pub sum16: f64,
    /// Upper bounds on the neglected tails.
    pub sum4_tail: f64,
    pub sum16_tail: f64,
    pub sum4_terms: u32,
    pub sum16_terms: u32,
}

/// `Σ_{k≥1} a_k` given `a_1` and the ratio `a_{k+1}/a_k`, which must
/// decrease in `k`. Returns (sum, tail bound, terms used).
fn ratio_sum(first: f64, ratio: impl Fn(u32) -> f64) -> (f64, f64, u32) {
    let (mut sum, mut term, mut k) = (0.0, first, 1);
    loop {
        sum += term;
        let r = ratio(k);
        let next = term * r;
        if r < 1.0 {
            let tail = next / (1.0 - r);
            if tail < TAIL_TARGET {
                return (sum, tail, k);
            }
        }
        term = next;
        k += 1;
    }
}

pub fn clt_constants() -> CltConstants {
    let (sum4, sum4_tail, sum4_terms) = ratio_sum(4.0, |k| {
        let k = k as f64;
        4.0 * k / ((k + 1.0) * (k + 1.0))
    });
    let (sum16, sum16_tail, sum16_terms) = ratio_sum(4.0, |k| {
        let k = k as f64;
        16.0 * k / ((k + 1.0) * (2.0 * k + 2.0) * (2.0 * k + 1.0))
    });
    let c = 8.0 + sum4;
    let c_prime = c.sqrt() + 2f64.sqrt() + 2.0 * (sum16 * (12.0 + sum16)).powf(0.25);
    CltConstants { c, c_prime, sum4, sum16, sum4_tail, sum16_tail, sum4_terms, sum16_terms }
}

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use stein_bounds::hermite::*;
use stein_bounds::tensor::MultiIndex;

/// Integer coefficients of `H_k` from `H_{k+1} = x H_k - H_k'`, the
/// derivative form of `H_k(x) = (-1)^k e^{x²/2} dᵏ/dxᵏ e^{-x²/2}`.
fn rodrigues(max: usize) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::from(1)]];
    for k in 0..max {
        let h = &out[k];
        let mut next = vec![BigInt::zero(); h.len() + 1];
        for (i, c) in h.iter().enumerate() {
            next[i + 1] += c;
            if i > 0 {
                next[i - 1] -= c * BigInt::from(i);
            }
        }
        out.push(next);
    }
    out
}

fn horner(c: &[BigInt], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v.to_f64().unwrap())
}

#[test]
fn matches_rodrigues_polynomials() {
    let polys = rodrigues(14);
    for x in [-3.5, -1.0, -0.3, 0.0, 0.25, 1.0, 2.2, 4.0] {
        for (k, c) in polys.iter().enumerate() {
            let want = horner(c, x);
            let got = hermite_1d(k as u32, x);
            let scale = c.iter().map(|v| v.to_f64().unwrap().abs()).sum::<f64>() * x.abs().max(1.0).powi(k as i32);
            assert!((got - want).abs() <= 1e-13 * scale, "k {k} x {x}: {got} vs {want}");
        }
    }
}

#[test]
fn low_order_closed_forms() {
    let x: f64 = 1.7;
    assert_eq!(hermite_1d(0, x), 1.0);
    assert_eq!(hermite_1d(1, x), x);
    assert!((hermite_1d(2, x) - (x * x - 1.0)).abs() < 1e-14);
    assert!((hermite_1d(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-13);
    assert!((hermite_1d(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn product_structure(entries in prop::collection::vec(0u32..5, 1..4), z in prop::collection::vec(-3.0f64..3.0, 3)) {
        let d = entries.len();
        let alpha = MultiIndex::new(entries.clone()).unwrap();
        let want: f64 = entries.iter().zip(&z).map(|(&a, &x)| hermite_1d(a, x)).product();
        let got = hermite_eval(&alpha, &z[..d]).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn parity(k in 0u32..12, x in -4.0f64..4.0) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((hermite_1d(k, -x) - sign * hermite_1d(k, x)).abs() <= 1e-12 * hermite_1d(k, x).abs().max(1.0));
    }

    #[test]
    fn derivative_lowers_degree(k in 1u32..10, x in -3.0f64..3.0) {
        // H_k' = k H_{k-1}
        let h = 1e-5;
        let num = (hermite_1d(k, x + h) - hermite_1d(k, x - h)) / (2.0 * h);
        let want = k as f64 * hermite_1d(k - 1, x);
        prop_assert!((num - want).abs() <= 1e-5 * want.abs().max(1.0) * (k as f64).powi(2));
    }

    #[test]
    fn all_orders_agree(max in 0u32..15, x in -5.0f64..5.0) {
        let all = hermite_1d_all(max, x);
        prop_assert_eq!(all.len(), max as usize + 1);
        for (k, v) in all.iter().enumerate() {
            prop_assert_eq!(*v, hermite_1d(k as u32, x));
        }
    }
}

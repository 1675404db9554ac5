use proptest::prelude::*;
use stein_bounds::tensor::*;

fn vec_and_k() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, u32)> {
    (1usize..=4).prop_flat_map(|d| {
        (
            prop::collection::vec(-3.0f64..3.0, d),
            prop::collection::vec(-3.0f64..3.0, d),
            1u32..=6,
        )
    })
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #[test]
    fn power_norm_is_norm_power((x, _y, k) in vec_and_k()) {
        let t = tensor_power(&x, k).unwrap();
        let want = x.iter().map(|v| v * v).sum::<f64>().sqrt().powi(k as i32);
        prop_assert!((hs_norm(&t) - want).abs() <= 1e-10 * want.max(1e-300));
    }

    #[test]
    fn power_inner_is_dot_power((x, y, k) in vec_and_k()) {
        let a = tensor_power(&x, k).unwrap();
        let b = tensor_power(&y, k).unwrap();
        let dot: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
        let want = dot.powi(k as i32);
        let scale = (hs_norm(&a) * hs_norm(&b)).max(1e-300);
        prop_assert!((hs_inner(&a, &b).unwrap() - want).abs() <= 1e-10 * scale);
    }

    #[test]
    fn enumeration_is_a_ranked_bijection(d in 1usize..=5, k in 0u32..=6) {
        let all = enumerate(d, k).unwrap();
        prop_assert_eq!(all.len() as u64, binom(d as u64 + k as u64 - 1, k as u64));
        prop_assert_eq!(all.len(), count(d, k));
        for (i, a) in all.iter().enumerate() {
            prop_assert_eq!(a.abs(), k);
            prop_assert_eq!(rank(a), i);
        }
        // multinomial theorem: Σ k!/α! = d^k
        let w: f64 = hs_weights(d, k).unwrap().iter().sum();
        prop_assert!((w - (d as f64).powi(k as i32)).abs() <= 1e-9 * w);
    }

    #[test]
    fn power_coefficients_are_monomials((x, _y, k) in vec_and_k()) {
        let t = tensor_power(&x, k).unwrap();
        for (a, c) in t.indices().iter().zip(t.coeffs()) {
            let m = monomial(&x, a).unwrap();
            prop_assert!((c - m).abs() <= 1e-12 * m.abs().max(1.0));
        }
    }

    #[test]
    fn matrix_round_trip(d in 1usize..=4, seed in prop::collection::vec(-2.0f64..2.0, 16)) {
        let mut m = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..=i {
                m[i][j] = seed[i * 4 + j];
                m[j][i] = seed[i * 4 + j];
            }
        }
        let t = sym_embed(&m).unwrap();
        prop_assert_eq!(t.to_matrix().unwrap(), m.clone());
        let fro: f64 = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((hs_norm(&t) - fro).abs() <= 1e-12 * fro.max(1.0));
    }

    #[test]
    fn add_power_accumulates_linearly((x, y, k) in vec_and_k(), a in -2.0f64..2.0) {
        let mut t = SymTensor::zeros(x.len(), k).unwrap();
        t.add_power(a, &x).unwrap();
        t.add_power(1.0, &y).unwrap();
        let mut want = tensor_power(&x, k).unwrap().scaled(a);
        want.axpy(1.0, &tensor_power(&y, k).unwrap()).unwrap();
        for (u, v) in t.coeffs().iter().zip(want.coeffs()) {
            prop_assert!((u - v).abs() <= 1e-10 * v.abs().max(1.0));
        }
    }
}

#[test]
fn nonsymmetric_matrix_is_rejected() {
    let m = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
    assert!(sym_embed(&m).is_err());
}

#[test]
fn identity_has_norm_sqrt_d() {
    for d in 1..6 {
        assert!((hs_norm(&identity(d).unwrap()) - (d as f64).sqrt()).abs() < 1e-14);
    }
}

//! Moment tables feeding the closed-form bounds.

use serde::{Deserialize, Serialize};

use super::models::DistributionModel;
use crate::error::{Error, Result};
use crate::mc::{mc_vec, McConfig};
use crate::tensor::{count, hs_norm, hs_weights, identity, SymTensor};

/// Standard errors added on top of a Monte Carlo moment to keep bounds
/// conservative.
pub const SE_FOLD: f64 = 4.0;

/// Exponents needed by a bound: `l` for `E[X^{⊗2}‖X‖^l]`, `r` for `E‖X‖^r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentGrid {
    pub l: Vec<f64>,
    pub r: Vec<f64>,
}

impl MomentGrid {
    /// Everything the `W₂` bounds read for moment exponent `m`.
    pub fn for_w2(m: f64) -> Self {
        let mut g = MomentGrid { l: vec![0.0, 1.0, 2.0, m], r: vec![0.0, 1.0, 2.0, m, 2.0 + m] };
        g.normalize();
        g
    }

    /// Everything the `W_p` bound reads for `(p, q)`.
    pub fn for_wp(p: f64, q: f64) -> Self {
        let m = (p + q - 2.0).min(2.0);
        let mut g = Self::for_w2(m);
        g.r.push(p + q);
        g.normalize();
        g
    }

    pub fn merge(mut self, other: &MomentGrid) -> Self {
        self.l.extend(&other.l);
        self.r.extend(&other.r);
        self.normalize();
        self
    }

    fn normalize(&mut self) {
        for v in [&mut self.l, &mut self.r] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
    }
}

/// A scalar moment with its Monte Carlo standard error (zero when analytic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub value: f64,
    pub se: f64,
    pub analytic: bool,
}

impl Moment {
    pub fn exact(value: f64) -> Self {
        Moment { value, se: 0.0, analytic: true }
    }

    /// `value + SE_FOLD · se`.
    pub fn upper(&self) -> f64 {
        self.value + SE_FOLD * self.se
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub model: String,
    pub dim: usize,
    /// `E[X^{⊗2}]` with per-coefficient standard errors.
    pub cov: SymTensor,
    pub cov_se: Vec<f64>,
    /// `‖E[X^{⊗2}]‖`.
    pub cov_norm: Moment,
    /// `(l, ‖E[X^{⊗2}‖X‖^l]‖)`.
    pub wcov_norm: Vec<(f64, Moment)>,
    /// `(r, E‖X‖^r)`.
    pub absmom: Vec<(f64, Moment)>,
}

fn lookup(list: &[(f64, Moment)], key: f64) -> Option<Moment> {
    list.iter().find(|(k, _)| (k - key).abs() <= 1e-12 * key.abs().max(1.0)).map(|e| e.1)
}

impl MomentTable {
    /// Analytic moments only; any missing entry is an error.
    pub fn analytic(model: &dyn DistributionModel, grid: &MomentGrid) -> Result<Self> {
        let missing = |what: String| Error::MissingMoment { model: model.name(), what };
        let cov = model.cov().ok_or_else(|| missing("E[X⊗X]".into()))?;
        let mut wcov_norm = Vec::new();
        for &l in &grid.l {
            let w = model.wcov(l).ok_or_else(|| missing(format!("E[X⊗X ‖X‖^{l}]")))?;
            wcov_norm.push((l, Moment::exact(hs_norm(&w))));
        }
        let mut absmom = Vec::new();
        for &r in &grid.r {
            let a = model.absmom(r).ok_or_else(|| missing(format!("E‖X‖^{r}")))?;
            absmom.push((r, Moment::exact(a)));
        }
        Ok(MomentTable {
            model: model.name(),
            dim: model.dim(),
            cov_se: vec![0.0; cov.coeffs().len()],
            cov_norm: Moment::exact(hs_norm(&cov)),
            cov,
            wcov_norm,
            absmom,
        })
    }

    pub fn wcov(&self, l: f64) -> Result<Moment> {
        lookup(&self.wcov_norm, l).ok_or_else(|| Error::MissingMoment {
            model: self.model.clone(),
            what: format!("E[X⊗X ‖X‖^{l}]"),
        })
    }

    pub fn absmom(&self, r: f64) -> Result<Moment> {
        lookup(&self.absmom, r).ok_or_else(|| Error::MissingMoment {
            model: self.model.clone(),
            what: format!("E‖X‖^{r}"),
        })
    }

    /// Whether `E[X^{⊗2}] = I_d`: exactly for analytic tables, within
    /// `SE_FOLD` standard errors per coefficient otherwise.
    pub fn identity_covariance(&self) -> bool {
        let id = identity(self.dim).expect("dim >= 1");
        self.cov.coeffs().iter().zip(id.coeffs()).zip(&self.cov_se).all(|((c, i), se)| {
            (c - i).abs() <= (SE_FOLD * se).max(1e-12)
        })
    }
}

/// Moment table with analytic entries where the model provides them and
/// Monte Carlo estimates (from `n_mc` draws) elsewhere.
pub fn moment_stats(
    model: &dyn DistributionModel,
    grid: &MomentGrid,
    n_mc: usize,
    seed: u64,
) -> Result<MomentTable> {
    let d = model.dim();
    let nc = count(d, 2);
    let weights = hs_weights(d, 2)?;
    let need_l: Vec<f64> = grid.l.iter().copied().filter(|&l| model.wcov(l).is_none()).collect();
    let need_r: Vec<f64> = grid.r.iter().copied().filter(|&r| model.absmom(r).is_none()).collect();
    let analytic_cov = model.cov();
    let need_cov = analytic_cov.is_none();
    if !need_cov && need_l.is_empty() && need_r.is_empty() {
        return MomentTable::analytic(model, grid);
    }
    let width = nc * (need_l.len() + usize::from(need_cov)) + need_r.len();
    let est = mc_vec(McConfig::new(n_mc, seed), width, |rng, out| {
        let mut x = vec![0.0; d];
        model.sample(rng, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut outer = SymTensor::zeros(d, 2)?;
        outer.add_power(1.0, &x)?;
        let mut pos = 0;
        let mut blocks: Vec<f64> = Vec::new();
        if need_cov {
            blocks.push(1.0);
        }
        blocks.extend(need_l.iter().map(|&l| norm.powf(l)));
        for scale in blocks {
            for (o, c) in out[pos..pos + nc].iter_mut().zip(outer.coeffs()) {
                *o = scale * c;
            }
            pos += nc;
        }
        for (j, &r) in need_r.iter().enumerate() {
            out[pos + j] = norm.powf(r);
        }
        Ok(())
    })?;
    if let Some(bad) = est.iter().find(|e| !e.mean.is_finite() || !e.se.is_finite()) {
        return Err(Error::NonFinite(format!("sample moment {} ± {}", bad.mean, bad.se)));
    }
    // ‖ĉ - c‖ is of order √(Σ w_α se_α²)
    let tensor_moment = |block: &[crate::mc::Estimate]| -> Result<(SymTensor, Vec<f64>, Moment)> {
        let t = SymTensor::from_coeffs(d, 2, block.iter().map(|e| e.mean).collect())?;
        let se: Vec<f64> = block.iter().map(|e| e.se).collect();
        let norm_se = weights.iter().zip(&se).map(|(w, s)| w * s * s).sum::<f64>().sqrt();
        let m = Moment { value: hs_norm(&t), se: norm_se, analytic: false };
        Ok((t, se, m))
    };
    let mut pos = 0;
    let (cov, cov_se, cov_norm) = match analytic_cov {
        Some(c) => {
            let n = hs_norm(&c);
            (c, vec![0.0; nc], Moment::exact(n))
        }
        None => {
            pos += nc;
            tensor_moment(&est[..nc])?
        }
    };
    let mut wcov_norm = Vec::new();
    for &l in &grid.l {
        match model.wcov(l) {
            Some(w) => wcov_norm.push((l, Moment::exact(hs_norm(&w)))),
            None => {
                wcov_norm.push((l, tensor_moment(&est[pos..pos + nc])?.2));
                pos += nc;
            }
        }
    }
    let mut absmom = Vec::new();
    for &r in &grid.r {
        match model.absmom(r) {
            Some(a) => absmom.push((r, Moment::exact(a))),
            None => {
                let e = est[pos];
                absmom.push((r, Moment { value: e.mean, se: e.se, analytic: false }));
                pos += 1;
            }
        }
    }
    Ok(MomentTable { model: model.name(), dim: d, cov, cov_se, cov_norm, wcov_norm, absmom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clt::models::{Coordinate, ModelSpec, ProductModel};
    use crate::mc::McRng;

    /// The exponential model with its analytic moments hidden.
    struct Hidden(ProductModel);

    impl DistributionModel for Hidden {
        fn name(&self) -> String {
            "hidden".into()
        }
        fn dim(&self) -> usize {
            self.0.dim
        }
        fn sample(&self, rng: &mut McRng, out: &mut [f64]) {
            self.0.sample(rng, out)
        }
        fn cov(&self) -> Option<SymTensor> {
            None
        }
    }

    #[test]
    fn rademacher_table_is_all_ones() {
        let m = ModelSpec::new("rademacher", 1).build().unwrap();
        let t = moment_stats(m.as_ref(), &MomentGrid::for_wp(4.0, 2.0), 10, 0).unwrap();
        assert_eq!(t.cov.coeffs(), &[1.0]);
        assert_eq!(t.wcov(2.0).unwrap().value, 1.0);
        for (_, a) in &t.absmom {
            assert_eq!(a.value, 1.0);
        }
        assert!(t.identity_covariance());
    }

    #[test]
    fn gaussian_two_dimensional_table() {
        let m = ModelSpec::new("gaussian", 2).build().unwrap();
        let t = MomentTable::analytic(m.as_ref(), &MomentGrid::for_w2(2.0)).unwrap();
        assert_eq!(t.cov, identity(2).unwrap());
        assert!((t.absmom(2.0).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mc_matches_analytic_exponential() {
        for d in [1, 2] {
            let exact = ProductModel::new(Coordinate::Exponential, d).unwrap();
            let grid = MomentGrid { l: vec![0.0, 2.0], r: vec![2.0, 4.0] };
            let a = MomentTable::analytic(&exact, &grid).unwrap();
            let mc = moment_stats(&Hidden(exact), &grid, 400_000, 5).unwrap();
            assert!(mc.identity_covariance(), "{:?}", mc.cov);
            let check = |x: Moment, y: Moment| {
                assert!(!x.analytic && y.analytic);
                assert!((x.value - y.value).abs() <= 4.0 * x.se, "{x:?} vs {y:?}");
            };
            check(mc.cov_norm, a.cov_norm);
            for l in [0.0, 2.0] {
                check(mc.wcov(l).unwrap(), a.wcov(l).unwrap());
            }
            for r in [2.0, 4.0] {
                check(mc.absmom(r).unwrap(), a.absmom(r).unwrap());
            }
        }
    }

    #[test]
    fn missing_entries_are_reported() {
        let e = ProductModel::new(Coordinate::Exponential, 2).unwrap();
        let err = MomentTable::analytic(&e, &MomentGrid::for_w2(1.5)).unwrap_err();
        assert!(matches!(err, Error::MissingMoment { .. }));
        let t = moment_stats(&e, &MomentGrid::for_w2(1.5), 50_000, 1).unwrap();
        assert!(!t.absmom(3.5).unwrap().analytic);
        assert!(t.absmom(2.0).unwrap().analytic);
        assert!(t.wcov(1.0).is_ok());
        assert!(t.wcov(7.0).is_err());
    }
}

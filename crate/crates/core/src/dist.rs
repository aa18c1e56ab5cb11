//! Probability mass functions on `{0, ..., K}` with tail bookkeeping.

use crate::error::{Error, Result};
use crate::poly::Poly;

const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    pmf: Vec<f64>,
    tail_mass: f64,
}

impl DiscreteDist {
    /// Validates `pmf(k) >= 0` and `sum + tail_mass = 1` within 1e-9.
    pub fn new(pmf: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if let Some((k, &p)) = pmf.iter().enumerate().find(|(_, p)| p.is_nan() || **p < 0.0) {
            return Err(Error::Numerical(format!("pmf({k}) = {p}")));
        }
        if tail_mass.is_nan() || tail_mass < 0.0 {
            return Err(Error::Numerical(format!("tail mass {tail_mass}")));
        }
        let total: f64 = pmf.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Numerical(format!("total mass {total}")));
        }
        Ok(DiscreteDist { pmf, tail_mass })
    }

    pub fn point_mass(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        DiscreteDist { pmf, tail_mass: 0.0 }
    }

    /// Distribution whose pgf is `p`.
    pub fn from_pgf(p: &Poly) -> Result<Self> {
        DiscreteDist::new(p.nonnegative_coeffs()?, 0.0)
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn p(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Largest represented support point `K`.
    pub fn support_bound(&self) -> usize {
        self.pmf.len().saturating_sub(1)
    }

    /// `F(k)`; for `k` beyond the support this is `1 - tail_mass`.
    pub fn cdf(&self, k: usize) -> f64 {
        let end = (k + 1).min(self.pmf.len());
        self.pmf[..end].iter().sum()
    }

    pub fn cdf_vec(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, &p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.pmf.iter().enumerate().map(|(k, &p)| (k as f64 - m).powi(2) * p).sum()
    }

    /// `E[(X - c)_+]`.
    pub fn stop_loss(&self, c: usize) -> f64 {
        self.pmf.iter().enumerate().skip(c + 1).map(|(k, &p)| (k - c) as f64 * p).sum()
    }

    /// `inf { k : F(k) >= kappa }`.
    pub fn value_at_risk(&self, kappa: f64) -> Result<usize> {
        check_kappa(kappa)?;
        let mut acc = 0.0;
        for (k, &p) in self.pmf.iter().enumerate() {
            acc += p;
            if acc >= kappa {
                return Ok(k);
            }
        }
        Err(Error::Numerical(format!("level {kappa} beyond the represented support")))
    }

    /// Tail value-at-risk with the atom at the quantile split as `(F(q) - kappa) q`.
    pub fn tvar(&self, kappa: f64) -> Result<f64> {
        let q = self.value_at_risk(kappa)?;
        let above: f64 = self.pmf.iter().enumerate().skip(q + 1).map(|(k, &p)| k as f64 * p).sum();
        Ok((above + (self.cdf(q) - kappa) * q as f64) / (1.0 - kappa))
    }

    /// Total variation distance `sum |p - q| / 2` over the union of supports.
    pub fn total_variation(&self, other: &DiscreteDist) -> f64 {
        let n = self.pmf.len().max(other.pmf.len());
        0.5 * (0..n).map(|k| (self.p(k) - other.p(k)).abs()).sum::<f64>()
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::Parameter(format!("kappa = {kappa} outside [0, 1)")));
    }
    Ok(())
}

//! Univariate polynomials with real coefficients, used as probability
//! generating functions of bounded count variables.

use std::ops::Mul;

use crate::error::{Error, Result};

/// `coeffs[k]` is the coefficient of `t^k`. Trailing zeros are trimmed, so
/// the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![1.0] }
    }

    /// The monomial `t`.
    pub fn t() -> Self {
        Poly { coeffs: vec![0.0, 1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value at `t = 1`.
    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Poly { coeffs: Vec::new() };
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Multiply by `t`.
    pub fn shift(&self) -> Poly {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.coeffs);
        Poly { coeffs: c }
    }

    pub fn pow(&self, n: usize) -> Poly {
        let mut out = Poly::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// `(1 - alpha) + alpha * self`: the pgf of a binomially thinned child block.
    pub fn affine_thin(&self, alpha: f64) -> Result<Poly> {
        check_alpha(alpha)?;
        let mut c: Vec<f64> = self.coeffs.iter().map(|&x| alpha * x).collect();
        if c.is_empty() {
            c.push(0.0);
        }
        c[0] += 1.0 - alpha;
        Ok(Poly::new(c))
    }

    /// Coefficients as a pmf: entries in `[-1e-15, 0)` are clamped to zero,
    /// anything more negative is an error.
    pub fn nonnegative_coeffs(&self) -> Result<Vec<f64>> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value < -1e-15 {
                    Err(Error::NegativeCoefficient { index, value })
                } else {
                    Ok(value.max(0.0))
                }
            })
            .collect()
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        Poly::mul(self, rhs)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(())
}

/// k-fold composition in `y` of `y -> t (1 - alpha + alpha y)^chi`,
/// with the zero-fold composition fixed to `t`.
pub fn psi(y: &Poly, alpha: f64, chi: usize, k: usize) -> Result<Poly> {
    check_alpha(alpha)?;
    if k == 0 {
        return Ok(Poly::t());
    }
    let mut cur = y.clone();
    for _ in 0..k {
        cur = cur.affine_thin(alpha)?.pow(chi).shift();
    }
    Ok(cur)
}

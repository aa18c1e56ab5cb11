//! The Poisson tree MRF: propagation pgfs, the aggregate distribution,
//! risk allocations and closeness indices.
//!
//! Under a rooting `r`, every vertex `v` emits `L_v ~ Poisson(lambda (1 - alpha_(pa(v), v)))`
//! fresh events (the root uses weight 1), each of which spreads down the
//! tree by binomial thinning along every edge. `eta_v(t)` is the pgf of the
//! number of vertices reached by a single event born at `v`, so the sum `M`
//! is compound Poisson:
//!
//! ```text
//! P_M(t) = exp( lambda * sum_v w_v (eta_v(t) - 1) ),   w_v = 1 - alpha_(pa(v), v)
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{check_kappa, DiscreteDist};
use crate::error::{Error, Result};
use crate::poly::{check_alpha, Poly};
use crate::tree::{Tree, TreeJson};

/// Default pmf truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Largest compound rate accepted before `exp(-rate)` loses all precision.
const MAX_RATE: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MpmrfModel {
    tree: Tree,
    lambda: f64,
    /// Aligned with `tree.edges()`.
    alpha: Vec<f64>,
}

impl MpmrfModel {
    pub fn new(tree: Tree, lambda: f64, alpha: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("lambda = {lambda} must be positive")));
        }
        if alpha.len() != tree.edges().len() {
            return Err(Error::Parameter(format!(
                "{} dependence parameters for {} edges",
                alpha.len(),
                tree.edges().len()
            )));
        }
        for &a in &alpha {
            check_alpha(a)?;
        }
        Ok(MpmrfModel { tree, lambda, alpha })
    }

    /// Same `alpha` on every edge.
    pub fn homogeneous(tree: Tree, lambda: f64, alpha: f64) -> Result<Self> {
        let n = tree.edges().len();
        MpmrfModel::new(tree, lambda, vec![alpha; n])
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn d(&self) -> usize {
        self.tree.d()
    }

    /// Dependence parameter of edge `(a, b)`.
    pub fn alpha(&self, a: usize, b: usize) -> Result<f64> {
        let key = (a.min(b), a.max(b));
        self.tree
            .edges()
            .binary_search(&key)
            .map(|i| self.alpha[i])
            .map_err(|_| Error::NotAnEdge(a, b))
    }

    /// `Some(alpha)` when every edge carries the same parameter.
    pub fn common_alpha(&self) -> Option<f64> {
        match self.alpha.split_first() {
            None => Some(0.0),
            Some((&first, rest)) => rest.iter().all(|&a| a == first).then_some(first),
        }
    }

    /// `eta_v(t)` for every vertex under the rooting at `root`, indexed by `v - 1`.
    pub fn eta_polys(&self, root: usize) -> Result<Vec<Poly>> {
        eta_polys(&self.tree, root, |a, b| self.alpha(a, b).expect("tree edge"))
    }

    /// Distribution of the number of vertices reached by an event born at `root`.
    pub fn h_dist(&self, root: usize) -> Result<DiscreteDist> {
        let etas = self.eta_polys(root)?;
        DiscreteDist::from_pgf(&etas[root - 1])
    }

    pub fn h_pgf(&self, root: usize) -> Result<Poly> {
        Ok(self.eta_polys(root)?.swap_remove(root - 1))
    }

    /// `c_k = lambda * sum_v w_v P(H_v = k)` under the rooting at `root`; the
    /// compound pgf is `exp(sum_k c_k (t^k - 1))`.
    pub fn compound_rates(&self, root: usize) -> Result<Vec<f64>> {
        let etas = self.eta_polys(root)?;
        let rooted = self.tree.root_at(root)?;
        let mut rates = vec![0.0; self.d() + 1];
        for v in 1..=self.d() {
            let w = match rooted.parent(v) {
                Some(p) => 1.0 - self.alpha(p, v)?,
                None => 1.0,
            };
            for (k, &c) in etas[v - 1].coeffs().iter().enumerate() {
                rates[k] += self.lambda * w * c;
            }
        }
        Ok(rates)
    }

    /// Pmf of `M` by Panjer recursion, with vertex 1 as the internal root.
    pub fn aggregate_dist(&self, tol: f64) -> Result<DiscreteDist> {
        self.aggregate_dist_rooted(1, tol)
    }

    /// Pmf of `M` computed with the given internal root; the result does not
    /// depend on the choice beyond rounding.
    pub fn aggregate_dist_rooted(&self, root: usize, tol: f64) -> Result<DiscreteDist> {
        check_tol(tol)?;
        let rates = self.compound_rates(root)?;
        let total_rate: f64 = rates.iter().sum();
        if total_rate > MAX_RATE {
            return Err(Error::Numerical(format!("compound rate {total_rate} too large")));
        }
        let d = self.d() as f64;
        let mean = d * self.lambda;
        let mut k_max = (mean + 10.0 * (mean * d).sqrt()).ceil() as usize;
        while chernoff_tail(&rates, k_max) >= tol {
            k_max *= 2;
        }
        let pmf = panjer(&rates, k_max);
        let tail = (1.0 - pmf.iter().sum::<f64>()).max(0.0);
        DiscreteDist::new(pmf, tail)
    }

    /// `Cov(N_v, M) = lambda * sum_j prod_{e in path(v, j)} alpha_e`.
    pub fn cov_with_sum(&self, v: usize) -> Result<f64> {
        let rooted = self.tree.root_at(v)?;
        let mut weight = vec![0.0; self.d()];
        weight[v - 1] = 1.0;
        for &x in rooted.preorder() {
            for &c in rooted.children(x) {
                weight[c - 1] = weight[x - 1] * self.alpha(x, c)?;
            }
        }
        Ok(self.lambda * weight.iter().sum::<f64>())
    }

    /// `E[N_v 1{M = k}]` for `k` over the support of the aggregate pmf.
    pub fn expected_allocation(&self, v: usize, tol: f64) -> Result<AllocationTable> {
        let agg = self.aggregate_dist(tol)?;
        self.allocation_with(&agg, v)
    }

    /// Allocation table against a precomputed aggregate pmf: the coefficients
    /// of `lambda * eta_v^{(v)}(t) * P_M(t)`.
    pub fn allocation_with(&self, agg: &DiscreteDist, v: usize) -> Result<AllocationTable> {
        let h = self.h_pgf(v)?;
        let pm = agg.pmf();
        let by_k = (0..pm.len())
            .map(|k| {
                let top = k.min(h.degree());
                self.lambda * (0..=top).map(|j| h.coeff(j) * pm[k - j]).sum::<f64>()
            })
            .collect();
        Ok(AllocationTable { vertex: v, by_k })
    }

    /// Euler contribution of `N_v` to `TVaR_kappa(M)`.
    pub fn tvar_contribution(&self, v: usize, kappa: f64, tol: f64) -> Result<f64> {
        check_kappa(kappa)?;
        let agg = self.aggregate_dist(tol)?;
        let table = self.allocation_with(&agg, v)?;
        tvar_contribution_with(self.lambda, &agg, &table, kappa)
    }

    /// Same as [`MpmrfModel::tvar_contribution`] from a precomputed pmf and table.
    pub fn tvar_contribution_from(&self, agg: &DiscreteDist, table: &AllocationTable, kappa: f64) -> Result<f64> {
        tvar_contribution_with(self.lambda, agg, table, kappa)
    }

    /// Freeman closeness and its exponential transform for every vertex.
    /// The transform needs one common `alpha`.
    pub fn closeness_indices(&self) -> Result<Vec<Closeness>> {
        let alpha = self.common_alpha().ok_or_else(|| {
            Error::Parameter("exponential closeness needs the same alpha on every edge".into())
        })?;
        Ok(self
            .tree
            .distances()
            .into_iter()
            .map(|row| Closeness {
                freeman: row.iter().sum::<usize>() as f64,
                exp_transform: row.iter().map(|&n| alpha.powi(n as i32)).sum(),
            })
            .collect())
    }

    pub fn to_json(&self) -> ModelJson {
        let alpha = match self.common_alpha() {
            Some(a) => AlphaValue::Scalar(a),
            None => AlphaValue::PerEdge(
                self.tree
                    .edges()
                    .iter()
                    .zip(&self.alpha)
                    .map(|(&(a, b), &x)| (format!("{a}-{b}"), x))
                    .collect(),
            ),
        };
        let TreeJson { d, edges } = self.tree.to_json();
        ModelJson { d, edges, lambda: self.lambda, alpha }
    }
}

/// `eta_v(t)` for every vertex of `tree` rooted at `root`:
/// `eta_v = t * prod_{c in ch(v)} (1 - alpha_(v,c) + alpha_(v,c) eta_c)`.
pub fn eta_polys(tree: &Tree, root: usize, alpha: impl Fn(usize, usize) -> f64) -> Result<Vec<Poly>> {
    let rooted = tree.root_at(root)?;
    let mut etas = vec![Poly::one(); tree.d()];
    for &v in rooted.preorder().iter().rev() {
        let mut acc = Poly::t();
        for &c in rooted.children(v) {
            acc = acc.mul(&etas[c - 1].affine_thin(alpha(v, c))?);
        }
        etas[v - 1] = acc;
    }
    Ok(etas)
}

/// Pgf of `H_root` on a tree with one common `alpha`.
pub fn h_pgf_homogeneous(tree: &Tree, root: usize, alpha: f64) -> Result<Poly> {
    check_alpha(alpha)?;
    Ok(eta_polys(tree, root, |_, _| alpha)?.swap_remove(root - 1))
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::Parameter(format!("tol = {tol} outside (0, 1e-3]")));
    }
    Ok(())
}

/// Poisson-compound recursion `g_k = (1/k) sum_j j c_j g_{k-j}`, `g_0 = exp(-sum c)`.
fn panjer(rates: &[f64], k_max: usize) -> Vec<f64> {
    let total: f64 = rates.iter().sum::<f64>() - rates[0];
    let mut g = Vec::with_capacity(k_max + 1);
    g.push((-total).exp());
    for k in 1..=k_max {
        let top = k.min(rates.len() - 1);
        let s: f64 = (1..=top).map(|j| j as f64 * rates[j] * g[k - j]).sum();
        g.push(s / k as f64);
    }
    g
}

/// Chernoff bound `inf_{s > 1} P_M(s) / s^(k+1)` on `P(M > k)`.
fn chernoff_tail(rates: &[f64], k: usize) -> f64 {
    let log_bound = |x: f64| -> f64 {
        let log_pgf: f64 = rates.iter().enumerate().skip(1).map(|(j, &c)| c * ((j as f64 * x).exp() - 1.0)).sum();
        log_pgf - (k as f64 + 1.0) * x
    };
    // convex in x = ln s
    let (mut lo, mut hi) = (0.0f64, ((k as f64) + 2.0).ln().max(1.0));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if log_bound(m1) < log_bound(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    log_bound(0.5 * (lo + hi)).exp().min(1.0)
}

fn tvar_contribution_with(
    lambda: f64,
    agg: &DiscreteDist,
    table: &AllocationTable,
    kappa: f64,
) -> Result<f64> {
    check_kappa(kappa)?;
    let q = agg.value_at_risk(kappa)?;
    let cum: f64 = table.by_k[..=q].iter().sum();
    let p_q = agg.p(q);
    let atom = if p_q > 0.0 { (agg.cdf(q) - kappa) / p_q * table.by_k[q] } else { 0.0 };
    Ok((lambda - cum + atom) / (1.0 - kappa))
}

/// `by_k[k] = E[N_v 1{M = k}]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationTable {
    pub vertex: usize,
    pub by_k: Vec<f64>,
}

impl AllocationTable {
    /// `E[N_v 1{M <= k}]`.
    pub fn cumulative(&self, k: usize) -> f64 {
        self.by_k[..=k.min(self.by_k.len() - 1)].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.by_k.iter().sum()
    }

    /// `E[N_v | M = k]`, `None` where `P(M = k) = 0`.
    pub fn conditional_mean(&self, agg: &DiscreteDist, k: usize) -> Option<f64> {
        let p = agg.p(k);
        (p > 0.0).then(|| self.by_k.get(k).copied().unwrap_or(0.0) / p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closeness {
    pub freeman: f64,
    pub exp_transform: f64,
}

/// Scalar or per-edge (`"u-v"` keyed) dependence parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaValue {
    Scalar(f64),
    PerEdge(BTreeMap<String, f64>),
}

/// Model file: `{"d": 3, "edges": [[1,2],[2,3]], "lambda": 1.0, "alpha": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub d: usize,
    pub edges: Vec<[usize; 2]>,
    pub lambda: f64,
    pub alpha: AlphaValue,
}

impl TryFrom<ModelJson> for MpmrfModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        let tree = Tree::try_from(TreeJson { d: j.d, edges: j.edges })?;
        let alpha = match j.alpha {
            AlphaValue::Scalar(a) => vec![a; tree.edges().len()],
            AlphaValue::PerEdge(map) => {
                let mut out = vec![None; tree.edges().len()];
                for (key, value) in map {
                    let (a, b) = parse_edge_key(&key)?;
                    let idx = tree
                        .edges()
                        .binary_search(&(a.min(b), a.max(b)))
                        .map_err(|_| Error::NotAnEdge(a, b))?;
                    if out[idx].replace(value).is_some() {
                        return Err(Error::Parameter(format!("edge {key} given twice")));
                    }
                }
                out.into_iter()
                    .zip(tree.edges())
                    .map(|(x, &(a, b))| x.ok_or_else(|| Error::Parameter(format!("missing alpha for edge {a}-{b}"))))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        MpmrfModel::new(tree, j.lambda, alpha)
    }
}

fn parse_edge_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parameter(format!("edge key {key:?} is not of the form \"u-v\""));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

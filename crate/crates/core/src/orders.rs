//! Stochastic-order criteria between vertices and between tree shapes.
//!
//! Every criterion here is sufficient only. An `Incomparable` verdict means
//! the criterion is inconclusive, not that the two objects are unordered.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::model::{h_pgf_homogeneous, MpmrfModel};
use crate::tree::Tree;

/// Default tolerance for cdf and stop-loss comparisons.
pub const DEFAULT_ORDER_TOL: f64 = 1e-12;

/// Means must agree this closely before convex order is tested.
pub const MEAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "LE")]
    Le,
    #[serde(rename = "GE")]
    Ge,
    #[serde(rename = "EQ")]
    Eq,
    #[serde(rename = "INCOMPARABLE")]
    Incomparable,
}

impl Relation {
    pub fn flip(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            r => r,
        }
    }

    fn from_flags(le: bool, ge: bool) -> Relation {
        match (le, ge) {
            (true, true) => Relation::Eq,
            (true, false) => Relation::Le,
            (false, true) => Relation::Ge,
            (false, false) => Relation::Incomparable,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "LE",
            Relation::Ge => "GE",
            Relation::Eq => "EQ",
            Relation::Incomparable => "INCOMPARABLE",
        })
    }
}

/// Points where each direction of dominance fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// First `k` refuting `a <= b`.
    pub le_fails_at: usize,
    /// First `k` refuting `a >= b`.
    pub ge_fails_at: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub witness: Option<Witness>,
}

impl OrderVerdict {
    fn from_failures(le_fail: Option<usize>, ge_fail: Option<usize>) -> Self {
        let relation = Relation::from_flags(le_fail.is_none(), ge_fail.is_none());
        let witness = match (le_fail, ge_fail) {
            (Some(le_fails_at), Some(ge_fails_at)) => Some(Witness { le_fails_at, ge_fails_at }),
            _ => None,
        };
        OrderVerdict { relation, witness }
    }

    pub fn flip(self) -> Self {
        OrderVerdict {
            relation: self.relation.flip(),
            witness: self.witness.map(|w| Witness { le_fails_at: w.ge_fails_at, ge_fails_at: w.le_fails_at }),
        }
    }

    /// Certifies `a <= b` (including equality).
    pub fn is_le(&self) -> bool {
        matches!(self.relation, Relation::Le | Relation::Eq)
    }

    pub fn is_ge(&self) -> bool {
        matches!(self.relation, Relation::Ge | Relation::Eq)
    }
}

/// Usual stochastic order: `a <= b` iff `F_a(k) >= F_b(k) - tol` for every `k`.
pub fn st_compare(a: &DiscreteDist, b: &DiscreteDist, tol: f64) -> OrderVerdict {
    let n = a.pmf().len().max(b.pmf().len());
    let (mut fa, mut fb) = (0.0, 0.0);
    let (mut le_fail, mut ge_fail) = (None, None);
    for k in 0..n {
        fa += a.p(k);
        fb += b.p(k);
        if le_fail.is_none() && fa < fb - tol {
            le_fail = Some(k);
        }
        if ge_fail.is_none() && fb < fa - tol {
            ge_fail = Some(k);
        }
    }
    OrderVerdict::from_failures(le_fail, ge_fail)
}

/// `Le` certifies that `N_v` is less contributing to the sum than `N_w`.
pub fn synecdochic_compare(model: &MpmrfModel, v: usize, w: usize) -> Result<OrderVerdict> {
    if v == w {
        return Err(Error::Parameter("synecdochic comparison needs two distinct vertices".into()));
    }
    let hv = model.h_dist(v)?;
    let hw = model.h_dist(w)?;
    Ok(st_compare(&hv, &hw, DEFAULT_ORDER_TOL))
}

/// A single re-anchoring: `t1` holds edge `(u, v)`, `t2` holds `(u, w)` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SingleMove {
    pub u: usize,
    pub v: usize,
    pub w: usize,
}

/// Identify `u`, `v`, `w` with `E1 \ {(u,v)} = E2 \ {(u,w)}`.
pub fn single_move(t1: &Tree, t2: &Tree) -> Result<SingleMove> {
    if t1.d() != t2.d() {
        return Err(Error::NotSingleMove(format!("vertex counts {} and {}", t1.d(), t2.d())));
    }
    let only1: Vec<_> = t1.edges().iter().filter(|e| !t2.has_edge(e.0, e.1)).copied().collect();
    let only2: Vec<_> = t2.edges().iter().filter(|e| !t1.has_edge(e.0, e.1)).copied().collect();
    match (only1.as_slice(), only2.as_slice()) {
        ([], []) => Err(Error::NotSingleMove("trees are identical".into())),
        ([(a, b)], [(c, e)]) => {
            let shared: Vec<usize> = [*a, *b].into_iter().filter(|x| x == c || x == e).collect();
            match shared.as_slice() {
                [u] => {
                    let u = *u;
                    let v = if *a == u { *b } else { *a };
                    let w = if *c == u { *e } else { *c };
                    Ok(SingleMove { u, v, w })
                }
                _ => Err(Error::NotSingleMove("the two differing edges share no vertex".into())),
            }
        }
        _ => Err(Error::NotSingleMove(format!("{} edges differ", only1.len() + only2.len()))),
    }
}

/// Residual-tree criterion for a single move: `Le` certifies `M1 <=_cx M2`.
pub fn shape_compare(t1: &Tree, t2: &Tree, alpha: f64, lambda: f64) -> Result<OrderVerdict> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda = {lambda} must be positive")));
    }
    let mv = single_move(t1, t2)?;
    let (hv, hw) = residual_h_pair(t1, mv, alpha)?;
    Ok(st_compare(&hv, &hw, DEFAULT_ORDER_TOL))
}

/// `(H_v, H_w)` on the residual tree left after pruning the `u` side.
pub fn residual_h_pair(t1: &Tree, mv: SingleMove, alpha: f64) -> Result<(DiscreteDist, DiscreteDist)> {
    let (residual, _) = t1.prune(mv.u, mv.v)?;
    let local = |x: usize| {
        residual
            .local(x)
            .ok_or_else(|| Error::NotSingleMove(format!("vertex {x} is not in the residual tree")))
    };
    let (lv, lw) = (local(mv.v)?, local(mv.w)?);
    let hv = DiscreteDist::from_pgf(&h_pgf_homogeneous(&residual.tree, lv, alpha)?)?;
    let hw = DiscreteDist::from_pgf(&h_pgf_homogeneous(&residual.tree, lw, alpha)?)?;
    Ok((hv, hw))
}

/// Convex order via equal means and stop-loss dominance at every retention.
pub fn cx_check_empirical(m1: &DiscreteDist, m2: &DiscreteDist, tol: f64) -> Result<OrderVerdict> {
    let (a, b) = (m1.mean(), m2.mean());
    if (a - b).abs() >= tol.max(MEAN_TOL) {
        return Err(Error::MeansDiffer(a, b));
    }
    let n = m1.pmf().len().max(m2.pmf().len());
    let sl1 = stop_loss_curve(m1, n);
    let sl2 = stop_loss_curve(m2, n);
    let le_fail = (0..n).find(|&c| sl1[c] > sl2[c] + tol);
    let ge_fail = (0..n).find(|&c| sl2[c] > sl1[c] + tol);
    Ok(OrderVerdict::from_failures(le_fail, ge_fail))
}

/// `pi(c) = E[(X - c)_+]` for `c < n`, by `pi(c) = pi(c + 1) + P(X > c)`.
fn stop_loss_curve(dist: &DiscreteDist, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut survival = 0.0;
    let mut acc = 0.0;
    for c in (0..n).rev() {
        acc += survival;
        out[c] = acc;
        survival += dist.p(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        let a = DiscreteDist::point_mass(1);
        let b = DiscreteDist::point_mass(2);
        assert_eq!(st_compare(&a, &b, 1e-12).relation, Relation::Le);
        assert_eq!(st_compare(&b, &a, 1e-12).relation, Relation::Ge);
        assert_eq!(st_compare(&a, &a, 1e-12).relation, Relation::Eq);
    }

    #[test]
    fn crossing_cdfs_give_witnesses() {
        let a = DiscreteDist::new(vec![0.5, 0.0, 0.5], 0.0).unwrap();
        let b = DiscreteDist::point_mass(1);
        let v = st_compare(&a, &b, 1e-12);
        assert_eq!(v.relation, Relation::Incomparable);
        assert_eq!(v.witness, Some(Witness { le_fails_at: 1, ge_fails_at: 0 }));
        assert_eq!(v.flip().witness, Some(Witness { le_fails_at: 0, ge_fails_at: 1 }));
    }

    #[test]
    fn stop_loss_curve_matches_direct_sum() {
        let d = DiscreteDist::new(vec![0.1, 0.2, 0.3, 0.4], 0.0).unwrap();
        let curve = stop_loss_curve(&d, 6);
        for (c, &v) in curve.iter().enumerate() {
            assert!((v - d.stop_loss(c)).abs() < 1e-15);
        }
    }

    #[test]
    fn convex_order_poisson_vs_scaled() {
        let n = 60;
        let mut p2 = vec![(-2.0f64).exp()];
        let mut p1 = vec![(-1.0f64).exp()];
        for k in 1..n {
            p2.push(p2[k - 1] * 2.0 / k as f64);
            p1.push(p1[k - 1] / k as f64);
        }
        let mut scaled = vec![0.0; 2 * n];
        for (k, &p) in p1.iter().enumerate() {
            scaled[2 * k] = p;
        }
        let a = DiscreteDist::new(p2, 0.0).unwrap();
        let b = DiscreteDist::new(scaled, 0.0).unwrap();
        assert_eq!(cx_check_empirical(&a, &b, 1e-12).unwrap().relation, Relation::Le);
        assert_eq!(cx_check_empirical(&a, &a, 1e-12).unwrap().relation, Relation::Eq);
        let c = DiscreteDist::point_mass(3);
        assert!(matches!(cx_check_empirical(&a, &c, 1e-12), Err(Error::MeansDiffer(..))));
    }

    #[test]
    fn detects_single_moves() {
        let t1 = Tree::star(4);
        let t2 = Tree::new(4, [(1, 2), (2, 3), (1, 4)]).unwrap();
        assert_eq!(single_move(&t1, &t2).unwrap(), SingleMove { u: 3, v: 1, w: 2 });
        assert!(single_move(&t1, &t1).is_err());
        let far = Tree::new(4, [(2, 3), (3, 4), (4, 1)]).unwrap();
        assert!(single_move(&t1, &far).is_err());
        assert!(shape_compare(&t1, &t2, 0.5, 0.0).is_err());
    }
}

//! The tree-shape poset: all `d`-vertex shapes, arcs certified by the
//! residual-tree criterion on single re-anchoring moves, transitive closure
//! and Hasse reduction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MpmrfModel, DEFAULT_TOL};
use crate::orders::{residual_h_pair, st_compare, Relation, SingleMove, DEFAULT_ORDER_TOL};
use crate::tree::{enumerate_shapes, ShapeCode, Tree};

/// Validated range of `d` for [`build_poset`].
pub const POSET_D_RANGE: std::ops::RangeInclusive<usize> = 4..=9;

/// `{0.05, 0.1, 0.2, ..., 0.9, 0.95}`.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid = vec![0.05];
    grid.extend((1..=9).map(|i| i as f64 / 10.0));
    grid.push(0.95);
    grid
}

/// A tree reachable by detaching the `u` side of edge `(u, v)` and joining `u` to `w`.
#[derive(Debug, Clone)]
pub struct Neighbor {
    pub tree: Tree,
    pub mv: SingleMove,
}

/// Every single move out of `tree`, one per resulting shape.
pub fn single_move_neighbors(tree: &Tree) -> Vec<Neighbor> {
    let mut seen = BTreeMap::new();
    for n in all_moves(tree) {
        seen.entry(n.tree.canonical_code()).or_insert(n);
    }
    seen.into_values().collect()
}

/// Every single move, realizations with equal resulting shape included.
pub fn all_moves(tree: &Tree) -> Vec<Neighbor> {
    let mut out = Vec::new();
    for &(a, b) in tree.edges() {
        for (u, v) in [(a, b), (b, a)] {
            let detached = tree.component_without(u, v);
            for w in 1..=tree.d() {
                if w == v || detached.binary_search(&w).is_ok() {
                    continue;
                }
                let t2 = tree.reanchor(u, v, w).expect("re-anchoring into the residual keeps a tree");
                out.push(Neighbor { tree: t2, mv: SingleMove { u, v, w } });
            }
        }
    }
    out
}

/// A single move whose criterion verdict changed across the alpha grid.
#[derive(Debug, Clone, Serialize)]
pub struct Flag {
    pub from: usize,
    pub to: usize,
    pub u: usize,
    pub v: usize,
    pub w: usize,
    pub relations: Vec<Relation>,
}

/// Outcome for an unordered pair of shapes linked by at least one single move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairStatus {
    /// `lower <= upper` certified at every grid point by some move.
    Certified { lower: usize, upper: usize },
    /// No move certifies either direction at every grid point.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct ShapePoset {
    pub d: usize,
    pub lambda: f64,
    pub shapes: Vec<ShapeCode>,
    pub trees: Vec<Tree>,
    /// Reflexive transitive closure: `relation[i][j]` means shape `i <= j`.
    pub relation: Vec<Vec<bool>>,
    /// Covering pairs `(lower, upper)`.
    pub hasse: Vec<(usize, usize)>,
    pub alpha_grid: Vec<f64>,
    pub flags: Vec<Flag>,
    /// Keyed by `(min index, max index)`.
    pub move_pairs: BTreeMap<(usize, usize), PairStatus>,
}

struct MoveResult {
    from: usize,
    to: usize,
    mv: SingleMove,
    relations: Vec<Relation>,
}

/// Build the poset of `d`-vertex shapes.
pub fn build_poset(d: usize, alpha_grid: &[f64], lambda: f64) -> Result<ShapePoset> {
    if !POSET_D_RANGE.contains(&d) {
        return Err(Error::Parameter(format!("d = {d} outside the validated range 4..=9")));
    }
    if alpha_grid.is_empty() {
        return Err(Error::Parameter("empty alpha grid".into()));
    }
    if let Some(a) = alpha_grid.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Parameter(format!("grid value {a} outside (0, 1)")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda = {lambda} must be positive")));
    }
    let trees = enumerate_shapes(d)?;
    let shapes: Vec<ShapeCode> = trees.iter().map(Tree::canonical_code).collect();
    let index: BTreeMap<&ShapeCode, usize> = shapes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let n = trees.len();

    let results: Vec<Vec<MoveResult>> = trees
        .par_iter()
        .enumerate()
        .map(|(from, tree)| {
            all_moves(tree)
                .into_iter()
                .map(|nb| {
                    let to = index[&nb.tree.canonical_code()];
                    let relations = alpha_grid
                        .iter()
                        .map(|&a| {
                            let (hv, hw) = residual_h_pair(tree, nb.mv, a)?;
                            Ok(st_compare(&hv, &hw, DEFAULT_ORDER_TOL).relation)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(MoveResult { from, to, mv: nb.mv, relations })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut relation = vec![vec![false; n]; n];
    for (i, row) in relation.iter_mut().enumerate() {
        row[i] = true;
    }
    let mut flags = Vec::new();
    let mut move_pairs: BTreeMap<(usize, usize), PairStatus> = BTreeMap::new();
    for r in results.into_iter().flatten() {
        if r.from == r.to {
            continue;
        }
        let key = (r.from.min(r.to), r.from.max(r.to));
        let all_le = r.relations.iter().all(|x| matches!(x, Relation::Le | Relation::Eq));
        let all_ge = r.relations.iter().all(|x| matches!(x, Relation::Ge | Relation::Eq));
        if r.relations.windows(2).any(|w| w[0] != w[1]) {
            flags.push(Flag { from: r.from, to: r.to, u: r.mv.u, v: r.mv.v, w: r.mv.w, relations: r.relations });
        }
        let certified = match (all_le, all_ge) {
            (true, true) => {
                return Err(Error::Antisymmetry(shapes[r.from].to_hex(), shapes[r.to].to_hex()));
            }
            (true, false) => Some((r.from, r.to)),
            (false, true) => Some((r.to, r.from)),
            (false, false) => None,
        };
        let entry = move_pairs.entry(key).or_insert(PairStatus::Inconclusive);
        if let Some((lower, upper)) = certified {
            relation[lower][upper] = true;
            if let PairStatus::Certified { lower: l0, .. } = *entry {
                if l0 != lower {
                    return Err(Error::Antisymmetry(shapes[lower].to_hex(), shapes[upper].to_hex()));
                }
            }
            *entry = PairStatus::Certified { lower, upper };
        }
    }

    transitive_closure(&mut relation);
    for i in 0..n {
        for j in (i + 1)..n {
            if relation[i][j] && relation[j][i] {
                return Err(Error::Antisymmetry(shapes[i].to_hex(), shapes[j].to_hex()));
            }
        }
    }
    check_distinct_aggregates(&trees, &shapes, lambda)?;
    let hasse = transitive_reduction(&relation);

    Ok(ShapePoset {
        d,
        lambda,
        shapes,
        trees,
        relation,
        hasse,
        alpha_grid: alpha_grid.to_vec(),
        flags,
        move_pairs,
    })
}

fn transitive_closure(rel: &mut [Vec<bool>]) {
    let n = rel.len();
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Covering pairs of a reflexive, transitive, antisymmetric relation.
pub fn transitive_reduction(rel: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = rel.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !rel[i][j] {
                continue;
            }
            let shortcut = (0..n).any(|k| k != i && k != j && rel[i][k] && rel[k][j]);
            if !shortcut {
                out.push((i, j));
            }
        }
    }
    out
}

/// No two shapes may share an aggregate distribution at alpha = 0.5.
fn check_distinct_aggregates(trees: &[Tree], shapes: &[ShapeCode], lambda: f64) -> Result<()> {
    let aggs = trees
        .iter()
        .map(|t| MpmrfModel::homogeneous(t.clone(), lambda, 0.5)?.aggregate_dist(DEFAULT_TOL))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..aggs.len() {
        for j in (i + 1)..aggs.len() {
            let n = aggs[i].pmf().len().max(aggs[j].pmf().len());
            let gap = (0..n).map(|k| (aggs[i].p(k) - aggs[j].p(k)).abs()).fold(0.0, f64::max);
            if gap < 1e-12 {
                return Err(Error::Antisymmetry(shapes[i].to_hex(), shapes[j].to_hex()));
            }
        }
    }
    Ok(())
}

/// Shapes with more than one minimal upper bound or maximal lower bound.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LatticeReport {
    pub multiple_suprema: Vec<(usize, usize)>,
    pub multiple_infima: Vec<(usize, usize)>,
    pub missing_bounds: Vec<(usize, usize)>,
}

impl LatticeReport {
    pub fn is_lattice(&self) -> bool {
        self.multiple_suprema.is_empty() && self.multiple_infima.is_empty() && self.missing_bounds.is_empty()
    }
}

impl ShapePoset {
    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn index_of(&self, tree: &Tree) -> Option<usize> {
        let code = tree.canonical_code();
        self.shapes.iter().position(|c| *c == code)
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.relation[i][j]
    }

    /// Relation between two trees of this poset's size, by shape lookup.
    pub fn compare(&self, t1: &Tree, t2: &Tree) -> Result<Relation> {
        let find = |t: &Tree| {
            self.index_of(t)
                .ok_or_else(|| Error::Parameter(format!("tree with {} vertices is not in the d = {} poset", t.d(), self.d)))
        };
        let (i, j) = (find(t1)?, find(t2)?);
        Ok(match (self.le(i, j), self.le(j, i)) {
            (true, true) => Relation::Eq,
            (true, false) => Relation::Le,
            (false, true) => Relation::Ge,
            (false, false) => Relation::Incomparable,
        })
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| (0..self.len()).all(|j| j == i || !self.le(j, i))).collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| (0..self.len()).all(|j| j == i || !self.le(i, j))).collect()
    }

    /// Shape pairs linked by a single move that no move certifies.
    pub fn inconclusive_pairs(&self) -> Vec<(usize, usize)> {
        self.move_pairs
            .iter()
            .filter(|(_, s)| **s == PairStatus::Inconclusive)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn lattice_report(&self) -> LatticeReport {
        let n = self.len();
        let mut report = LatticeReport::default();
        for i in 0..n {
            for j in (i + 1)..n {
                let upper: Vec<usize> = (0..n).filter(|&k| self.le(i, k) && self.le(j, k)).collect();
                let lower: Vec<usize> = (0..n).filter(|&k| self.le(k, i) && self.le(k, j)).collect();
                let sup = upper.iter().filter(|&&k| upper.iter().all(|&m| m == k || !self.le(m, k))).count();
                let inf = lower.iter().filter(|&&k| lower.iter().all(|&m| m == k || !self.le(k, m))).count();
                if sup == 0 || inf == 0 {
                    report.missing_bounds.push((i, j));
                }
                if sup > 1 {
                    report.multiple_suprema.push((i, j));
                }
                if inf > 1 {
                    report.multiple_infima.push((i, j));
                }
            }
        }
        report
    }

    /// Graphviz digraph, lower shapes at the bottom.
    pub fn hasse_dot(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph shapes_d{} {{", self.d);
        s.push_str("  rankdir=BT;\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, (code, tree)) in self.shapes.iter().zip(&self.trees).enumerate() {
            let edges: Vec<String> = tree.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
            let _ = writeln!(s, "  n{i} [label=\"{code}\", tooltip=\"{}\"];", edges.join(" "));
        }
        for &(lo, hi) in &self.hasse {
            let _ = writeln!(s, "  n{lo} -> n{hi};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> PosetJson {
        PosetJson {
            d: self.d,
            lambda: self.lambda,
            alpha_grid: self.alpha_grid.clone(),
            shapes: self.shapes.iter().map(ShapeCode::to_hex).collect(),
            hasse: self.hasse.iter().map(|&(a, b)| [a, b]).collect(),
            flags: self.flags.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PosetJson {
    pub d: usize,
    pub lambda: f64,
    pub alpha_grid: Vec<f64>,
    pub shapes: Vec<String>,
    pub hasse: Vec<[usize; 2]>,
    pub flags: Vec<Flag>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_neighbors_d4() {
        let nb = single_move_neighbors(&Tree::star(4));
        assert_eq!(nb.len(), 1);
        assert_eq!(nb[0].tree.canonical_code(), Tree::path(4).canonical_code());
    }

    #[test]
    fn path5_reaches_every_other_shape_but_star() {
        let codes: Vec<ShapeCode> =
            single_move_neighbors(&Tree::path(5)).iter().map(|n| n.tree.canonical_code()).collect();
        let chair = Tree::new(5, [(1, 2), (2, 3), (3, 4), (3, 5)]).unwrap().canonical_code();
        assert!(codes.contains(&chair));
        assert!(!codes.contains(&Tree::star(5).canonical_code()));
    }

    #[test]
    fn d4_is_a_chain() {
        let p = build_poset(4, &default_alpha_grid(), 1.0).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.hasse.len(), 1);
        assert_eq!(p.compare(&Tree::path(4), &Tree::star(4)).unwrap(), Relation::Le);
        let dot = p.hasse_dot();
        assert_eq!(dot.matches(" -> ").count(), 1);
        assert_eq!(dot.matches("[label=").count(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_poset(3, &default_alpha_grid(), 1.0).is_err());
        assert!(build_poset(10, &default_alpha_grid(), 1.0).is_err());
        assert!(build_poset(5, &[], 1.0).is_err());
        assert!(build_poset(5, &[0.0, 0.5], 1.0).is_err());
        assert!(build_poset(5, &[0.5], -1.0).is_err());
    }

    #[test]
    fn reduction_of_empty_relation() {
        let rel = vec![vec![true, false], vec![false, true]];
        assert!(transitive_reduction(&rel).is_empty());
    }
}

//! Vertex-labelled trees, rooted views, pruning and canonical shape codes.
//!
//! Vertices are labelled `1..=d`. Every tree is stored with a sorted,
//! normalised edge list `(min, max)` and a sorted adjacency list, so every
//! traversal below is deterministic.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected tree on the vertex set `{1, ..., d}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    d: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree(d={}, {:?})", self.d, self.edges)
    }
}

impl Tree {
    pub fn new(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidTree("a tree needs at least one vertex".into()));
        }
        let mut norm = Vec::with_capacity(d - 1);
        for (a, b) in edges {
            for x in [a, b] {
                if x == 0 || x > d {
                    return Err(Error::InvalidVertex { vertex: x, d });
                }
            }
            if a == b {
                return Err(Error::InvalidTree(format!("self-loop at {a}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTree("duplicate edge".into()));
        }
        if norm.len() != d - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges for {} vertices, expected {}",
                norm.len(),
                d,
                d - 1
            )));
        }
        let mut adj = vec![Vec::new(); d];
        for &(a, b) in &norm {
            adj[a - 1].push(b);
            adj[b - 1].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let tree = Tree { d, edges: norm, adj };
        // d-1 edges plus connectivity means acyclic.
        let reached = tree.bfs_order(1).len();
        if reached != d {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }
        Ok(tree)
    }

    /// Path `1 - 2 - ... - d`.
    pub fn path(d: usize) -> Self {
        Tree::new(d, (1..d).map(|i| (i, i + 1))).expect("path is a tree")
    }

    /// Star centred at vertex 1.
    pub fn star(d: usize) -> Self {
        Tree::new(d, (2..=d).map(|i| (1, i))).expect("star is a tree")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v - 1]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v - 1].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.d {
            Err(Error::InvalidVertex { vertex: v, d: self.d })
        } else {
            Ok(())
        }
    }

    fn bfs_order(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.d];
        let mut order = Vec::with_capacity(self.d);
        let mut queue = VecDeque::from([start]);
        seen[start - 1] = true;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &y in &self.adj[x - 1] {
                if !seen[y - 1] {
                    seen[y - 1] = true;
                    queue.push_back(y);
                }
            }
        }
        order
    }

    /// Rooted view of the tree at `r`.
    pub fn root_at(&self, r: usize) -> Result<RootedTree> {
        self.check_vertex(r)?;
        Ok(RootedTree::build(self, r))
    }

    /// Edge sequence walked from `u` to `w`, each edge oriented along the walk.
    pub fn path_between(&self, u: usize, w: usize) -> Result<Vec<(usize, usize)>> {
        self.check_vertex(u)?;
        self.check_vertex(w)?;
        let rooted = RootedTree::build(self, u);
        let mut rev = Vec::new();
        let mut x = w;
        while let Some(p) = rooted.parent(x) {
            rev.push((p, x));
            x = p;
        }
        rev.reverse();
        Ok(rev)
    }

    /// Number of edges between every pair of vertices, `dist[u-1][w-1]`.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        (1..=self.d)
            .map(|s| {
                let mut dist = vec![usize::MAX; self.d];
                dist[s - 1] = 0;
                for x in self.bfs_order(s) {
                    for &y in &self.adj[x - 1] {
                        if dist[y - 1] == usize::MAX {
                            dist[y - 1] = dist[x - 1] + 1;
                        }
                    }
                }
                dist
            })
            .collect()
    }

    /// Delete edge `(u, v)`; `detached` is the component holding `u`,
    /// `residual` the one holding `v`. Original labels are kept on both sides.
    pub fn prune(&self, u: usize, v: usize) -> Result<(Subtree, Subtree)> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !self.has_edge(u, v) {
            return Err(Error::NotAnEdge(u, v));
        }
        let side_u = self.component_without(u, v);
        let side_v: Vec<usize> = (1..=self.d).filter(|x| side_u.binary_search(x).is_err()).collect();
        Ok((self.induced(&side_v), self.induced(&side_u)))
    }

    /// Sorted vertex set reachable from `start` without crossing `(start, blocked)`.
    pub fn component_without(&self, start: usize, blocked: usize) -> Vec<usize> {
        let mut seen = vec![false; self.d];
        seen[start - 1] = true;
        seen[blocked - 1] = true;
        let mut stack = vec![start];
        let mut out = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x - 1] {
                if !seen[y - 1] {
                    seen[y - 1] = true;
                    out.push(y);
                    stack.push(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn induced(&self, labels: &[usize]) -> Subtree {
        let local = |x: usize| labels.binary_search(&x).ok().map(|i| i + 1);
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((local(a)?, local(b)?)))
            .collect();
        Subtree {
            tree: Tree::new(labels.len(), edges).expect("component of a tree is a tree"),
            labels: labels.to_vec(),
        }
    }

    /// Tree with edge `(u, v)` replaced by `(u, w)`.
    pub fn reanchor(&self, u: usize, v: usize, w: usize) -> Result<Tree> {
        if !self.has_edge(u, v) {
            return Err(Error::NotAnEdge(u, v));
        }
        let old = (u.min(v), u.max(v));
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&e| e != old)
            .chain(std::iter::once((u, w)));
        Tree::new(self.d, edges)
    }

    /// Tree with a new vertex `d + 1` joined to `v`.
    pub fn with_leaf(&self, v: usize) -> Result<Tree> {
        self.check_vertex(v)?;
        Tree::new(self.d + 1, self.edges.iter().copied().chain(std::iter::once((v, self.d + 1))))
    }

    /// Degrees sorted in decreasing order.
    pub fn degree_vector(&self) -> Vec<usize> {
        let mut deg: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        deg.sort_unstable_by(|a, b| b.cmp(a));
        deg
    }

    /// One or two central vertices (minimum eccentricity).
    pub fn centers(&self) -> Vec<usize> {
        if self.d <= 2 {
            return (1..=self.d).collect();
        }
        let mut deg: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut layer: Vec<usize> = (1..=self.d).filter(|&v| deg[v - 1] == 1).collect();
        let mut remaining = self.d;
        while remaining > 2 {
            remaining -= layer.len();
            let mut next = Vec::new();
            for &leaf in &layer {
                for &y in &self.adj[leaf - 1] {
                    deg[y - 1] -= 1;
                    if deg[y - 1] == 1 {
                        next.push(y);
                    }
                }
            }
            layer = next;
        }
        layer.sort_unstable();
        layer
    }

    /// Isomorphism-invariant code of the tree.
    pub fn canonical_code(&self) -> ShapeCode {
        let bits = self
            .centers()
            .into_iter()
            .map(|c| rooted_parens(self, c))
            .min()
            .expect("a tree has a center");
        ShapeCode::from_bits(&bits)
    }

    /// Same tree with labels permuted: vertex `v` becomes `perm[v-1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Tree> {
        if perm.len() != self.d {
            return Err(Error::Parameter("permutation length".into()));
        }
        Tree::new(self.d, self.edges.iter().map(|&(a, b)| (perm[a - 1], perm[b - 1])))
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson { d: self.d, edges: self.edges.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

/// Parenthesis encoding (true = open) of the tree rooted at `root`, with
/// children sorted by their own encodings.
fn rooted_parens(tree: &Tree, root: usize) -> Vec<bool> {
    let rooted = RootedTree::build(tree, root);
    let mut code: Vec<Vec<bool>> = vec![Vec::new(); tree.d()];
    for &v in rooted.preorder().iter().rev() {
        let mut kids: Vec<Vec<bool>> =
            rooted.children(v).iter().map(|&c| std::mem::take(&mut code[c - 1])).collect();
        kids.sort_unstable_by(|a, b| b.cmp(a));
        let mut s = Vec::with_capacity(2 * (1 + kids.iter().map(|k| k.len() / 2).sum::<usize>()));
        s.push(true);
        for k in kids {
            s.extend(k);
        }
        s.push(false);
        code[v - 1] = s;
    }
    std::mem::take(&mut code[root - 1])
}

/// JSON form `{"d": 6, "edges": [[1,2],[2,3],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TreeJson {
    pub d: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<TreeJson> for Tree {
    type Error = Error;
    fn try_from(j: TreeJson) -> Result<Tree> {
        Tree::new(j.d, j.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

/// A component obtained by pruning, with its original vertex labels.
/// `labels` is sorted; local vertex `i` carries label `labels[i - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtree {
    pub tree: Tree,
    pub labels: Vec<usize>,
}

impl Subtree {
    pub fn local(&self, label: usize) -> Option<usize> {
        self.labels.binary_search(&label).ok().map(|i| i + 1)
    }

    pub fn label(&self, local: usize) -> usize {
        self.labels[local - 1]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Edges in original labels.
    pub fn labelled_edges(&self) -> Vec<(usize, usize)> {
        self.tree.edges().iter().map(|&(a, b)| (self.label(a), self.label(b))).collect()
    }
}

/// A tree with a chosen root and its filial relations.
#[derive(Debug, Clone)]
pub struct RootedTree {
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
    dsc: Vec<Vec<usize>>,
}

impl RootedTree {
    fn build(tree: &Tree, root: usize) -> Self {
        let d = tree.d();
        let mut parent = vec![None; d];
        let mut children = vec![Vec::new(); d];
        let mut preorder = Vec::with_capacity(d);
        let mut stack = vec![root];
        let mut seen = vec![false; d];
        seen[root - 1] = true;
        while let Some(x) = stack.pop() {
            preorder.push(x);
            // neighbours are sorted; push in reverse so the smallest child is visited first
            for &y in tree.neighbors(x).iter().rev() {
                if !seen[y - 1] {
                    seen[y - 1] = true;
                    parent[y - 1] = Some(x);
                    stack.push(y);
                }
            }
        }
        for &x in &preorder {
            if let Some(p) = parent[x - 1] {
                children[p - 1].push(x);
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let mut dsc: Vec<Vec<usize>> = vec![Vec::new(); d];
        for &x in preorder.iter().rev() {
            let mut set: Vec<usize> = Vec::new();
            for &c in &children[x - 1] {
                set.push(c);
                set.extend_from_slice(&dsc[c - 1]);
            }
            set.sort_unstable();
            dsc[x - 1] = set;
        }
        RootedTree { root, parent, children, preorder, dsc }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v - 1]
    }

    /// Children of `v`, ascending.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v - 1]
    }

    /// Descendants of `v`, ascending, `v` excluded.
    pub fn dsc(&self, v: usize) -> &[usize] {
        &self.dsc[v - 1]
    }

    /// Depth-first order starting at the root; every parent precedes its children.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v - 1].is_empty()
    }

    pub fn d(&self) -> usize {
        self.parent.len()
    }
}

/// Canonical byte code of a tree shape: the center-rooted parenthesis
/// sequence packed most-significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeCode(Vec<u8>);

impl ShapeCode {
    fn from_bits(bits: &[bool]) -> Self {
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        ShapeCode(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parameter(format!("shape code: {e}")))?;
        let code = ShapeCode(bytes);
        code.to_tree()?;
        Ok(code)
    }

    /// Decode to a representative tree, labelled in depth-first order from the center.
    pub fn to_tree(&self) -> Result<Tree> {
        let bad = || Error::Parameter("malformed shape code".into());
        let mut stack: Vec<usize> = Vec::new();
        let mut edges = Vec::new();
        let mut next = 0usize;
        let mut done = false;
        'outer: for byte in &self.0 {
            for k in 0..8 {
                let open = byte & (0x80 >> k) != 0;
                if done {
                    if open {
                        return Err(bad());
                    }
                    continue;
                }
                if open {
                    next += 1;
                    if let Some(&p) = stack.last() {
                        edges.push((p, next));
                    }
                    stack.push(next);
                } else {
                    stack.pop().ok_or_else(bad)?;
                    if stack.is_empty() {
                        done = true;
                        continue 'outer;
                    }
                }
            }
        }
        if !done || next == 0 {
            return Err(bad());
        }
        Tree::new(next, edges)
    }
}

impl fmt::Display for ShapeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Largest vertex count accepted by [`enumerate_shapes`].
pub const MAX_ENUMERATION_D: usize = 12;

/// One representative per isomorphism class of `d`-vertex trees, sorted by code.
pub fn enumerate_shapes(d: usize) -> Result<Vec<Tree>> {
    if d == 0 || d > MAX_ENUMERATION_D {
        return Err(Error::Parameter(format!("d = {d} outside 1..={MAX_ENUMERATION_D}")));
    }
    let mut codes: BTreeSet<ShapeCode> = BTreeSet::from([Tree::new(1, []).unwrap().canonical_code()]);
    for _ in 2..=d {
        let mut next = BTreeSet::new();
        for code in &codes {
            let t = code.to_tree()?;
            for v in 1..=t.d() {
                next.insert(t.with_leaf(v)?.canonical_code());
            }
        }
        codes = next;
    }
    codes.into_iter().map(|c| c.to_tree()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_path_at_middle() {
        let t = Tree::path(3);
        let r = t.root_at(2).unwrap();
        assert_eq!(r.children(2), &[1, 3]);
        assert_eq!(r.dsc(2), &[1, 3]);
        assert!(r.is_leaf(1) && r.is_leaf(3));
    }

    #[test]
    fn root_star_and_single_vertex() {
        let t = Tree::star(10);
        let r = t.root_at(1).unwrap();
        assert_eq!(r.children(1), (2..=10).collect::<Vec<_>>().as_slice());
        assert!((2..=10).all(|v| r.is_leaf(v)));
        let one = Tree::new(1, []).unwrap();
        let r = one.root_at(1).unwrap();
        assert!(r.children(1).is_empty() && r.dsc(1).is_empty());
        assert!(t.root_at(11).is_err());
        assert!(t.root_at(0).is_err());
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(Tree::new(3, [(1, 2)]).is_err());
        assert!(Tree::new(3, [(1, 2), (1, 2)]).is_err());
        assert!(Tree::new(3, [(1, 1), (1, 2)]).is_err());
        assert!(Tree::new(4, [(1, 2), (2, 1), (3, 4)]).is_err());
        assert!(Tree::new(4, [(1, 2), (3, 4), (1, 5)]).is_err());
        assert!(Tree::new(0, []).is_err());
    }

    #[test]
    fn paths() {
        let t = Tree::path(3);
        assert_eq!(t.path_between(1, 3).unwrap(), vec![(1, 2), (2, 3)]);
        assert!(t.path_between(2, 2).unwrap().is_empty());
        let s = Tree::star(3);
        assert_eq!(s.path_between(2, 3).unwrap(), vec![(2, 1), (1, 3)]);
        assert!(t.path_between(1, 4).is_err());
    }

    #[test]
    fn prune_small_cases() {
        let (res, det) = Tree::path(3).prune(2, 3).unwrap();
        assert_eq!(det.labels, vec![1, 2]);
        assert_eq!(res.labels, vec![3]);
        let (res, det) = Tree::star(4).prune(3, 1).unwrap();
        assert_eq!(det.labels, vec![3]);
        assert_eq!(res.tree.canonical_code(), Tree::star(3).canonical_code());
        assert!(Tree::path(3).prune(1, 3).is_err());
    }

    #[test]
    fn prune_figure_pair() {
        // 1:{2,3,4}, v=4, 5 between v and w=6, w carries four leaves, u=10 hangs off v.
        let t = Tree::new(
            14,
            [(1, 2), (1, 3), (1, 4), (4, 5), (5, 6), (6, 7), (6, 8), (6, 9), (6, 11), (4, 10), (10, 12), (10, 13), (13, 14)],
        )
        .unwrap();
        let (res, det) = t.prune(10, 4).unwrap();
        assert_eq!(det.labels, vec![10, 12, 13, 14]);
        assert_eq!(res.len(), 10);
        let t2 = t.reanchor(10, 4, 6).unwrap();
        let (res2, det2) = t2.prune(10, 6).unwrap();
        assert_eq!(res, res2);
        assert_eq!(det, det2);
    }

    #[test]
    fn degree_vectors() {
        assert_eq!(Tree::star(6).degree_vector(), vec![5, 1, 1, 1, 1, 1]);
        assert_eq!(Tree::path(6).degree_vector(), vec![2, 2, 2, 2, 1, 1]);
    }

    #[test]
    fn codes_distinguish_and_identify() {
        let a = Tree::new(3, [(1, 2), (2, 3)]).unwrap();
        let b = Tree::new(3, [(2, 1), (1, 3)]).unwrap();
        assert_eq!(a.canonical_code(), b.canonical_code());
        assert_ne!(Tree::path(4).canonical_code(), Tree::star(4).canonical_code());
        let code = Tree::star(5).canonical_code();
        assert_eq!(ShapeCode::from_hex(&code.to_hex()).unwrap(), code);
        assert!(ShapeCode::from_hex("zz").is_err());
    }

    #[test]
    fn small_shape_counts() {
        let counts: Vec<usize> = (1..=6).map(|d| enumerate_shapes(d).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6]);
        assert!(enumerate_shapes(0).is_err());
        assert!(enumerate_shapes(13).is_err());
    }
}

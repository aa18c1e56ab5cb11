//! Families of tree reconstructions whose consecutive members are ordered
//! by single re-anchoring moves.
//!
//! Each chain is returned as `(lower, upper)` pairs. Generic subtrees are
//! always joined through their vertex 1.

use crate::error::{Error, Result};
use crate::tree::Tree;

#[derive(Debug, Clone)]
pub enum Corollary {
    /// Star on `d` vertices taken apart into a path, one leaf at a time.
    StarToSeries { d: usize },
    /// Vertex 1 carries `subtrees` and `d_ray` single leaves; the leaves are
    /// gathered one by one into a path hanging from vertex 1.
    RayTool { d_ray: usize, subtrees: Vec<Tree> },
    /// A path `l_1 .. l_{d_se}` with `tau` joined (through `anchor`) to `l_k`,
    /// `k` sliding from the end towards the middle.
    SeriesSlide { d_se: usize, tau: Tree, anchor: usize },
    /// A path `l_1 .. l_{d_beam}` with `m` leaves on `l_1` and `n` on
    /// `l_{d_beam}`, `m + n = d_ray`. Each `(k, tree)` in `extras` is joined
    /// to `l_k` and mirrored on `l_{d_beam + 1 - k}`.
    BeamBalance { d_beam: usize, d_ray: usize, extras: Vec<(usize, Tree)> },
}

struct Builder {
    edges: Vec<(usize, usize)>,
    next: usize,
}

impl Builder {
    fn new(first_free: usize) -> Self {
        Builder { edges: Vec::new(), next: first_free }
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.edges.push((a, b));
    }

    fn leaf(&mut self, at: usize) -> usize {
        let v = self.next;
        self.next += 1;
        self.edges.push((at, v));
        v
    }

    /// Copy `sub` with fresh labels; `sub`'s `via` vertex is joined to `at`.
    fn graft(&mut self, sub: &Tree, via: usize, at: usize) {
        let base = self.next - 1;
        self.edges.extend(sub.edges().iter().map(|&(a, b)| (a + base, b + base)));
        self.edges.push((at, via + base));
        self.next += sub.d();
    }

    fn finish(self) -> Result<Tree> {
        Tree::new(self.next - 1, self.edges)
    }
}

pub fn corollary_chain(c: &Corollary) -> Result<Vec<(Tree, Tree)>> {
    match c {
        Corollary::StarToSeries { d } => star_to_series(*d),
        Corollary::RayTool { d_ray, subtrees } => ray_tool(*d_ray, subtrees),
        Corollary::SeriesSlide { d_se, tau, anchor } => series_slide(*d_se, tau, *anchor),
        Corollary::BeamBalance { d_beam, d_ray, extras } => beam_balance(*d_beam, *d_ray, extras),
    }
}

/// `k`-th stage: path `1 - 2 - ... - (k+1)`, remaining vertices on 1.
fn star_stage(d: usize, k: usize) -> Result<Tree> {
    let mut b = Builder::new(k + 2);
    for i in 1..=k {
        b.edge(i, i + 1);
    }
    for _ in (k + 2)..=d {
        b.leaf(1);
    }
    b.finish()
}

fn star_to_series(d: usize) -> Result<Vec<(Tree, Tree)>> {
    if d < 4 {
        return Err(Error::Parameter(format!("star-to-series needs d >= 4, got {d}")));
    }
    let stages = (1..=d - 2).map(|k| star_stage(d, k)).collect::<Result<Vec<_>>>()?;
    Ok(stages.windows(2).map(|w| (w[1].clone(), w[0].clone())).collect())
}

fn ray_stage(d_ray: usize, subtrees: &[Tree], k: usize) -> Result<Tree> {
    let mut b = Builder::new(2);
    for s in subtrees {
        b.graft(s, 1, 1);
    }
    let mut tip = 1;
    for _ in 0..k {
        tip = b.leaf(tip);
    }
    for _ in k..d_ray {
        b.leaf(1);
    }
    b.finish()
}

fn ray_tool(d_ray: usize, subtrees: &[Tree]) -> Result<Vec<(Tree, Tree)>> {
    if d_ray < 3 {
        return Err(Error::Parameter(format!("ray gathering needs at least 3 ray-like vertices, got {d_ray}")));
    }
    if 1 + d_ray + subtrees.iter().map(Tree::d).sum::<usize>() < 4 {
        return Err(Error::Parameter("ray gathering needs d >= 4".into()));
    }
    let stages = (1..d_ray).map(|k| ray_stage(d_ray, subtrees, k)).collect::<Result<Vec<_>>>()?;
    Ok(stages.windows(2).map(|w| (w[1].clone(), w[0].clone())).collect())
}

fn series_slide(d_se: usize, tau: &Tree, anchor: usize) -> Result<Vec<(Tree, Tree)>> {
    if d_se < 3 {
        return Err(Error::Parameter(format!("series subtree needs at least 3 vertices, got {d_se}")));
    }
    tau.check_vertex(anchor)?;
    let stage = |k: usize| -> Result<Tree> {
        let mut b = Builder::new(d_se + 1);
        for i in 1..d_se {
            b.edge(i, i + 1);
        }
        b.graft(tau, anchor, k);
        b.finish()
    };
    let stages = (1..=d_se / 2).map(stage).collect::<Result<Vec<_>>>()?;
    Ok(stages.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect())
}

fn beam_balance(d_beam: usize, d_ray: usize, extras: &[(usize, Tree)]) -> Result<Vec<(Tree, Tree)>> {
    if d_beam < 2 || d_ray < 2 {
        return Err(Error::Parameter(format!(
            "beam balancing needs d_beam >= 2 and d_ray >= 2, got {d_beam} and {d_ray}"
        )));
    }
    if let Some((k, _)) = extras.iter().find(|(k, _)| *k == 0 || *k > d_beam / 2) {
        return Err(Error::Parameter(format!("extra subtree position {k} outside 1..={}", d_beam / 2)));
    }
    let stage = |m: usize| -> Result<Tree> {
        let mut b = Builder::new(d_beam + 1);
        for i in 1..d_beam {
            b.edge(i, i + 1);
        }
        for (k, sub) in extras {
            b.graft(sub, 1, *k);
            b.graft(sub, 1, d_beam + 1 - *k);
        }
        for _ in 0..m {
            b.leaf(1);
        }
        for _ in m..d_ray {
            b.leaf(d_beam);
        }
        b.finish()
    };
    let imbalance = |m: usize| m.abs_diff(d_ray - m);
    let mut pairs = Vec::new();
    for m in 1..=d_ray {
        let (a, b) = (m, m - 1);
        match imbalance(a).cmp(&imbalance(b)) {
            std::cmp::Ordering::Less => pairs.push((stage(a)?, stage(b)?)),
            std::cmp::Ordering::Greater => pairs.push((stage(b)?, stage(a)?)),
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(pairs)
}

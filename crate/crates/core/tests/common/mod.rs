#![allow(dead_code)]

use mpmrf::{MpmrfModel, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random labelled tree from a Prufer sequence.
pub fn random_tree(rng: &mut ChaCha8Rng, d: usize) -> Tree {
    if d == 1 {
        return Tree::new(1, []).unwrap();
    }
    if d == 2 {
        return Tree::path(2);
    }
    let seq: Vec<usize> = (0..d - 2).map(|_| rng.gen_range(1..=d)).collect();
    let mut degree = vec![1usize; d + 1];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(d - 1);
    for &x in &seq {
        let leaf = (1..=d).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (1..=d).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Tree::new(d, edges).unwrap()
}

/// Random tree, `lambda` and per-edge `alpha`.
pub fn random_model(rng: &mut ChaCha8Rng, d_max: usize) -> MpmrfModel {
    let d = rng.gen_range(1..=d_max);
    let tree = random_tree(rng, d);
    let lambda = rng.gen_range(0.2..3.0);
    let alpha = (0..d.saturating_sub(1)).map(|_| rng.gen_range(0.0..=1.0)).collect();
    MpmrfModel::new(tree, lambda, alpha).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(sum_j c_j (t^j - 1))` expanded as the exponential series
/// `e^{-L} sum_n C(t)^n / n!`, truncated at `t^k_max`.
pub fn series_exp_pmf(rates: &[f64], k_max: usize) -> Vec<f64> {
    let total: f64 = rates.iter().skip(1).sum();
    let mut out = vec![0.0; k_max + 1];
    let mut power = vec![0.0; k_max + 1];
    power[0] = 1.0;
    let mut n = 0usize;
    loop {
        let mut mass = 0.0;
        for (o, p) in out.iter_mut().zip(&power) {
            *o += p;
            mass += p;
        }
        if n > 0 && mass < 1e-300 {
            break;
        }
        n += 1;
        let mut next = vec![0.0; k_max + 1];
        for (i, &p) in power.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &c) in rates.iter().enumerate().skip(1) {
                if i + j > k_max {
                    break;
                }
                next[i + j] += p * c / n as f64;
            }
        }
        power = next;
        if n > 4 * k_max + 50 {
            break;
        }
    }
    out.iter().map(|x| x * (-total).exp()).collect()
}

/// `P(Poisson(mean) = k)` for `k <= k_max`.
pub fn poisson_pmf(mean: f64, k_max: usize) -> Vec<f64> {
    let mut p = vec![(-mean).exp()];
    for k in 1..=k_max {
        let prev = p[k - 1];
        p.push(prev * mean / k as f64);
    }
    p
}

pub fn twelve_vertex_trees() -> (Tree, Tree) {
    let t = Tree::new(
        12,
        [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7), (5, 8), (5, 9), (5, 10), (5, 11), (5, 12)],
    )
    .unwrap();
    let t2 = t.reanchor(4, 2, 3).unwrap();
    (t, t2)
}

pub fn spectral_exception_trees() -> (Tree, Tree) {
    let t = Tree::new(9, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (5, 7), (7, 8), (7, 9)]).unwrap();
    let t2 = t.reanchor(9, 7, 3).unwrap();
    (t, t2)
}

pub fn composite_move_trees() -> (Tree, Tree) {
    (
        Tree::new(9, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (5, 7), (6, 8), (7, 9)]).unwrap(),
        Tree::new(9, [(1, 2), (2, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9)]).unwrap(),
    )
}

pub fn cospectral_trees() -> (Tree, Tree) {
    (
        Tree::new(9, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (6, 8), (5, 9)]).unwrap(),
        Tree::new(9, [(1, 2), (2, 3), (3, 4), (4, 5), (3, 6), (6, 7), (1, 8), (1, 9)]).unwrap(),
    )
}

pub fn six_vertex_tree() -> Tree {
    Tree::new(6, [(1, 2), (2, 3), (3, 4), (3, 5), (3, 6)]).unwrap()
}

/// Corollary instances with at most 9 vertices.
pub fn corollary_instances() -> Vec<mpmrf::corollary::Corollary> {
    use mpmrf::corollary::Corollary;
    let mut out: Vec<Corollary> = (4..=9).map(|d| Corollary::StarToSeries { d }).collect();
    for d_ray in 3..=7 {
        let options = [vec![], vec![Tree::path(1)], vec![Tree::path(2)], vec![Tree::star(3)], vec![Tree::path(1), Tree::path(1)]];
        for subtrees in options {
            let d = 1 + d_ray + subtrees.iter().map(Tree::d).sum::<usize>();
            if (4..=9).contains(&d) {
                out.push(Corollary::RayTool { d_ray, subtrees });
            }
        }
    }
    for d_se in 4..=8 {
        let taus = [(Tree::path(1), 1), (Tree::path(2), 1), (Tree::path(2), 2), (Tree::star(3), 1), (Tree::star(3), 2), (Tree::path(3), 2)];
        for (tau, anchor) in taus {
            if d_se + tau.d() <= 9 {
                out.push(Corollary::SeriesSlide { d_se, tau, anchor });
            }
        }
    }
    for d_beam in 2..=6 {
        for d_ray in 2..=5 {
            for extras in [vec![], vec![(1usize, Tree::path(1))], vec![(2, Tree::path(1))]] {
                if extras.iter().any(|(k, _)| *k > d_beam / 2) {
                    continue;
                }
                let d = d_beam + d_ray + 2 * extras.iter().map(|(_, t)| t.d()).sum::<usize>();
                if d <= 9 {
                    out.push(Corollary::BeamBalance { d_beam, d_ray, extras });
                }
            }
        }
    }
    out
}

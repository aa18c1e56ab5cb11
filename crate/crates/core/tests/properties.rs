mod common;

use mpmrf::orders::DEFAULT_ORDER_TOL;
use mpmrf::poset::all_moves;
use mpmrf::spectral::majorizes;
use mpmrf::{
    cx_check_empirical, enumerate_shapes, shape_compare, st_compare, synecdochic_compare, MpmrfModel, Poly,
    Relation, ShapeCode, Tree,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn arb_tree(max_d: usize) -> impl Strategy<Value = Tree> {
    (1..=max_d, any::<u64>()).prop_map(|(d, seed)| common::random_tree(&mut common::rng(seed), d))
}

fn arb_model(max_d: usize) -> impl Strategy<Value = MpmrfModel> {
    any::<u64>().prop_map(move |seed| common::random_model(&mut common::rng(seed), max_d))
}

fn arb_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(-2.0f64..2.0, 1..8).prop_map(Poly::new)
}

fn relabel(tree: &Tree, seed: u64) -> Tree {
    let mut perm: Vec<usize> = (1..=tree.d()).collect();
    perm.shuffle(&mut common::rng(seed));
    tree.relabel(&perm).unwrap()
}

fn brute_force_isomorphic(a: &Tree, b: &Tree) -> bool {
    fn search(a: &Tree, b: &Tree, perm: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let v = perm.len() + 1;
        if v > a.d() {
            return a.edges().iter().all(|&(x, y)| b.has_edge(perm[x - 1], perm[y - 1]));
        }
        for w in 1..=b.d() {
            if used[w - 1] || a.degree(v) != b.degree(w) {
                continue;
            }
            perm.push(w);
            used[w - 1] = true;
            if search(a, b, perm, used) {
                return true;
            }
            used[w - 1] = false;
            perm.pop();
        }
        false
    }
    a.d() == b.d() && search(a, b, &mut Vec::new(), &mut vec![false; b.d()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn code_ignores_labels(t in arb_tree(12), seed in any::<u64>()) {
        prop_assert_eq!(t.canonical_code(), relabel(&t, seed).canonical_code());
    }

    #[test]
    fn code_round_trips(t in arb_tree(12)) {
        let code = t.canonical_code();
        prop_assert_eq!(code.to_tree().unwrap().canonical_code(), code.clone());
        prop_assert_eq!(ShapeCode::from_hex(&code.to_hex()).unwrap(), code);
    }

    #[test]
    fn code_equality_is_isomorphism(a in arb_tree(7), b in arb_tree(7)) {
        let same = a.canonical_code() == b.canonical_code();
        prop_assert_eq!(same, brute_force_isomorphic(&a, &b));
    }

    #[test]
    fn poly_product_laws(a in arb_poly(), b in arb_poly(), c in arb_poly(), x in -1.5f64..1.5) {
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        for k in 0..=ab.degree().max(ba.degree()) {
            prop_assert!((ab.coeff(k) - ba.coeff(k)).abs() < 1e-12);
        }
        let l = ab.mul(&c);
        let r = a.mul(&b.mul(&c));
        for k in 0..=l.degree().max(r.degree()) {
            prop_assert!((l.coeff(k) - r.coeff(k)).abs() < 1e-10);
        }
        prop_assert!((ab.eval(x) - a.eval(x) * b.eval(x)).abs() < 1e-9);
    }

    #[test]
    fn aggregate_is_root_invariant(m in arb_model(8), r in 1usize..=8) {
        let r = r.min(m.d());
        let a = m.aggregate_dist_rooted(1, 1e-12).unwrap();
        let b = m.aggregate_dist_rooted(r, 1e-12).unwrap();
        let n = a.pmf().len().max(b.pmf().len());
        for k in 0..n {
            prop_assert!((a.p(k) - b.p(k)).abs() <= 1e-10);
        }
    }

    #[test]
    fn h_mean_is_covariance_over_lambda(m in arb_model(8), v in 1usize..=8) {
        let v = v.min(m.d());
        let h = m.h_dist(v).unwrap();
        prop_assert!((h.mean() * m.lambda() - m.cov_with_sum(v).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn conditional_means_add_up(m in arb_model(7)) {
        let agg = m.aggregate_dist(1e-12).unwrap();
        let tables: Vec<_> = (1..=m.d()).map(|v| m.allocation_with(&agg, v).unwrap()).collect();
        for k in 0..=agg.support_bound() {
            if agg.p(k) < 1e-200 {
                continue;
            }
            let s: f64 = tables.iter().map(|t| t.conditional_mean(&agg, k).unwrap()).sum();
            prop_assert!((s - k as f64).abs() <= 1e-8);
        }
        for t in &tables {
            prop_assert!((t.total() - m.lambda()).abs() < 1e-9);
        }
    }

    #[test]
    fn tvar_contributions_add_up(m in arb_model(7), kappa in 0.0f64..0.995) {
        let agg = m.aggregate_dist(1e-12).unwrap();
        let parts: f64 = (1..=m.d())
            .map(|v| m.tvar_contribution_from(&agg, &m.allocation_with(&agg, v).unwrap(), kappa).unwrap())
            .sum();
        prop_assert!((parts - agg.tvar(kappa).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn vertex_verdicts_flip(m in arb_model(8), v in 1usize..=8, w in 1usize..=8) {
        let (v, w) = (v.min(m.d()), w.min(m.d()));
        prop_assume!(v != w);
        let a = synecdochic_compare(&m, v, w).unwrap();
        let b = synecdochic_compare(&m, w, v).unwrap();
        prop_assert_eq!(a.flip(), b);
    }

    #[test]
    fn leaf_bridge(t in arb_tree(8), v in 1usize..=8, w in 1usize..=8, alpha in 0.01f64..0.99) {
        let (v, w) = (v.min(t.d()), w.min(t.d()));
        prop_assume!(v != w);
        let m = MpmrfModel::homogeneous(t.clone(), 1.0, alpha).unwrap();
        let vertex = synecdochic_compare(&m, v, w).unwrap();
        let shape = shape_compare(&t.with_leaf(v).unwrap(), &t.with_leaf(w).unwrap(), alpha, 1.0).unwrap();
        prop_assert_eq!(vertex, shape);
    }

    #[test]
    fn majorization_is_reflexive(t in arb_tree(12)) {
        prop_assert!(majorizes(&t.degree_vector(), &t.degree_vector()).unwrap());
        prop_assert!(majorizes(&Tree::path(t.d()).degree_vector(), &t.degree_vector()).unwrap());
        prop_assert!(majorizes(&t.degree_vector(), &Tree::star(t.d()).degree_vector()).unwrap());
    }
}

#[test]
fn st_compare_le_and_ge_only_when_equal() {
    let mut rng = common::rng(3);
    for _ in 0..200 {
        let m = common::random_model(&mut rng, 6);
        for v in 1..=m.d() {
            for w in 1..=m.d() {
                let (a, b) = (m.h_dist(v).unwrap(), m.h_dist(w).unwrap());
                let r = st_compare(&a, &b, DEFAULT_ORDER_TOL).relation;
                if r == Relation::Eq {
                    let n = a.pmf().len().max(b.pmf().len());
                    assert!((0..n).all(|k| (a.cdf(k) - b.cdf(k)).abs() <= DEFAULT_ORDER_TOL * (k + 1) as f64));
                }
            }
        }
    }
}

#[test]
fn shape_criterion_implies_convex_order() {
    let mut certified = 0;
    for d in 3..=7 {
        for tree in enumerate_shapes(d).unwrap() {
            for nb in all_moves(&tree) {
                for alpha in [0.2, 0.5, 0.8] {
                    let v = shape_compare(&tree, &nb.tree, alpha, 1.0).unwrap();
                    if !v.is_le() {
                        continue;
                    }
                    certified += 1;
                    let m1 = MpmrfModel::homogeneous(tree.clone(), 1.0, alpha).unwrap().aggregate_dist(1e-12).unwrap();
                    let m2 = MpmrfModel::homogeneous(nb.tree.clone(), 1.0, alpha).unwrap().aggregate_dist(1e-12).unwrap();
                    let cx = cx_check_empirical(&m1, &m2, 1e-10).unwrap();
                    assert!(cx.is_le(), "{:?} -> {:?} at {alpha}: {:?}", tree, nb.tree, cx);
                }
            }
        }
    }
    assert!(certified > 100);
}

#[test]
fn shape_counts_up_to_twelve() {
    let known = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551];
    for (d, &n) in (1..=12).zip(&known) {
        let shapes = enumerate_shapes(d).unwrap();
        assert_eq!(shapes.len(), n, "d = {d}");
        let mut codes: Vec<_> = shapes.iter().map(Tree::canonical_code).collect();
        codes.dedup();
        assert_eq!(codes.len(), n);
    }
    assert!(enumerate_shapes(0).is_err());
    assert!(enumerate_shapes(13).is_err());
}

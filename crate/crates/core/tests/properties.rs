//! Randomized invariants across the layers.

use kp2_core::graphs::{decorate, StableGraph};
use kp2_core::lring::RingElem;
use kp2_core::mgn::{hodge_psi_integral, psi_integral};
use kp2_core::mirror::MirrorData;
use kp2_core::scalars::{int, CycScalar};
use kp2_core::series::QSeries;
use proptest::prelude::*;

/// (g, exponents) with Σa = 3g − 3 + n, for stable (g, n).
fn monomial(max_g: usize, max_n: usize) -> impl Strategy<Value = (usize, Vec<u32>)> {
    (0..=max_g, 1..=max_n)
        .prop_filter("stable", |(g, n)| 2 * g + n > 2)
        .prop_flat_map(|(g, n)| {
            let dim = 3 * g + n - 3;
            (Just(g), proptest::collection::vec(0..=dim as u32, n - 1)).prop_map(move |(g, cuts)| {
                let mut cuts: Vec<u32> = cuts;
                cuts.sort_unstable();
                let mut exps = Vec::with_capacity(cuts.len() + 1);
                let mut prev = 0;
                for c in cuts {
                    exps.push(c - prev);
                    prev = c;
                }
                exps.push(dim as u32 - prev);
                (g, exps)
            })
        })
}

fn scalar() -> impl Strategy<Value = CycScalar> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6)
        .prop_map(|(a, b, c, d)| &CycScalar::from_ratio(a, b) + &(&CycScalar::zeta() * &CycScalar::from_ratio(c, d)))
}

fn ring_elem() -> impl Strategy<Value = RingElem> {
    proptest::collection::vec(((-3i32..4, 0u32..3, -2i32..3), -9i64..10), 0..5)
        .prop_map(|terms| RingElem::from_terms(terms.into_iter().map(|(k, c)| (k, CycScalar::from_int(c)))))
}

proptest! {
    #[test]
    fn string_equation((g, exps) in monomial(3, 5)) {
        let mut with0 = exps.clone();
        with0.push(0);
        let lhs = psi_integral(g, &with0).unwrap();
        let mut rhs = int(0);
        for j in 0..exps.len() {
            if exps[j] > 0 {
                let mut b = exps.clone();
                b[j] -= 1;
                if 2 * g + b.len() > 2 {
                    rhs += psi_integral(g, &b).unwrap();
                }
            }
        }
        if exps.len() >= 3 || g > 0 {
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn dilaton_equation((g, exps) in monomial(3, 5)) {
        let mut with1 = exps.clone();
        with1.push(1);
        let lhs = psi_integral(g, &with1).unwrap();
        let rhs = int(2 * g as i64 - 2 + exps.len() as i64) * psi_integral(g, &exps).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn hodge_without_lambda_is_psi((g, exps) in monomial(2, 4)) {
        prop_assert_eq!(hodge_psi_integral(g, &exps, &[]).unwrap(), psi_integral(g, &exps).unwrap());
    }

    #[test]
    fn genus_two_lambda_relation(n in 1usize..4, seed in proptest::collection::vec(0u32..4, 3)) {
        // λ₂ = λ₁²/2 under any ψ-monomial of the right degree
        let dim = 3 + n as u32;
        let mut exps = vec![0u32; n];
        let mut left = dim - 2;
        for (k, s) in seed.iter().enumerate().take(n - 1) {
            let x = (*s).min(left);
            exps[k] = x;
            left -= x;
        }
        exps[n - 1] = left;
        let a = hodge_psi_integral(2, &exps, &[2]).unwrap();
        let b = hodge_psi_integral(2, &exps, &[1, 1]).unwrap() / int(2);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cyclotomic_field_laws(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn derivation_is_leibniz(f in ring_elem(), g in ring_elem()) {
        let lhs = (&f * &g).derive();
        let rhs = &(&f.derive() * &g) + &(&f * &g.derive());
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(RingElem::from_a2_form(&f.to_a2_form()), f);
    }

    #[test]
    fn series_exp_log(coeffs in proptest::collection::vec(-5i64..6, 1..8)) {
        let mut c: Vec<CycScalar> = vec![CycScalar::zero()];
        c.extend(coeffs.into_iter().map(CycScalar::from_int));
        let f = QSeries::from_coeffs(c);
        prop_assert_eq!(f.exp().unwrap().log().unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_is_a_homomorphism(f in ring_elem(), g in ring_elem()) {
        let gens = MirrorData::new(6).unwrap().generators;
        prop_assert_eq!((&f * &g).evaluate(&gens), &f.evaluate(&gens) * &g.evaluate(&gens));
        prop_assert_eq!(f.derive().evaluate(&gens), f.evaluate(&gens).deriv());
    }
}

fn perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in perms(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// |Aut| counted as pairs (vertex map, half-edge map) preserving all structure.
fn brute_force_aut(gr: &StableGraph, labels: &[usize]) -> u64 {
    let nh = 2 * gr.edges.len();
    let owner: Vec<usize> = gr.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    let nv = gr.num_vertices();
    let mut count = 0;
    for pi in perms(nv) {
        let ok_vertices = (0..nv).all(|v| gr.genera[pi[v]] == gr.genera[v] && labels[pi[v]] == labels[v])
            && gr.legs.iter().all(|&v| pi[v] == v);
        if !ok_vertices {
            continue;
        }
        for sigma in perms(nh) {
            let ok = (0..nh).all(|h| owner[sigma[h]] == pi[owner[h]])
                && (0..gr.edges.len()).all(|e| sigma[2 * e] / 2 == sigma[2 * e + 1] / 2);
            if ok {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn automorphisms_match_brute_force() {
    for (g, n) in [(2, 0), (1, 1), (1, 2), (0, 4), (2, 1)] {
        for gr in kp2_core::graphs::enumerate_graphs(g, n).unwrap() {
            if 2 * gr.edges.len() > 6 {
                continue;
            }
            let decs = decorate(&gr);
            let nv = gr.num_vertices() as u32;
            let vaut = gr.vertex_automorphisms().len() as u64 * gr.edge_symmetry();
            let mut orbit_total = 0;
            for d in &decs {
                assert_eq!(d.aut_order, brute_force_aut(&gr, &d.labels), "{gr} {:?}", d.labels);
                orbit_total += vaut / d.aut_order;
            }
            assert_eq!(orbit_total, 3u64.pow(nv));
        }
    }
}

//! Degree constraints and truncation independence of the graph sums.

use kp2_core::localization::{Engine, Insertion};
use kp2_core::mgn::hodge_psi_integral;
use kp2_core::scalars::{rat, weight, CycScalar};

fn sign(k: u32) -> CycScalar {
    CycScalar::from_int(if k.is_multiple_of(2) { 1 } else { -1 })
}

#[test]
fn edge_linear_coefficient() {
    let engine = Engine::new(4).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for (k, l) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2)] {
                let edge = engine.edge_contribution(i, j, k, l).unwrap();
                assert!(edge.x_degree().unwrap_or(0) <= 1);
                let wi = weight(i).unwrap().pow(2 - k as i64).unwrap();
                let wj = weight(j).unwrap().pow(2 - l as i64).unwrap();
                let r = engine.rows.r(1, k as usize - 1) * engine.rows.r(1, l as usize - 1);
                let expect = r.shift(-1, 0, 0).scale(&(&(&wi * &wj) * &sign(k + l))).scale(&CycScalar::from_int(3));
                assert_eq!(edge.x_coeff(1), expect, "edge ({i},{j},{k},{l})");
            }
        }
    }
}

#[test]
fn first_leg_term() {
    let engine = Engine::new(2).unwrap();
    for i in 0..3 {
        let leg = engine.leg_contribution(i, Insertion::H1, 1).unwrap();
        let expect = engine.rows.r(1, 0).shift(1, 0, 1).scale(&weight(i).unwrap());
        assert_eq!(leg, expect);
        assert_eq!(leg.c_degree(), Some(1));
        assert_eq!(engine.leg_contribution(i, Insertion::H2, 1).unwrap().c_degree(), Some(-1));
        assert!(engine.leg_contribution(i, Insertion::H0, 1).unwrap() == kp2_core::lring::RingElem::one());
    }
}

#[test]
fn lambda_top_oracle() {
    // ∫ψ^{2g−2}λ_g over the one-pointed space is (2^{2g−1}−1)|B_{2g}|/(2^{2g−1}(2g)!)
    assert_eq!(hodge_psi_integral(1, &[0], &[1]).unwrap(), rat(1, 24));
    assert_eq!(hodge_psi_integral(2, &[2], &[2]).unwrap(), rat(7, 5760));
}

#[test]
fn t_derivatives_are_c_homogeneous() {
    let engine = Engine::new(4).unwrap();
    let mut f = engine.free_energy(2).unwrap().total;
    assert_eq!(f.c_degree(), Some(0));
    for k in 1..=3 {
        f = f.d_dt();
        assert_eq!(f.c_degree(), Some(k));
    }
    for (g, ins, deg) in [
        (1, vec![Insertion::H1], 1),
        (1, vec![Insertion::H1; 2], 2),
        (1, vec![Insertion::PsiH, Insertion::H2, Insertion::H2], -1),
        (0, vec![Insertion::H2; 3], -3),
        (0, vec![Insertion::H2, Insertion::H2, Insertion::H2, Insertion::H1], -2),
        (0, vec![Insertion::PsiH, Insertion::H2, Insertion::H2, Insertion::H1], 0),
    ] {
        assert_eq!(engine.correlator(g, &ins).unwrap().total.c_degree(), Some(deg), "{ins:?}");
    }
    assert!(engine.correlator(1, &[Insertion::H2, Insertion::H0]).unwrap().total.is_zero());
}

#[test]
fn flag_bound_slack_changes_nothing() {
    let base = Engine::new(4).unwrap();
    let mut wide = Engine::new(6).unwrap();
    wide.flag_slack = 2;
    assert_eq!(base.free_energy(2).unwrap().total, wide.free_energy(2).unwrap().total);
    for ins in [vec![Insertion::H1], vec![Insertion::H1, Insertion::H2], vec![Insertion::PsiH]] {
        assert_eq!(base.correlator(1, &ins).unwrap().total, wide.correlator(1, &ins).unwrap().total);
    }
}

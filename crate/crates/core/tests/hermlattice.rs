use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ul_core::hermlattice::{
    check_d_i, classify_form, gram_schmidt_normalize, index, random_basis, random_lattice, random_unimodular,
    shift_psi, tau_stabilize, vertex_type, FormClass, HermitianLattice, HermitianSpace,
};
use ul_core::mat::{snf, Mat};
use ul_core::witt::make_context;
use ul_core::Error;

fn space(p: u64, m: u32) -> Arc<HermitianSpace> {
    HermitianSpace::scaled_diagonal(make_context(p, m, 12).unwrap(), &[1, 0, 1])
}

#[test]
fn snf_recovers_planted_exponents() {
    let ctx = make_context(3, 2, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let mut a: Vec<u32> = (0..4).map(|_| rand::Rng::random_range(&mut rng, 0..4)).collect();
        let u = random_unimodular(&ctx, 4, &mut rng);
        let v = random_unimodular(&ctx, 4, &mut rng);
        let d = Mat::diag(&a.iter().map(|&e| ctx.p_pow(e)).collect::<Vec<_>>());
        let m = u.mul(&ctx, &d).mul(&ctx, &v);
        let s = snf(&ctx, &m).unwrap();
        a.sort();
        assert_eq!(s.exps, a);
        let dd = s.left.mul(&ctx, &m).mul(&ctx, &s.right);
        let expect = Mat::diag(&a.iter().map(|&e| ctx.p_pow(e)).collect::<Vec<_>>());
        assert_eq!(dd, expect);
    }
}

#[test]
fn double_dual_is_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (p, m) in [(3, 1), (3, 2), (5, 2)] {
        let sp = space(p, m);
        for _ in 0..50 {
            let l = random_lattice(&sp, 2, rand::Rng::random_range(&mut rng, -1..=1), &mut rng);
            let dd = l.dual().unwrap().dual().unwrap();
            assert_eq!(dd, l.tau().unwrap());
            assert_eq!(l.dual().unwrap().tau().unwrap(), l.tau().unwrap().dual().unwrap());
        }
    }
}

#[test]
fn tau_is_trivial_over_fp2_and_not_over_fp4() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sp = space(3, 1);
    let l = random_lattice(&sp, 2, 0, &mut rng);
    assert_eq!(l.tau().unwrap(), l);
    let sp2 = space(3, 2);
    let moved = (0..20).filter(|_| {
        let l = random_lattice(&sp2, 2, 0, &mut rng);
        l.tau().unwrap() != l
    });
    assert!(moved.count() > 10);
}

#[test]
fn tau_commutes_with_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let sp = space(3, 2);
    for _ in 0..20 {
        let a = random_lattice(&sp, 2, 0, &mut rng);
        let b = random_lattice(&sp, 2, 1, &mut rng);
        assert_eq!(a.sum(&b).unwrap().tau().unwrap(), a.tau().unwrap().sum(&b.tau().unwrap()).unwrap());
    }
}

#[test]
fn dual_reverses_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let sp = space(3, 2);
    for _ in 0..30 {
        let a = random_lattice(&sp, 2, 0, &mut rng);
        let b = random_lattice(&sp, 2, 0, &mut rng);
        assert_eq!(index(&b, &a), index(&a.dual().unwrap(), &b.dual().unwrap()));
        assert_eq!(a.scale(1).dual().unwrap(), a.dual().unwrap().scale(-1));
    }
}

#[test]
fn intersection_with_multiple() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let sp = space(5, 1);
    for _ in 0..10 {
        let l = random_lattice(&sp, 2, 0, &mut rng);
        assert_eq!(l.intersect(&l.scale(1)).unwrap(), l.scale(1));
        assert_eq!(l.sum(&l).unwrap(), l);
    }
}

#[test]
fn form_classes() {
    let ctx = make_context(3, 1, 10).unwrap();
    let t = ctx.skew_unit();
    let tp = ctx.mul(&t, &ctx.p_pow(1));
    let ti = Mat::diag(&[t, t, t]);
    let tj = Mat::diag(&[tp, t, t]);
    let t1pp = Mat::diag(&[t, tp, tp]);
    assert_eq!(classify_form(&ctx, &ti).unwrap(), FormClass::SelfDualClass);
    assert_eq!(classify_form(&ctx, &tj).unwrap(), FormClass::NonSelfDualClass);
    assert_eq!(classify_form(&ctx, &t1pp).unwrap(), FormClass::SelfDualClass);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for g in [ti, tj, t1pp] {
        let c = classify_form(&ctx, &g).unwrap();
        for _ in 0..20 {
            let p = random_unimodular(&ctx, 3, &mut rng);
            let g2 = p.transpose().mul(&ctx, &g).mul(&ctx, &p.frob_pow(&ctx, 1));
            assert_eq!(classify_form(&ctx, &g2).unwrap(), c);
        }
    }
}

#[test]
fn gram_schmidt_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for p in [3, 5] {
        let sp = space(p, 1);
        let m = HermitianLattice::standard(&sp);
        let ctx = sp.ctx();
        let t = ctx.skew_unit();
        for _ in 0..25 {
            let g = random_basis(&m, &mut rng);
            let m2 = HermitianLattice::from_generators(&sp, &g, 0).unwrap();
            let nb = gram_schmidt_normalize(&m2, 1, 2).unwrap();
            let q = sp.gram_of(&nb.cols);
            let expect = Mat::diag(&[t, ctx.mul(&t, &ctx.p_pow(1)), ctx.mul(&t, &ctx.p_pow(1))]);
            assert!(q.eq_mod(ctx, &expect, 9));
            let back = HermitianLattice::from_generators(&sp, &nb.cols, nb.denom).unwrap();
            assert_eq!(back, m);
        }
    }
}

#[test]
fn gram_schmidt_rejects_chain_violation() {
    let sp = space(3, 1);
    let m = HermitianLattice::standard(&sp);
    assert!(matches!(gram_schmidt_normalize(&m, 3, 0), Err(Error::ChainViolation(_))));
}

#[test]
fn d_i_chain_and_shift() {
    let sp = space(3, 1);
    let m = HermitianLattice::standard(&sp);
    let a = m.scale(1);
    assert!(check_d_i(&a, 2).unwrap().satisfied());
    assert!(!check_d_i(&a, 0).unwrap().satisfied());
    let back = shift_psi(&a, 2).unwrap();
    assert_eq!(back, m);
    assert!(check_d_i(&back, 0).unwrap().satisfied());
    assert_eq!(shift_psi(&a, 1).unwrap_err(), Error::OddShiftUnsupported(1));
    assert_eq!(vertex_type(&a, 2).unwrap(), vertex_type(&back, 0).unwrap());
}

#[test]
fn stable_lattice_needs_no_steps() {
    let sp = space(3, 2);
    let m = HermitianLattice::standard(&sp);
    let st = tau_stabilize(&m, 0, 2).unwrap();
    assert_eq!(st.d, 0);
    assert_eq!(st.lattice, m);
    assert!(st.report.satisfied());
}

#[test]
fn perturbed_lattice_fails_chain() {
    // span(e1, e2, e3 + p^{-1} e2) is not in D_0
    let sp = space(3, 1);
    let ctx = sp.ctx();
    let g = Mat::from_fn(3, 3, |i, j| match (i, j) {
        (0, 0) => ctx.p_pow(1),
        (1, 1) => ctx.p_pow(1),
        (2, 2) => ctx.p_pow(1),
        (1, 2) => ctx.one(),
        _ => ctx.zero(),
    });
    let l = HermitianLattice::from_generators(&sp, &g, 1).unwrap();
    let r = check_d_i(&l, 0).unwrap();
    assert!(!r.satisfied());
    assert!(!r.failures().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn index_is_additive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = space(3, 1);
        let a = random_lattice(&sp, 2, 0, &mut rng);
        let b = random_lattice(&sp, 2, 1, &mut rng);
        let c = random_lattice(&sp, 1, -1, &mut rng);
        prop_assert_eq!(index(&a, &c), index(&a, &b) + index(&b, &c));
    }

    #[test]
    fn key_depends_only_on_span(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sp = space(5, 1);
        let l = random_lattice(&sp, 3, 0, &mut rng);
        let g = random_basis(&l, &mut rng);
        let l2 = HermitianLattice::from_generators(&sp, &g, l.denom()).unwrap();
        prop_assert_eq!(l.key(), l2.key());
    }
}

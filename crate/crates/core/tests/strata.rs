use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ul_core::gf::Gf;
use ul_core::strata::{
    chart_curve_count, chart_points, chart_points_at_infinity, fermat_count, FiniteHermSpace, FormKind,
};

// Independent oracle: scan all of P^2(F_q) and test the Fermat equation.
fn fermat_brute(p: u32, m: u32) -> u64 {
    let gf = Gf::new(p, 2 * m).unwrap();
    let e = p as u64 + 1;
    let on = |x: u32, y: u32, z: u32| gf.add(gf.add(gf.pow(x, e), gf.pow(y, e)), gf.pow(z, e)) == 0;
    let mut n = 0;
    for y in gf.elements() {
        for z in gf.elements() {
            n += on(1, y, z) as u64;
        }
    }
    for z in gf.elements() {
        n += on(0, 1, z) as u64;
    }
    n + on(0, 0, 1) as u64
}

#[test]
fn fermat_counts_match_brute_force() {
    assert_eq!(fermat_count(3, 1).unwrap(), 28);
    assert_eq!(fermat_count(5, 1).unwrap(), 126);
    for (p, m) in [(3, 1), (5, 1), (3, 2), (7, 1)] {
        assert_eq!(fermat_count(p, m).unwrap(), fermat_brute(p, m));
    }
}

#[test]
fn hermitian_curve_over_fp4_has_no_new_points() {
    // eigenvalues of Frobenius over F_{p^2} are all -p
    assert_eq!(fermat_count(3, 2).unwrap(), 28);
    assert_eq!(fermat_count(3, 3).unwrap(), 3u64.pow(6) + 1 + 2 * 3 * 27);
}

#[test]
fn enumerate_y_small_cases() {
    let s = FiniteHermSpace::new(3, 1, 3, FormKind::AntiDiagonal).unwrap();
    assert_eq!(s.enumerate_y().unwrap().len(), 28);
    let s1 = FiniteHermSpace::new(3, 1, 1, FormKind::AntiDiagonal).unwrap();
    let y1 = s1.enumerate_y().unwrap();
    assert_eq!(y1.len(), 1);
    assert_eq!(y1[0], s1.whole());
    for m in [2, 3] {
        let s = FiniteHermSpace::new(3, m, 3, FormKind::AntiDiagonal).unwrap();
        assert_eq!(s.enumerate_y().unwrap().len() as u64, fermat_count(3, m).unwrap());
    }
}

#[test]
fn both_forms_give_same_counts() {
    for (p, m, l) in [(3, 1, 3), (3, 2, 3), (5, 1, 3)] {
        let a = FiniteHermSpace::new(p, m, l, FormKind::AntiDiagonal).unwrap();
        let b = FiniteHermSpace::new(p, m, l, FormKind::Identity).unwrap();
        assert_eq!(a.stratum_counts().unwrap(), b.stratum_counts().unwrap());
        assert_eq!(a.isotropic_lines().unwrap().len(), b.isotropic_lines().unwrap().len());
    }
}

#[test]
fn double_perp_is_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s = FiniteHermSpace::new(3, 2, 3, FormKind::AntiDiagonal).unwrap();
    let gf = s.field().clone();
    assert_eq!(s.perp(&s.whole()), s.zero());
    assert_eq!(s.perp(&s.zero()), s.whole());
    let mut moved = 0;
    for _ in 0..100 {
        let dim = rng.random_range(1..=2);
        let rows = (0..dim).map(|_| (0..3).map(|_| rng.random_range(0..gf.order())).collect()).collect();
        let u = s.subspace(rows);
        let pu = s.perp(&u);
        assert_eq!(pu.dim(), 3 - u.dim());
        assert_eq!(s.perp(&pu), s.tau(&u));
        moved += (s.tau(&u) != u) as usize;
    }
    assert!(moved > 50);
}

#[test]
fn stratification_partitions() {
    let s1 = FiniteHermSpace::new(3, 1, 3, FormKind::AntiDiagonal).unwrap();
    let c1 = s1.stratum_counts().unwrap();
    assert_eq!(c1.into_iter().collect::<Vec<_>>(), vec![(0, 28)]);
    for m in [2, 3] {
        let s = FiniteHermSpace::new(3, m, 3, FormKind::AntiDiagonal).unwrap();
        let c = s.stratum_counts().unwrap();
        let total: u64 = c.values().sum();
        assert_eq!(total as usize, s.enumerate_y().unwrap().len());
        assert_eq!(c[&0], 28);
        assert!(c.keys().all(|&d| d <= 1));
    }
    let s3 = FiniteHermSpace::new(3, 3, 3, FormKind::AntiDiagonal).unwrap();
    assert_eq!(s3.stratum_counts().unwrap()[&1], 892 - 28);
}

#[test]
fn base_field_l5_is_all_depth_zero() {
    let s = FiniteHermSpace::new(3, 1, 5, FormKind::AntiDiagonal).unwrap();
    let c = s.stratum_counts().unwrap();
    assert_eq!(c.len(), 1);
    assert!(c.contains_key(&0));
    let ys = s.enumerate_y().unwrap();
    assert!(ys.iter().all(|u| u.dim() == 3));
}

#[test]
fn isotropic_lines_counts() {
    for (p, n) in [(3, 28), (5, 126)] {
        let s = FiniteHermSpace::new(p, 1, 3, FormKind::AntiDiagonal).unwrap();
        let lines = s.isotropic_lines().unwrap();
        assert_eq!(lines.len(), n);
        for l in &lines {
            assert!(s.contains(&s.perp(l), l));
        }
    }
}

#[test]
fn sub_vertex_correspondence_counts() {
    let s = FiniteHermSpace::new(3, 1, 3, FormKind::AntiDiagonal).unwrap();
    assert_eq!(s.sub_vertex_correspondence(1).unwrap().len(), 28);
    assert_eq!(s.sub_vertex_correspondence(3).unwrap().len(), 1);
    // rational subspaces do not depend on the working extension
    let s2 = FiniteHermSpace::new(3, 2, 3, FormKind::AntiDiagonal).unwrap();
    assert_eq!(s2.sub_vertex_correspondence(1).unwrap().len(), 28);
    // no U with U^⊥ = U in odd dimension
    let s5 = FiniteHermSpace::new(3, 1, 5, FormKind::AntiDiagonal).unwrap();
    let c53 = s5.sub_vertex_correspondence(3).unwrap();
    let c51 = s5.sub_vertex_correspondence(1).unwrap();
    assert_eq!(s5.sub_vertex_correspondence(5).unwrap().len(), 1);
    assert!(!c53.is_empty() && !c51.is_empty());
}

#[test]
fn chart_curves_match_fermat() {
    for (p, m) in [(3, 1), (3, 2), (5, 1), (3, 3)] {
        let gf = Gf::new(p, 2 * m).unwrap();
        let g2 = gf.subfield_generator(2);
        let f = fermat_count(p, m).unwrap();
        for j in 0..(p * p - 1) as u64 {
            let lambda = gf.pow(g2, j);
            assert_eq!(chart_curve_count(&gf, lambda).unwrap(), f);
            assert_eq!(chart_points_at_infinity(&gf, lambda), vec![(1, 0)]);
            assert_eq!(chart_points(&gf, lambda).len() as u64, f - 1);
        }
    }
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ul_core::hermlattice::{check_d_i, random_lattice, tau_stabilize, vertex_type, HermitianLattice};
use ul_core::isocrystal::{j_frobenius_index, j_tilde, IsoVec, StandardModel};
use ul_core::strata::chart_points;
use ul_core::witt::make_context;
use ul_core::Error;

fn model(p: u64, m: u32) -> StandardModel {
    StandardModel::new(make_context(p, m, 12).unwrap())
}

fn random_vec(model: &StandardModel, rng: &mut ChaCha8Rng, denom: i32) -> IsoVec {
    let c = model.ctx();
    IsoVec { c: std::array::from_fn(|_| c.random(rng)), denom }
}

#[test]
fn standard_lattice_is_a_superspecial_point() {
    for (p, m) in [(3, 1), (3, 2), (5, 1)] {
        let md = model(p, m);
        let s = md.standard_superspecial();
        let r = md.verify_dieudonne(&s, 0).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r.volume, 0);
        assert!(md.is_superspecial(&s).unwrap());
        assert_eq!(vertex_type(&s.m0, 0).unwrap(), 1);
        assert!(check_d_i(&s.m0, 0).unwrap().satisfied());
        assert_eq!(md.m1_from_m0(&s.m0, 0).unwrap(), s.m1);
    }
}

#[test]
fn operator_identities_on_random_vectors() {
    let md = model(3, 2);
    let c = md.ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for j in 0..6 {
        for k in 0..6 {
            let (x, y) = (md.basis_vector(j), md.basis_vector(k));
            let lhs = md.pairing(&md.apply_f(&x), &y);
            let rhs = md.pairing(&x, &md.apply_v(&y));
            assert_eq!(lhs.0, c.frobenius(&rhs.0));
        }
    }
    for _ in 0..50 {
        let x = random_vec(&md, &mut rng, 0);
        let y = random_vec(&md, &mut rng, 0);
        let w = c.random(&mut rng);
        assert_eq!(md.apply_f(&md.apply_v(&x)).c, x.c.map(|a| c.shl(&a, 1)));
        assert_eq!(md.apply_v(&md.apply_f(&x)).c, x.c.map(|a| c.shl(&a, 1)));
        assert_eq!(md.pairing(&md.apply_f(&x), &y).0, c.frobenius(&md.pairing(&x, &md.apply_v(&y)).0));
        // semilinearity
        let wx = IsoVec { c: x.c.map(|a| c.mul(&w, &a)), denom: 0 };
        let fw = md.apply_f(&wx);
        assert_eq!(fw.c, md.apply_f(&x).c.map(|a| c.mul(&c.frobenius(&w), &a)));
        let vw = md.apply_v(&wx);
        assert_eq!(vw.c, md.apply_v(&x).c.map(|a| c.mul(&c.frobenius_inv(&w), &a)));
        // τ acts coordinatewise by σ² on this basis (V^{-1} = p^{-1}F costs the top digit)
        let tx = md.apply_tau(&x);
        assert_eq!(tx.denom, 0);
        assert_eq!(tx.c.map(|a| c.shl(&a, 1)), x.c.map(|a| c.shl(&c.tau(&a), 1)));
        // pairing is alternating and N0, N1 are isotropic
        assert!(c.is_zero(&md.pairing(&x, &x).0));
        let mut x0 = x;
        let mut y0 = y;
        for i in 3..6 {
            x0.c[i] = c.zero();
            y0.c[i] = c.zero();
        }
        assert!(c.is_zero(&md.pairing(&x0, &y0).0));
        // {x, y} = ⟨x, Fy⟩ on N0 is the gram t·diag(p,1,p)
        let hv = md.pairing(&x0, &md.apply_f(&y0)).0;
        assert_eq!(hv, md.n0().pairing(&x0.c[..3], &y0.c[..3]));
    }
}

#[test]
fn j_neighbors_of_standard_lattice() {
    for p in [3u64, 5] {
        let md = model(p, 1);
        let gf = md.residue_field();
        let s = md.standard_superspecial();
        let reps = j_tilde(gf);
        assert_eq!(reps.len() as u64, p + 1);
        let sig = j_frobenius_index(gf, &reps);
        assert!(sig.iter().enumerate().all(|(i, &j)| sig[j] == i), "σ is an involution on J̃");
        let mut keys = std::collections::BTreeSet::new();
        for &(l, m) in &reps {
            let lam = md.neighbor_lattice_j(&s, l, m).unwrap();
            assert_eq!(vertex_type(&lam, 0).unwrap(), 3);
            assert!(lam.contains(&s.m0).unwrap());
            keys.insert(lam.key());
            // rescaling the pair does not change the lattice
            let g = gf.subfield_generator(2);
            assert_eq!(md.neighbor_lattice_j(&s, gf.mul(g, l), gf.mul(g, m)).unwrap(), lam);
        }
        assert_eq!(keys.len() as u64, p + 1);
        assert_eq!(md.neighbor_lattice_j(&s, 1, 0).unwrap_err(), Error::NotInJ);
    }
}

#[test]
fn chart_lattices_over_f81_are_dieudonne() {
    let md = model(3, 2);
    let gf = md.residue_field();
    let s = md.standard_superspecial();
    for &(l, m) in &j_tilde(gf) {
        let lam = md.neighbor_lattice_j(&s, l, m).unwrap();
        let pts = chart_points(gf, l);
        assert_eq!(pts.len(), 27);
        let mut keys = std::collections::BTreeSet::new();
        for (a, b) in pts {
            let ml = md.build_m_ab((l, m), a, b).unwrap();
            let r = md.verify_dieudonne(&ml.lattice, 0).unwrap();
            assert!(r.passed(), "(a,b)=({a},{b}): {:?}", r.failures());
            assert!(md.check_v_basis(&ml).unwrap());
            assert!(lam.contains(&ml.lattice.m0).unwrap());
            assert!(md.m0_in_d_i(&ml.lattice).unwrap());
            assert!(md.is_superspecial(&ml.lattice).unwrap());
            keys.insert(ml.lattice.m0.key());
        }
        assert_eq!(keys.len(), 27, "distinct chart points give distinct lattices");
    }
    let zero = md.build_m_ab(j_tilde(gf)[0], 0, 0).unwrap();
    assert_eq!(zero.lattice, s);
}

#[test]
fn non_rational_chart_points_are_not_superspecial() {
    // over F_81 every chart point is F_9-rational; F_729 has the others
    let md = model(3, 3);
    let gf = md.residue_field();
    let (l, m) = j_tilde(gf)[1];
    let pts = chart_points(gf, l);
    assert_eq!(pts.len(), 891);
    let mut seen = [0usize; 2];
    for (a, b) in pts {
        let ml = md.build_m_ab((l, m), a, b).unwrap();
        let rational = gf.in_subfield(a, 2) && gf.in_subfield(b, 2);
        assert_eq!(md.is_superspecial(&ml.lattice).unwrap(), rational);
        let st = tau_stabilize(&ml.lattice.m0, 0, 2).unwrap();
        assert_eq!(st.d, if rational { 0 } else { 1 });
        assert_eq!(vertex_type(&st.lattice, 0).unwrap(), 2 * st.d as u32 + 1);
        seen[rational as usize] += 1;
        let r = md.verify_dieudonne(&ml.lattice, 0).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
    }
    assert_eq!(seen, [864, 27]);
}

#[test]
fn chart_and_membership_errors() {
    let md = model(3, 1);
    let gf = md.residue_field();
    let rep = j_tilde(gf)[0];
    assert_eq!(md.build_m_ab(rep, 1, 1).unwrap_err(), Error::ChartViolation);
    assert_eq!(md.build_m_ab((1, 0), 0, 0).unwrap_err(), Error::NotInJ);
}

#[test]
fn constructed_violations_and_scaling() {
    let md = model(3, 2);
    let gf = md.residue_field();
    let rep = j_tilde(gf)[2];
    let (a, b) = chart_points(gf, rep.0)[5];
    let m = md.build_m_ab(rep, a, b).unwrap().lattice;
    let mut broken = m.clone();
    broken.m1 = broken.m1.scale(1);
    let r = md.verify_dieudonne(&broken, 0).unwrap();
    assert_eq!(r.item("FM1 = p^{i+1} M0^∨"), Some(false));
    let mut scaled = m.clone();
    scaled.m0 = m.m0.scale(1);
    scaled.m1 = m.m1.scale(1);
    let r = md.verify_dieudonne(&scaled, 2).unwrap();
    assert!(r.passed(), "{:?}", r.failures());
    assert_eq!(r.volume, 6);
}

#[test]
fn odd_heights_always_fail_the_volume_check() {
    let md = model(3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..100 {
        let i = [-1, 1, 3][k % 3];
        let m0 = random_lattice(md.n0(), 2, rand::Rng::random_range(&mut rng, -1..=1), &mut rng);
        let m = md.lattice_from_m0(m0, i).unwrap();
        let r = md.verify_dieudonne(&m, i).unwrap();
        assert!(!r.passed());
        let vol_ok = r.items.iter().filter(|it| it.0.starts_with("volume")).all(|it| it.1);
        assert!(!vol_ok);
    }
    // the standard lattice is still valid at even heights after scaling
    let s = md.standard_superspecial();
    let m = md.lattice_from_m0(HermitianLattice::scale(&s.m0, 2), 4).unwrap();
    assert!(md.verify_dieudonne(&m, 4).unwrap().passed());
}

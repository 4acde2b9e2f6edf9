//! The standard supersingular isocrystal of GU(1,2) and its Dieudonné
//! lattices.
//!
//! Basis e1, e2, e3 (spanning N0) and f1, f2, f3 (spanning N1) with
//!
//! ```text
//! F: e1 ↦ p f1, e2 ↦ f2, e3 ↦ p f3, f1 ↦ e1, f2 ↦ p e2, f3 ↦ e3
//! ```
//!
//! σ-semilinear, V = pF^{-1} with the same matrix but σ^{-1}-semilinear,
//! and ⟨e_i, f_j⟩ = −⟨f_j, e_i⟩ = t δ_ij. The hermitian form on N0 is
//! {x, y} = ⟨x, Fy⟩, with gram t·diag(p, 1, p).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Fe, Gf};
use crate::hermlattice::{
    check_d_i, gram_schmidt_normalize, index, ChainReport, HermitianLattice, HermitianSpace,
};
use crate::mat::Mat;
use crate::witt::{Ctx, Witt};

/// The representative set J̃ = {(1, μ) : μ^{p+1} = −1}, μ in generator-power
/// order of F_{p^2}. Frobenius maps it to itself.
pub fn j_tilde(gf: &Gf) -> Vec<(Fe, Fe)> {
    let p = gf.p() as u64;
    let minus_one = gf.neg(1);
    gf.subfield_elements(2)
        .into_iter()
        .skip(1)
        .filter(|&mu| gf.pow(mu, p + 1) == minus_one)
        .map(|mu| (1, mu))
        .collect()
}

/// σ(i): the index j with (λ_i^p, μ_i^p) = (λ_j, μ_j).
pub fn j_frobenius_index(gf: &Gf, reps: &[(Fe, Fe)]) -> Vec<usize> {
    reps.iter()
        .map(|&(l, m)| {
            let img = (gf.frob(l), gf.frob(m));
            reps.iter().position(|&r| r == img).expect("representative set is Frobenius-stable")
        })
        .collect()
}

pub fn in_j(gf: &Gf, lambda: Fe, mu: Fe) -> bool {
    let p = gf.p() as u64;
    (lambda, mu) != (0, 0) && gf.add(gf.pow(lambda, p + 1), gf.pow(mu, p + 1)) == 0
}

/// a^p λ^p + a λ − b^{p+1} λ^{p+1}.
pub fn chart_equation(gf: &Gf, lambda: Fe, a: Fe, b: Fe) -> Fe {
    let p = gf.p() as u64;
    let lhs = gf.add(gf.mul(gf.pow(a, p), gf.pow(lambda, p)), gf.mul(a, lambda));
    gf.sub(lhs, gf.mul(gf.pow(b, p + 1), gf.pow(lambda, p + 1)))
}

/// Vector p^{-denom}·(c_e1, c_e2, c_e3, c_f1, c_f2, c_f3) of the isocrystal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsoVec {
    pub c: [Witt; 6],
    pub denom: i32,
}

pub struct StandardModel {
    ctx: Ctx,
    t: Witt,
    n0: Arc<HermitianSpace>,
    n1: Arc<HermitianSpace>,
}

/// A Dieudonné lattice M = M0 ⊕ M1 (M0 in e-coordinates, M1 in f-coordinates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DieudonneLattice {
    pub m0: HermitianLattice,
    pub m1: HermitianLattice,
    pub i: i32,
}

/// Itemized outcome of [`StandardModel::verify_dieudonne`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct DieudonneReport {
    pub items: Vec<(String, bool)>,
    pub volume: i64,
    pub chains: ChainReport,
}

impl DieudonneReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.1)
    }
    pub fn item(&self, name: &str) -> Option<bool> {
        self.items.iter().find(|i| i.0 == name).map(|i| i.1)
    }
    pub fn failures(&self) -> Vec<&str> {
        self.items.iter().filter(|i| !i.1).map(|i| i.0.as_str()).collect()
    }
}

/// M_{a,b} together with the vectors of its defining basis, stored as
/// integral columns p·ẽ_j (e-coordinates) and p·f̃_j (f-coordinates).
#[derive(Clone, Debug)]
pub struct ChartLattice {
    pub lattice: DieudonneLattice,
    pub e_tilde: Mat,
    pub f_tilde: Mat,
}

fn diag3(ctx: &Ctx, e: [u32; 3]) -> Mat {
    Mat::diag(&e.map(|v| ctx.p_pow(v)))
}

impl StandardModel {
    pub fn new(ctx: Ctx) -> Self {
        let t = ctx.skew_unit();
        let n0 = HermitianSpace::scaled_diagonal(ctx.clone(), &[1, 0, 1]);
        let n1 = HermitianSpace::scaled_diagonal(ctx.clone(), &[0, 1, 0]);
        StandardModel { ctx, t, n0, n1 }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    pub fn t(&self) -> Witt {
        self.t
    }
    pub fn n0(&self) -> &Arc<HermitianSpace> {
        &self.n0
    }
    pub fn n1(&self) -> &Arc<HermitianSpace> {
        &self.n1
    }
    pub fn residue_field(&self) -> &Gf {
        self.ctx.residue_field()
    }

    /// Matrix of F (and V) on the basis e1..e3, f1..f3: column j is the
    /// image of the j-th basis vector.
    pub fn f_matrix(&self) -> Mat {
        let c = &self.ctx;
        let mut m = Mat::zeros(6, 6);
        let p1 = c.p_pow(1);
        m[(3, 0)] = p1;
        m[(4, 1)] = c.one();
        m[(5, 2)] = p1;
        m[(0, 3)] = c.one();
        m[(1, 4)] = p1;
        m[(2, 5)] = c.one();
        m
    }

    fn normalize(&self, mut v: IsoVec) -> IsoVec {
        while v.denom > 0 && v.c.iter().all(|a| self.ctx.valuation(a) >= 1) {
            for a in v.c.iter_mut() {
                *a = self.ctx.div_p_pow(a, 1).unwrap();
            }
            v.denom -= 1;
        }
        v
    }

    fn semilinear(&self, v: &IsoVec, j: i64) -> IsoVec {
        let c = &self.ctx;
        let s: Vec<Witt> = v.c.iter().map(|a| c.frob_pow(a, j)).collect();
        let m = self.f_matrix();
        let out = m.apply(c, &s);
        IsoVec { c: out.try_into().unwrap(), denom: v.denom }
    }

    /// σ-semilinear F.
    pub fn apply_f(&self, v: &IsoVec) -> IsoVec {
        self.semilinear(v, 1)
    }

    /// σ^{-1}-semilinear V.
    pub fn apply_v(&self, v: &IsoVec) -> IsoVec {
        self.semilinear(v, -1)
    }

    /// V^{-1} = p^{-1}F.
    pub fn apply_v_inv(&self, v: &IsoVec) -> IsoVec {
        let mut w = self.apply_f(v);
        w.denom += 1;
        self.normalize(w)
    }

    /// τ = V^{-1}F.
    pub fn apply_tau(&self, v: &IsoVec) -> IsoVec {
        self.apply_v_inv(&self.apply_f(v))
    }

    /// ⟨x, y⟩ as (value, d) meaning p^{-d}·value.
    pub fn pairing(&self, x: &IsoVec, y: &IsoVec) -> (Witt, i32) {
        let c = &self.ctx;
        let mut acc = c.zero();
        for i in 0..3 {
            acc = c.add(&acc, &c.mul(&x.c[i], &y.c[i + 3]));
            acc = c.sub(&acc, &c.mul(&x.c[i + 3], &y.c[i]));
        }
        (c.mul(&self.t, &acc), x.denom + y.denom)
    }

    pub fn basis_vector(&self, j: usize) -> IsoVec {
        let mut c = [self.ctx.zero(); 6];
        c[j] = self.ctx.one();
        IsoVec { c, denom: 0 }
    }

    // --- lattice maps -------------------------------------------------

    /// F(L) ⊂ N1 for L ⊂ N0.
    pub fn f_on_n0(&self, l: &HermitianLattice) -> Result<HermitianLattice> {
        l.image(&self.n1, &diag3(&self.ctx, [1, 0, 1]), 0, 1)
    }
    /// F(L) ⊂ N0 for L ⊂ N1.
    pub fn f_on_n1(&self, l: &HermitianLattice) -> Result<HermitianLattice> {
        l.image(&self.n0, &diag3(&self.ctx, [0, 1, 0]), 0, 1)
    }
    pub fn v_on_n0(&self, l: &HermitianLattice) -> Result<HermitianLattice> {
        l.image(&self.n1, &diag3(&self.ctx, [1, 0, 1]), 0, -1)
    }
    pub fn v_on_n1(&self, l: &HermitianLattice) -> Result<HermitianLattice> {
        l.image(&self.n0, &diag3(&self.ctx, [0, 1, 0]), 0, -1)
    }
    /// F^{-1}(L) ⊂ N1 for L ⊂ N0.
    pub fn f_inv_on_n0(&self, l: &HermitianLattice) -> Result<HermitianLattice> {
        l.image(&self.n1, &diag3(&self.ctx, [1, 0, 1]), 1, -1)
    }

    /// M1 = F^{-1}(p^{i+1} M0^∨).
    pub fn m1_from_m0(&self, m0: &HermitianLattice, i: i32) -> Result<HermitianLattice> {
        self.f_inv_on_n0(&m0.dual()?.scale(i + 1))
    }

    pub fn lattice_from_m0(&self, m0: HermitianLattice, i: i32) -> Result<DieudonneLattice> {
        let m1 = self.m1_from_m0(&m0, i)?;
        Ok(DieudonneLattice { m0, m1, i })
    }

    pub fn standard_superspecial(&self) -> DieudonneLattice {
        DieudonneLattice {
            m0: HermitianLattice::standard(&self.n0),
            m1: HermitianLattice::standard(&self.n1),
            i: 0,
        }
    }

    pub fn is_superspecial(&self, m: &DieudonneLattice) -> Result<bool> {
        m.m0.is_tau_invariant()
    }

    /// Full check that M is a polarized Dieudonné lattice at height i.
    pub fn verify_dieudonne(&self, m: &DieudonneLattice, i: i32) -> Result<DieudonneReport> {
        let std0 = HermitianLattice::standard(&self.n0);
        let std1 = HermitianLattice::standard(&self.n1);
        let fm0 = self.f_on_n0(&m.m0)?;
        let fm1 = self.f_on_n1(&m.m1)?;
        let vm0 = self.v_on_n0(&m.m0)?;
        let vm1 = self.v_on_n1(&m.m1)?;
        let mut r = DieudonneReport::default();
        r.items.push(("F(M0) ⊂ M1".into(), m.m1.contains(&fm0)?));
        r.items.push(("F(M1) ⊂ M0".into(), m.m0.contains(&fm1)?));
        r.items.push(("V(M0) ⊂ M1".into(), m.m1.contains(&vm0)?));
        r.items.push(("V(M1) ⊂ M0".into(), m.m0.contains(&vm1)?));
        let mut ch = ChainReport::default();
        ch.push("pM0", &m.m0.scale(1), "FM1", &fm1, 2)?;
        ch.push("FM1", &fm1, "M0", &m.m0, 1)?;
        ch.push("pM1", &m.m1.scale(1), "FM0", &fm0, 1)?;
        ch.push("FM0", &fm0, "M1", &m.m1, 2)?;
        r.items.push(("chains (r,s) = (1,2)".into(), ch.satisfied()));
        r.chains = ch;
        let dual_side = m.m0.dual()?.scale(i + 1);
        r.items.push(("FM1 = p^{i+1} M0^∨".into(), fm1 == dual_side));
        let v0 = index(&m.m0, &std0);
        let v1 = index(&m.m1, &std1);
        r.volume = v0 + v1;
        r.items.push((format!("volume = 3i = {}", 3 * i), r.volume == 3 * i as i64));
        r.items.push(("volume = 2[std0 : M0]".into(), r.volume == 2 * v0));
        Ok(r)
    }

    /// Λ = M0 + p^{-1}([λ]b1 + [μ]b3) for a basis b of M0 with gram
    /// t·diag(p, 1, p): the standard basis when M0 is the standard lattice,
    /// a Gram–Schmidt basis otherwise.
    pub fn neighbor_lattice_j(&self, m: &DieudonneLattice, lambda: Fe, mu: Fe) -> Result<HermitianLattice> {
        let gf = self.residue_field();
        if !in_j(gf, lambda, mu) {
            return Err(Error::NotInJ);
        }
        let std0 = HermitianLattice::standard(&self.n0);
        let (basis, denom) = if m.m0 == std0 {
            (Mat::identity(&self.ctx, 3), 0)
        } else {
            let nb = gram_schmidt_normalize(&m.m0, 1, 2)?.permuted(&[1, 0, 2]);
            (nb.cols, nb.denom)
        };
        j_neighbor(&self.n0, &basis, denom, self.ctx.teichmuller(lambda), self.ctx.teichmuller(mu))
    }

    /// The lattice M_{a,b} attached to the chart point (a, b) of the
    /// representative (λ, μ).
    pub fn build_m_ab(&self, rep: (Fe, Fe), a: Fe, b: Fe) -> Result<ChartLattice> {
        let gf = self.residue_field();
        let c = &self.ctx;
        let (lambda, mu) = rep;
        if lambda == 0 || !in_j(gf, lambda, mu) {
            return Err(Error::NotInJ);
        }
        if chart_equation(gf, lambda, a, b) != 0 {
            return Err(Error::ChartViolation);
        }
        let p = gf.p() as u64;
        let cc = gf.neg(gf.mul(gf.mul(lambda, gf.inv(mu)), a));
        let b_root = gf.frob_inv(b);
        let b_pp = gf.mul(b, b_root);
        let lp = gf.pow(lambda, p);
        let mp = gf.pow(mu, p);
        let tm = |x: Fe| c.teichmuller(x);
        let pw = |w: Witt| c.shl(&w, 1);
        // p·e_{λμ} and p·f_{λμ}
        let e_lm = [tm(lambda), c.zero(), tm(mu)];
        let f_lm = [tm(lp), c.zero(), tm(mp)];
        let axpy = |v: &mut [Witt; 3], s: Witt, w: &[Witt; 3]| {
            for k in 0..3 {
                v[k] = c.add(&v[k], &c.mul(&s, &w[k]));
            }
        };
        let mut e1 = [pw(c.one()), c.neg(&pw(tm(gf.mul(b_root, lp)))), c.zero()];
        axpy(&mut e1, c.sub(&tm(a), &tm(gf.mul(b_pp, lp))), &e_lm);
        let mut e2 = [c.zero(), pw(c.one()), c.zero()];
        axpy(&mut e2, tm(b), &e_lm);
        let mut e3 = [c.zero(), c.neg(&pw(tm(gf.mul(b_root, mp)))), pw(c.one())];
        axpy(&mut e3, c.sub(&tm(cc), &tm(gf.mul(b_pp, mp))), &e_lm);

        let l1p = gf.inv(gf.pow(lambda, p - 1));
        let m1p = gf.inv(gf.pow(mu, p - 1));
        let mut f1 = [pw(c.one()), c.neg(&tm(gf.mul(b, lambda))), c.zero()];
        axpy(&mut f1, c.neg(&tm(gf.mul(a, l1p))), &f_lm);
        let mut f2 = [c.zero(), pw(c.one()), c.zero()];
        axpy(&mut f2, pw(tm(b_root)), &f_lm);
        let mut f3 = [c.zero(), c.neg(&tm(gf.mul(b, mu))), pw(c.one())];
        axpy(&mut f3, c.neg(&tm(gf.mul(cc, m1p))), &f_lm);

        let e_tilde = Mat::from_cols(3, &[e1.to_vec(), e2.to_vec(), e3.to_vec()]);
        let f_tilde = Mat::from_cols(3, &[f1.to_vec(), f2.to_vec(), f3.to_vec()]);
        let m0 = HermitianLattice::from_generators(&self.n0, &e_tilde, 1)?;
        let m1 = HermitianLattice::from_generators(&self.n1, &f_tilde, 1)?;
        Ok(ChartLattice { lattice: DieudonneLattice { m0, m1, i: 0 }, e_tilde, f_tilde })
    }

    /// V(M) = ⟨ẽ1, pẽ2, ẽ3, pf̃1, f̃2, pf̃3⟩.
    pub fn check_v_basis(&self, m: &ChartLattice) -> Result<bool> {
        let c = &self.ctx;
        let scale_col = |x: &Mat, j: usize| {
            let mut y = x.clone();
            for i in 0..3 {
                y[(i, j)] = c.shl(&y[(i, j)], 1);
            }
            y
        };
        let want_v_m1 = HermitianLattice::from_generators(&self.n0, &scale_col(&m.e_tilde, 1), 1)?;
        let f = scale_col(&scale_col(&m.f_tilde, 0), 2);
        let want_v_m0 = HermitianLattice::from_generators(&self.n1, &f, 1)?;
        Ok(self.v_on_n1(&m.lattice.m1)? == want_v_m1 && self.v_on_n0(&m.lattice.m0)? == want_v_m0)
    }

    /// D_i membership of M0 (the chain p^{i+1}M0^∨ ⊂^1 M0 ⊂^2 p^iM0^∨).
    pub fn m0_in_d_i(&self, m: &DieudonneLattice) -> Result<bool> {
        Ok(check_d_i(&m.m0, m.i)?.satisfied())
    }
}

/// Λ = span(b) + p^{-1}([λ]b1 + [μ]b3) for a basis p^{-denom}·basis whose
/// gram is t·diag(p, 1, p).
pub fn j_neighbor(
    space: &Arc<HermitianSpace>,
    basis: &Mat,
    denom: i32,
    lambda: Witt,
    mu: Witt,
) -> Result<HermitianLattice> {
    let c = space.ctx();
    let v: Vec<Witt> = (0..3).map(|i| c.add(&c.mul(&lambda, &basis[(i, 0)]), &c.mul(&mu, &basis[(i, 2)]))).collect();
    let gens = basis.shl(c, 1).hconcat(&Mat::from_cols(3, &[v]));
    HermitianLattice::from_generators(space, &gens, denom + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::make_context;

    #[test]
    fn j_tilde_has_p_plus_one_elements() {
        for p in [3u64, 5, 7] {
            let ctx = make_context(p, 1, 4).unwrap();
            let gf = ctx.residue_field();
            let j = j_tilde(gf);
            assert_eq!(j.len() as u64, p + 1);
            assert!(j.iter().all(|&(l, m)| in_j(gf, l, m)));
            let s = j_frobenius_index(gf, &j);
            let mut sorted = s.clone();
            sorted.sort();
            assert_eq!(sorted, (0..j.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn f_v_tau_on_basis() {
        let model = StandardModel::new(make_context(3, 2, 8).unwrap());
        for j in 0..6 {
            let v = model.basis_vector(j);
            let fv = model.apply_f(&model.apply_v(&v));
            let mut pv = v;
            pv.c[j] = model.ctx().p_pow(1);
            assert_eq!(fv, pv);
            assert_eq!(model.apply_tau(&v), v);
        }
    }
}

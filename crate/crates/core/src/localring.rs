//! Local models at a superspecial point: the rings A′, R_M and the curve
//! charts R_i over F_{p^2}, with tangent data and bounded-degree ideal
//! membership by exact linear algebra.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Fe, Gf};
use crate::isocrystal::j_tilde;
use crate::poly::{grevlex, monomials_up_to, Monomial, Poly};
use crate::strata::rref;
use crate::witt::max_enum;

/// Generators of an ideal together with variable names and a label per
/// generator.
#[derive(Clone, Debug)]
pub struct IdealPresentation {
    pub vars: Vec<String>,
    pub gens: Vec<Poly>,
    pub labels: Vec<String>,
}

impl IdealPresentation {
    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn subset(&self, idx: &[usize]) -> IdealPresentation {
        IdealPresentation {
            vars: self.vars.clone(),
            gens: idx.iter().map(|&i| self.gens[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// f = Σ cofactors[k]·gens[k], recomputed and confirmed.
    Member { cofactors: Vec<Poly>, degree_bound: u32 },
    Unknown { degree_bound: u32 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Machine-readable outcome of one check.
#[derive(Clone, Debug, Serialize)]
pub struct LocalringReport {
    pub check: String,
    pub p: u64,
    pub result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobian_rank: Option<usize>,
}

pub struct LocalModel {
    gf: Arc<Gf>,
    reps: Vec<(Fe, Fe)>,
}

impl LocalModel {
    /// Coefficients in F_{p^2} ⊂ F_{p^{2m}}; m > 1 only matters for evaluating
    /// at points over larger fields.
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenPrime);
        }
        let gf = Arc::new(Gf::new(p, 2 * m)?);
        let reps = j_tilde(&gf);
        Ok(LocalModel { gf, reps })
    }

    pub fn field(&self) -> &Gf {
        &self.gf
    }
    pub fn p(&self) -> u32 {
        self.gf.p()
    }
    pub fn reps(&self) -> &[(Fe, Fe)] {
        &self.reps
    }

    fn ipow(&self, a: Fe, e: i64) -> Fe {
        let f = &self.gf;
        if e >= 0 {
            f.pow(a, e as u64)
        } else {
            f.inv(f.pow(a, (-e) as u64))
        }
    }

    fn n(&self) -> usize {
        self.reps.len()
    }

    /// Variables a_0..a_p, x, y.
    pub fn r_vars(&self) -> Vec<String> {
        let mut v: Vec<String> = (0..self.n()).map(|i| format!("a{i}")).collect();
        v.push("x".into());
        v.push("y".into());
        v
    }

    pub fn g_k(&self, k: u32) -> Poly {
        let f = &self.gf;
        let (n, p) = (self.n() + 2, self.p() as i64);
        let k = k as i64;
        let mut g = Poly::zero(n);
        for (i, &(l, m)) in self.reps.iter().enumerate() {
            let ai = Poly::var(n, i);
            let c1 = f.mul(self.ipow(l, p - k), self.ipow(m, k));
            let c2 = f.mul(self.ipow(l, 1 - k), self.ipow(m, k));
            g = g.add(f, &ai.pow(f, p as u32).scale(f, c1)).add(f, &ai.scale(f, c2));
        }
        let mut mono = vec![0; n];
        mono[n - 2] = (p + 1 - k) as u16;
        mono[n - 1] = k as u16;
        g.sub(f, &Poly::term(n, 1, mono))
    }

    /// λ_i y − μ_i x.
    pub fn line(&self, i: usize) -> Poly {
        let f = &self.gf;
        let n = self.n() + 2;
        let (l, m) = self.reps[i];
        Poly::var(n, n - 1).scale(f, l).sub(f, &Poly::var(n, n - 2).scale(f, m))
    }

    /// ∏ (λ_i y − μ_i x).
    pub fn product_of_lines(&self) -> Poly {
        let f = &self.gf;
        (0..self.n()).fold(Poly::constant(self.n() + 2, 1), |acc, i| acc.mul(f, &self.line(i)))
    }

    /// The ideal (g_k)_{0≤k≤p}.
    pub fn gk_ideal(&self) -> IdealPresentation {
        let gens = (0..=self.p()).map(|k| self.g_k(k)).collect();
        let labels = (0..=self.p()).map(|k| format!("g{k}")).collect();
        IdealPresentation { vars: self.r_vars(), gens, labels }
    }

    /// R_M: (x^{p+1}+y^{p+1}, a_i a_j, a_i(λ_i y − μ_i x), g_k).
    pub fn build_rm(&self) -> IdealPresentation {
        let f = &self.gf;
        let n = self.n() + 2;
        let p = self.p();
        let mut id = self.gk_ideal();
        let x = Poly::var(n, n - 2);
        let y = Poly::var(n, n - 1);
        id.gens.push(x.pow(f, p + 1).add(f, &y.pow(f, p + 1)));
        id.labels.push("x^(p+1)+y^(p+1)".into());
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                id.gens.push(Poly::var(n, i).mul(f, &Poly::var(n, j)));
                id.labels.push(format!("a{i}*a{j}"));
            }
        }
        for i in 0..self.n() {
            id.gens.push(Poly::var(n, i).mul(f, &self.line(i)));
            id.labels.push(format!("a{i}*(l{i}*y-m{i}*x)"));
        }
        id
    }

    /// h(a, b) = a^p λ^p + a λ − b^{p+1} λ^{p+1} in variables (a, b) at the
    /// given positions of an n-variable ring.
    fn h_poly(&self, i: usize, n: usize, a: usize, b: usize) -> Poly {
        let f = &self.gf;
        let p = self.p();
        let l = self.reps[i].0;
        let av = Poly::var(n, a);
        let bv = Poly::var(n, b);
        av.pow(f, p)
            .scale(f, f.pow(l, p as u64))
            .add(f, &av.scale(f, l))
            .sub(f, &bv.pow(f, p + 1).scale(f, f.pow(l, p as u64 + 1)))
    }

    /// A′ = A/(h_i, a_i a_j, a_i b_j, b_i b_j) with variables a_0..a_p, b_0..b_p.
    pub fn build_a_prime(&self) -> IdealPresentation {
        let f = &self.gf;
        let k = self.n();
        let n = 2 * k;
        let mut vars: Vec<String> = (0..k).map(|i| format!("a{i}")).collect();
        vars.extend((0..k).map(|i| format!("b{i}")));
        let mut gens = Vec::new();
        let mut labels = Vec::new();
        for i in 0..k {
            gens.push(self.h_poly(i, n, i, k + i));
            labels.push(format!("h{i}"));
        }
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                if i < j {
                    gens.push(Poly::var(n, i).mul(f, &Poly::var(n, j)));
                    labels.push(format!("a{i}*a{j}"));
                    gens.push(Poly::var(n, k + i).mul(f, &Poly::var(n, k + j)));
                    labels.push(format!("b{i}*b{j}"));
                }
                gens.push(Poly::var(n, i).mul(f, &Poly::var(n, k + j)));
                labels.push(format!("a{i}*b{j}"));
            }
        }
        IdealPresentation { vars, gens, labels }
    }

    /// R_i = F[a, b]/(h_i).
    pub fn build_r_i(&self, i: usize) -> IdealPresentation {
        IdealPresentation { vars: vec!["a".into(), "b".into()], gens: vec![self.h_poly(i, 2, 0, 1)], labels: vec![format!("h{i}")] }
    }

    /// Rows [λ_i^{1−k} μ_i^k]_{k, i}.
    pub fn vandermonde_matrix(&self, reps: &[(Fe, Fe)]) -> Vec<Vec<Fe>> {
        let f = &self.gf;
        (0..=self.p() as i64)
            .map(|k| reps.iter().map(|&(l, m)| f.mul(self.ipow(l, 1 - k), self.ipow(m, k))).collect())
            .collect()
    }

    pub fn check_vandermonde_rank(&self, reps: &[(Fe, Fe)]) -> usize {
        rref(&self.gf, self.vandermonde_matrix(reps)).len()
    }

    /// Both sides of (λ_i^{-1}μ_i)^k h_i = a^pλ^{p−k}μ^k + aλ^{1−k}μ^k − (bλ)^{p+1−k}(bμ)^k.
    pub fn eta_identity_sides(&self, i: usize, k: u32) -> (Poly, Poly) {
        let f = &self.gf;
        let (l, m) = self.reps[i];
        let (p, k) = (self.p() as i64, k as i64);
        let a = Poly::var(2, 0);
        let b = Poly::var(2, 1);
        let lhs = self.h_poly(i, 2, 0, 1).scale(f, self.ipow(f.mul(f.inv(l), m), k));
        let bl = b.scale(f, l).pow(f, (p + 1 - k) as u32);
        let bm = b.scale(f, m).pow(f, k as u32);
        let rhs = a
            .pow(f, p as u32)
            .scale(f, f.mul(self.ipow(l, p - k), self.ipow(m, k)))
            .add(f, &a.scale(f, f.mul(self.ipow(l, 1 - k), self.ipow(m, k))))
            .sub(f, &bl.mul(f, &bm));
        (lhs, rhs)
    }

    pub fn check_eta_identity(&self, i: usize) -> bool {
        (0..=self.p()).all(|k| {
            let (l, r) = self.eta_identity_sides(i, k);
            l == r
        })
    }

    /// Image of an R_M generator under a_j ↦ 0 (j ≠ i), y ↦ λ_i^{-1}μ_i x.
    pub fn restrict_to_component(&self, g: &Poly, i: usize) -> Poly {
        let f = &self.gf;
        let n = self.n() + 2;
        let (l, m) = self.reps[i];
        let mut out = g.clone();
        for j in (0..self.n()).filter(|&j| j != i) {
            out = out.substitute(f, j, &Poly::zero(n));
        }
        out.substitute(f, n - 1, &Poly::var(n, n - 2).scale(f, f.mul(f.inv(l), m)))
    }

    /// h_i(a_i, λ_i^{-1}x) = a_i^pλ_i^p + a_iλ_i − x^{p+1}.
    pub fn component_h(&self, i: usize) -> Poly {
        let n = self.n() + 2;
        let f = &self.gf;
        let h = self.h_poly(i, n, i, n - 2);
        h.substitute(f, n - 2, &Poly::var(n, n - 2).scale(f, f.inv(self.reps[i].0)))
    }

    /// Every generator of R_M restricted to component i is divisible by
    /// h_i(a_i, λ_i^{-1}x), and h_i itself is the image of g_0.
    pub fn component_substitution_check(&self, i: usize) -> bool {
        let f = &self.gf;
        let n = self.n() + 2;
        let h = self.component_h(i);
        let prio: Vec<usize> = std::iter::once(i).chain([n - 2]).collect();
        let images: Vec<Poly> = self.build_rm().gens.iter().map(|g| self.restrict_to_component(g, i)).collect();
        let divisible = images.iter().all(|im| im.divide_lex(f, &h, &prio).1.is_zero());
        let reaches = images.iter().any(|im| !im.is_zero() && im.divide_lex(f, &h, &prio).0.degree() == Some(0));
        divisible && reaches
    }

    /// A point of Z(R_M) over F_{p^2} with x = 1, or None. Certified by
    /// evaluating every generator.
    pub fn point_with_x_nonzero(&self) -> Option<Vec<Fe>> {
        let f = &self.gf;
        let n = self.n() + 2;
        let rm = self.build_rm();
        for (i, &(l, m)) in self.reps.iter().enumerate() {
            for a in f.subfield_elements(2) {
                let mut pt = vec![0; n];
                pt[i] = a;
                pt[n - 2] = 1;
                pt[n - 1] = f.mul(f.inv(l), m);
                if rm.gens.iter().all(|g| g.eval(f, &pt) == 0) {
                    return Some(pt);
                }
            }
        }
        None
    }

    /// First F_{p^2}-point (in enumeration order) where every generator
    /// vanishes but `f` does not; a certificate that f ∉ the ideal at any
    /// degree. Exhaustive, so bounded by the enumeration limit.
    pub fn separating_point(&self, f: &Poly, ideal: &IdealPresentation) -> Result<Option<Vec<Fe>>> {
        let gf = &self.gf;
        let els = gf.subfield_elements(2);
        let n = ideal.nvars();
        let needed = (els.len() as u128).pow(n as u32);
        let bound = max_enum();
        if needed > bound {
            return Err(Error::BoundExceeded { needed, bound });
        }
        let q = els.len() as u128;
        let hit = (0..needed).into_par_iter().find_first(|&idx| {
            let pt = point_at(&els, n, idx, q);
            ideal.gens.iter().all(|g| g.eval(gf, &pt) == 0) && f.eval(gf, &pt) != 0
        });
        Ok(hit.map(|idx| point_at(&els, n, idx, q)))
    }

    pub fn membership_bounded(&self, target: &Poly, ideal: &IdealPresentation, degree_bound: u32) -> Result<Membership> {
        membership_bounded(&self.gf, target, ideal, degree_bound)
    }
}

/// Number of variables minus the rank of the Jacobian at the origin, and
/// that rank.
pub fn tangent_dim_at_origin(gf: &Gf, ideal: &IdealPresentation) -> Result<(usize, usize)> {
    if let Some(k) = ideal.gens.iter().position(|g| g.constant_term() != 0) {
        return Err(Error::NonVanishing(k));
    }
    let rows: Vec<Vec<Fe>> = ideal.gens.iter().map(|g| g.linear_part()).collect();
    let rank = if rows.is_empty() { 0 } else { rref(gf, rows).len() };
    Ok((ideal.nvars() - rank, rank))
}

fn point_at(els: &[Fe], n: usize, mut idx: u128, q: u128) -> Vec<Fe> {
    (0..n)
        .map(|_| {
            let e = els[(idx % q) as usize];
            idx /= q;
            e
        })
        .collect()
}

type SparseRow = Vec<(u32, Fe)>;

/// row ← row + c·other on sorted sparse rows.
fn axpy(gf: &Gf, row: &[(u32, Fe)], c: Fe, other: &[(u32, Fe)]) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        let take_row = j == other.len() || (i < row.len() && row[i].0 < other[j].0);
        let take_other = i == row.len() || (j < other.len() && other[j].0 < row[i].0);
        if take_row {
            out.push(row[i]);
            i += 1;
        } else if take_other {
            out.push((other[j].0, gf.mul(c, other[j].1)));
            j += 1;
        } else {
            let v = gf.add(row[i].1, gf.mul(c, other[j].1));
            if v != 0 {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Decides whether f = Σ c_k·gen_k with deg(c_k·gen_k) ≤ degree_bound by
/// eliminating the Macaulay matrix; a positive answer carries cofactors that
/// are re-multiplied and compared before being returned.
pub fn membership_bounded(gf: &Gf, target: &Poly, ideal: &IdealPresentation, degree_bound: u32) -> Result<Membership> {
    let n = ideal.nvars();
    let unknown = Ok(Membership::Unknown { degree_bound });
    if target.degree().is_some_and(|d| d > degree_bound) {
        return unknown;
    }
    let mut monos = monomials_up_to(n, degree_bound);
    monos.sort_by(|a, b| grevlex(b, a));
    let col: HashMap<&Monomial, u32> = monos.iter().enumerate().map(|(i, m)| (m, i as u32)).collect();

    let mut shifts: Vec<(usize, Monomial)> = Vec::new();
    for (k, g) in ideal.gens.iter().enumerate() {
        let Some(dg) = g.degree() else { continue };
        if dg <= degree_bound {
            shifts.extend(monomials_up_to(n, degree_bound - dg).into_iter().map(|m| (k, m)));
        }
    }
    let needed = shifts.len() as u128 * monos.len() as u128;
    let bound = max_enum();
    if needed > bound {
        return Err(Error::BoundExceeded { needed, bound });
    }
    let to_row = |p: &Poly| -> SparseRow {
        let mut r: SparseRow = p.terms().iter().map(|(m, &c)| (col[m], c)).collect();
        r.sort_unstable();
        r
    };

    // semi-echelon basis: distinct leading columns, leading coefficient 1,
    // each row remembering its combination of shifted generators
    let mut pivots: HashMap<u32, usize> = HashMap::new();
    let mut basis: Vec<(SparseRow, SparseRow)> = Vec::new();
    let reduce = |mut row: SparseRow, mut combo: SparseRow, pivots: &HashMap<u32, usize>, basis: &[(SparseRow, SparseRow)]| {
        while let Some(&(lead, c)) = row.first() {
            let Some(&b) = pivots.get(&lead) else { break };
            let neg = gf.neg(c);
            row = axpy(gf, &row, neg, &basis[b].0);
            combo = axpy(gf, &combo, neg, &basis[b].1);
        }
        (row, combo)
    };
    for (id, (k, m)) in shifts.iter().enumerate() {
        let row = to_row(&ideal.gens[*k].mul_term(gf, 1, m));
        let (row, combo) = reduce(row, vec![(id as u32, 1)], &pivots, &basis);
        if let Some(&(lead, c)) = row.first() {
            let inv = gf.inv(c);
            let scale = |r: SparseRow| r.into_iter().map(|(j, v)| (j, gf.mul(v, inv))).collect::<SparseRow>();
            pivots.insert(lead, basis.len());
            basis.push((scale(row), scale(combo)));
        }
    }
    let (rest, combo) = reduce(to_row(target), Vec::new(), &pivots, &basis);
    if !rest.is_empty() {
        return unknown;
    }
    // target − Σ combo·rows = 0, so target = −Σ combo·rows
    let mut cofactors = vec![Poly::zero(n); ideal.gens.len()];
    for (id, c) in combo {
        let (k, m) = &shifts[id as usize];
        cofactors[*k] = cofactors[*k].add(gf, &Poly::term(n, gf.neg(c), m.clone()));
    }
    let recombined = cofactors.iter().zip(&ideal.gens).fold(Poly::zero(n), |acc, (c, g)| acc.add(gf, &c.mul(gf, g)));
    if recombined != *target {
        return unknown;
    }
    Ok(Membership::Member { cofactors, degree_bound })
}

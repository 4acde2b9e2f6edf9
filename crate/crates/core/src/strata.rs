//! Finite hermitian geometry over F_{p^2} and its extensions: the varieties
//! Y_Λ of isotropic-complement subspaces, their stratification by
//! τ-stabilization depth, and Fermat/Hermitian curve point counts.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Fe, Gf};
use crate::witt::max_enum;

/// Which Gram matrix the finite space carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FormKind {
    /// t̄·T with T the anti-diagonal matrix.
    AntiDiagonal,
    /// t̄·I.
    Identity,
}

/// F_{p^2}^l with a perfect skew-hermitian form, viewed over F_{p^{2m}}.
#[derive(Clone, Debug)]
pub struct FiniteHermSpace {
    gf: Arc<Gf>,
    p: u32,
    m: u32,
    l: usize,
    form: Vec<Vec<Fe>>,
    kind: FormKind,
}

/// Subspace in reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HermSubspace {
    pub field_degree: u32,
    pub basis: Vec<Vec<Fe>>,
}

impl HermSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Reduction t̄ of the skew unit ζ^{(q-1)/(2(p-1))}.
pub fn skew_residue(gf: &Gf) -> Fe {
    let p = gf.p() as u64;
    let q = gf.order() as u64;
    gf.exp((q - 1) / (2 * (p - 1)))
}

impl FiniteHermSpace {
    pub fn new(p: u32, m: u32, l: usize, kind: FormKind) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenPrime);
        }
        if m == 0 || l == 0 {
            return Err(Error::InvalidParameter("m and l must be positive".into()));
        }
        let gf = Arc::new(Gf::new(p, 2 * m)?);
        Ok(Self::with_field(gf, l, kind))
    }

    pub fn with_field(gf: Arc<Gf>, l: usize, kind: FormKind) -> Self {
        let t = skew_residue(&gf);
        let form = (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| {
                        let hit = match kind {
                            FormKind::AntiDiagonal => i + j == l - 1,
                            FormKind::Identity => i == j,
                        };
                        if hit {
                            t
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let p = gf.p();
        let m = gf.degree() / 2;
        FiniteHermSpace { gf, p, m, l, form, kind }
    }

    pub fn field(&self) -> &Arc<Gf> {
        &self.gf
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn dim(&self) -> usize {
        self.l
    }
    pub fn kind(&self) -> FormKind {
        self.kind
    }
    pub fn form(&self) -> &[Vec<Fe>] {
        &self.form
    }

    /// (x, y) = xᵀ F σ(y), σ the p-power map.
    pub fn pairing(&self, x: &[Fe], y: &[Fe]) -> Fe {
        let f = &self.gf;
        let mut acc = 0;
        for i in 0..self.l {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.l {
                if self.form[i][j] != 0 && y[j] != 0 {
                    acc = f.add(acc, f.mul(x[i], f.mul(self.form[i][j], f.frob(y[j]))));
                }
            }
        }
        acc
    }

    pub fn is_skew_hermitian(&self) -> bool {
        let f = &self.gf;
        (0..self.l).all(|i| (0..self.l).all(|j| self.form[i][j] == f.neg(f.frob(self.form[j][i]))))
    }

    pub fn subspace(&self, rows: Vec<Vec<Fe>>) -> HermSubspace {
        HermSubspace { field_degree: self.m, basis: rref(&self.gf, rows) }
    }

    pub fn whole(&self) -> HermSubspace {
        self.subspace((0..self.l).map(|i| unit_vec(self.l, i)).collect())
    }

    pub fn zero(&self) -> HermSubspace {
        HermSubspace { field_degree: self.m, basis: Vec::new() }
    }

    /// U^⊥ = {x : (x, U) = 0}.
    pub fn perp(&self, u: &HermSubspace) -> HermSubspace {
        let f = &self.gf;
        let rows: Vec<Vec<Fe>> = u
            .basis
            .iter()
            .map(|uk| {
                (0..self.l)
                    .map(|i| (0..self.l).fold(0, |acc, j| f.add(acc, f.mul(self.form[i][j], f.frob(uk[j])))))
                    .collect()
            })
            .collect();
        HermSubspace { field_degree: self.m, basis: nullspace(f, &rows, self.l) }
    }

    /// Entrywise Frobenius twist by σ^j.
    pub fn twist(&self, u: &HermSubspace, j: i64) -> HermSubspace {
        let rows = u.basis.iter().map(|r| r.iter().map(|&a| self.gf.frob_pow(a, j)).collect()).collect();
        self.subspace(rows)
    }

    /// τ = σ².
    pub fn tau(&self, u: &HermSubspace) -> HermSubspace {
        self.twist(u, 2)
    }

    pub fn sum(&self, a: &HermSubspace, b: &HermSubspace) -> HermSubspace {
        self.subspace(a.basis.iter().chain(&b.basis).cloned().collect())
    }

    pub fn contains(&self, big: &HermSubspace, small: &HermSubspace) -> bool {
        self.sum(big, small).dim() == big.dim()
    }

    fn is_coisotropic(&self, u: &HermSubspace) -> bool {
        self.contains(u, &self.perp(u))
    }

    /// All U of dimension (l+1)/2 over F_{p^{2m}} with U^⊥ ⊆ U.
    pub fn enumerate_y(&self) -> Result<Vec<HermSubspace>> {
        if self.l.is_multiple_of(2) {
            return Err(Error::InvalidParameter("l must be odd".into()));
        }
        let all: Vec<Fe> = self.gf.elements().collect();
        self.enumerate_coisotropic(self.l.div_ceil(2), &all)
    }

    /// Coisotropic subspaces of the given dimension whose echelon entries
    /// come from `scalars` (all of F_{p^{2m}} or a subfield).
    pub fn enumerate_coisotropic(&self, dim: usize, scalars: &[Fe]) -> Result<Vec<HermSubspace>> {
        let s = scalars.len() as u128;
        let patterns = pivot_patterns(self.l, dim);
        let needed: u128 = patterns.iter().map(|pat| s.saturating_pow(free_slots(self.l, pat) as u32)).sum();
        let bound = max_enum();
        if needed > bound {
            return Err(Error::BoundExceeded { needed, bound });
        }
        let mut out = Vec::new();
        for pat in patterns {
            let slots = free_slots(self.l, &pat);
            let total = (s as u64).pow(slots as u32);
            let found: Vec<HermSubspace> = (0..total)
                .into_par_iter()
                .filter_map(|idx| {
                    let rows = echelon_from_index(self.l, &pat, idx, scalars);
                    let u = HermSubspace { field_degree: self.m, basis: rows };
                    self.is_coisotropic(&u).then_some(u)
                })
                .collect();
            out.extend(found);
        }
        out.sort();
        Ok(out)
    }

    /// Minimal i with U + τU + ... + τ^i U τ-invariant.
    pub fn stratify(&self, u: &HermSubspace) -> usize {
        let mut t = u.clone();
        let mut i = 0;
        loop {
            let tt = self.tau(&t);
            if tt == t {
                return i;
            }
            t = self.sum(&t, &tt);
            i += 1;
        }
    }

    /// Isotropic lines ℓ ⊆ ℓ^⊥ over F_{p^{2m}}.
    pub fn isotropic_lines(&self) -> Result<Vec<HermSubspace>> {
        let q = self.gf.order() as u128;
        let needed = (q.pow(self.l as u32) - 1) / (q - 1);
        let bound = max_enum();
        if needed > bound {
            return Err(Error::BoundExceeded { needed, bound });
        }
        let all: Vec<Fe> = self.gf.elements().collect();
        let mut out = Vec::new();
        for lead in 0..self.l {
            let pat = vec![lead];
            let slots = free_slots(self.l, &pat);
            let total = (all.len() as u64).pow(slots as u32);
            let found: Vec<HermSubspace> = (0..total)
                .into_par_iter()
                .filter_map(|idx| {
                    let rows = echelon_from_index(self.l, &pat, idx, &all);
                    (self.pairing(&rows[0], &rows[0]) == 0)
                        .then_some(HermSubspace { field_degree: self.m, basis: rows })
                })
                .collect();
            out.extend(found);
        }
        out.sort();
        Ok(out)
    }

    /// F_{p^2}-rational U of dimension (l + l1)/2 with U^⊥ ⊆ U; these
    /// correspond to the type-l1 vertices below a type-l vertex.
    pub fn sub_vertex_correspondence(&self, l1: usize) -> Result<Vec<HermSubspace>> {
        if l1.is_multiple_of(2) || self.l.is_multiple_of(2) || l1 > self.l {
            return Err(Error::InvalidParameter(format!("need odd 1 ≤ l1 ≤ l, got l1 = {l1}, l = {}", self.l)));
        }
        let base = self.gf.subfield_elements(2);
        self.enumerate_coisotropic((self.l + l1) / 2, &base)
    }

    /// Counts of enumerate_y per stratification depth.
    pub fn stratum_counts(&self) -> Result<BTreeMap<usize, u64>> {
        let ys = self.enumerate_y()?;
        let depths: Vec<usize> = ys.par_iter().map(|u| self.stratify(u)).collect();
        let mut counts = BTreeMap::new();
        for d in depths {
            *counts.entry(d).or_insert(0) += 1;
        }
        Ok(counts)
    }
}

/// One row of a stratum table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StratumRow {
    pub p: u32,
    pub l: usize,
    pub m: u32,
    pub depth: usize,
    pub count: u64,
}

pub fn stratum_table(space: &FiniteHermSpace) -> Result<Vec<StratumRow>> {
    Ok(space
        .stratum_counts()?
        .into_iter()
        .map(|(depth, count)| StratumRow { p: space.p, l: space.l, m: space.m, depth, count })
        .collect())
}

pub fn stratum_csv(rows: &[StratumRow]) -> String {
    let mut s = String::from("p,l,m,depth,count\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.p, r.l, r.m, r.depth, r.count));
    }
    s
}

fn unit_vec(l: usize, i: usize) -> Vec<Fe> {
    let mut v = vec![0; l];
    v[i] = 1;
    v
}

/// Reduced row-echelon form; zero rows are dropped.
pub fn rref(f: &Gf, mut rows: Vec<Vec<Fe>>) -> Vec<Vec<Fe>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = f.inv(rows[r][c]);
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let factor = rows[i][c];
                for j in 0..ncols {
                    let t = f.mul(factor, rows[r][j]);
                    rows[i][j] = f.sub(rows[i][j], t);
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    rows
}

/// Basis (in RREF) of {x : rows · x = 0}.
pub fn nullspace(f: &Gf, rows: &[Vec<Fe>], ncols: usize) -> Vec<Vec<Fe>> {
    let red = rref(f, rows.to_vec());
    let pivots: Vec<usize> = red.iter().map(|r| r.iter().position(|&x| x != 0).unwrap()).collect();
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0; ncols];
        v[free] = 1;
        for (r, &pc) in red.iter().zip(&pivots) {
            v[pc] = f.neg(r[free]);
        }
        basis.push(v);
    }
    rref(f, basis)
}

fn pivot_patterns(l: usize, dim: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, l: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for c in start..=l - left {
            cur.push(c);
            rec(c + 1, l, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, l, dim, &mut Vec::new(), &mut out);
    out
}

// free positions of an echelon pattern: (row, col) right of the row's pivot, not a pivot column
fn free_positions(l: usize, pat: &[usize]) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for (r, &pc) in pat.iter().enumerate() {
        for c in pc + 1..l {
            if !pat.contains(&c) {
                v.push((r, c));
            }
        }
    }
    v
}

fn free_slots(l: usize, pat: &[usize]) -> usize {
    free_positions(l, pat).len()
}

fn echelon_from_index(l: usize, pat: &[usize], mut idx: u64, scalars: &[Fe]) -> Vec<Vec<Fe>> {
    let s = scalars.len() as u64;
    let mut rows: Vec<Vec<Fe>> = pat.iter().map(|&pc| unit_vec(l, pc)).collect();
    for (r, c) in free_positions(l, pat) {
        rows[r][c] = scalars[(idx % s) as usize];
        idx /= s;
    }
    rows
}

/// Projective F_{p^{2m}}-points of x0^{p+1} + x1^{p+1} + x2^{p+1} = 0.
pub fn fermat_count(p: u32, m: u32) -> Result<u64> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    let gf = Gf::new(p, 2 * m)?;
    let q = gf.order() as u128;
    let bound = max_enum();
    if q * q > bound {
        return Err(Error::BoundExceeded { needed: q * q, bound });
    }
    let mut hist: BTreeMap<Fe, u64> = BTreeMap::new();
    for x in gf.elements() {
        *hist.entry(gf.pow(x, p as u64 + 1)).or_insert(0) += 1;
    }
    let mut affine = 0u64;
    for (&a, &ca) in &hist {
        for (&b, &cb) in &hist {
            let c = gf.neg(gf.add(a, b));
            if let Some(&cc) = hist.get(&c) {
                affine += ca * cb * cc;
            }
        }
    }
    Ok((affine - 1) / (gf.order() as u64 - 1))
}

/// Affine points (a, b) of a^p λ^p + a λ = b^{p+1} λ^{p+1}, in
/// generator-power order of a then b.
pub fn chart_points(gf: &Gf, lambda: Fe) -> Vec<(Fe, Fe)> {
    let p = gf.p() as u64;
    let lp = gf.pow(lambda, p);
    let lp1 = gf.pow(lambda, p + 1);
    let mut by_value: BTreeMap<Fe, Vec<Fe>> = BTreeMap::new();
    for b in gf.elements() {
        by_value.entry(gf.mul(gf.pow(b, p + 1), lp1)).or_default().push(b);
    }
    let mut out = Vec::new();
    for a in gf.elements() {
        let v = gf.add(gf.mul(gf.pow(a, p), lp), gf.mul(a, lambda));
        if let Some(bs) = by_value.get(&v) {
            out.extend(bs.iter().map(|&b| (a, b)));
        }
    }
    out
}

/// Projective point count of the chart curve C_λ over the field: the
/// affine d = 1 points plus the single point [1:0:0] at infinity.
pub fn chart_curve_count(gf: &Gf, lambda: Fe) -> Result<u64> {
    if lambda == 0 {
        return Err(Error::InvalidParameter("λ must be nonzero".into()));
    }
    Ok(chart_points(gf, lambda).len() as u64 + chart_points_at_infinity(gf, lambda).len() as u64)
}

/// Points [a:b:0] of C_λ: [1:b:0] for every b, and [0:1:0].
pub fn chart_points_at_infinity(gf: &Gf, lambda: Fe) -> Vec<(Fe, Fe)> {
    let p = gf.p() as u64;
    let lp1 = gf.pow(lambda, p + 1);
    // with d = 0 only the term b^{p+1} λ^{p+1} survives
    gf.elements()
        .map(|b| (1, b))
        .chain(std::iter::once((0, 1)))
        .filter(|&(_, b)| gf.mul(gf.pow(b, p + 1), lp1) == 0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_nullspace() {
        let f = Gf::new(3, 2).unwrap();
        let rows = vec![vec![1, 2, 0], vec![2, 4, 0]];
        let r = rref(&f, rows.clone());
        assert!(r.len() <= 2);
        let ns = nullspace(&f, &rows, 3);
        assert_eq!(ns.len() + r.len(), 3);
    }

    #[test]
    fn form_is_skew_hermitian() {
        for kind in [FormKind::AntiDiagonal, FormKind::Identity] {
            let s = FiniteHermSpace::new(3, 2, 3, kind).unwrap();
            assert!(s.is_skew_hermitian());
        }
    }

    #[test]
    fn pattern_census() {
        // Gr(2,3) over F_q has q^2 + q + 1 points
        let q: u64 = 9;
        let total: u64 = pivot_patterns(3, 2).iter().map(|p| q.pow(free_slots(3, p) as u32)).sum();
        assert_eq!(total, q * q + q + 1);
    }
}

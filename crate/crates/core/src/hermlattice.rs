//! Lattices in a hermitian space over W(F_{p^{2m}})[1/p].
//!
//! The form is {y, z} = yᵀ G σ(z) for a skew-hermitian gram matrix G
//! (G = −σ(G)ᵀ). A lattice is stored as p^{-e}·span(H) with H in Hermite
//! normal form and e minimal, so equal lattices have equal representations.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{self, hnf, snf, Mat, GUARD};
use crate::witt::{Ctx, PrimeContext, Witt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormClass {
    /// Equivalent to t·I_n.
    SelfDualClass,
    /// Equivalent to t·J_n = t·diag(p, 1, ..., 1).
    NonSelfDualClass,
}

#[derive(Debug)]
pub struct HermitianSpace {
    ctx: Ctx,
    n: usize,
    gram: Mat,
    form_class: FormClass,
}

impl HermitianSpace {
    pub fn new(ctx: Ctx, gram: Mat) -> Result<Arc<Self>> {
        let n = gram.rows();
        if gram.cols() != n {
            return Err(Error::InvalidParameter("gram matrix must be square".into()));
        }
        if !is_skew_hermitian(&ctx, &gram, ctx.precision()) {
            return Err(Error::NotSkewHermitian);
        }
        let form_class = classify_form(&ctx, &gram)?;
        Ok(Arc::new(HermitianSpace { ctx, n, gram, form_class }))
    }

    /// Gram matrix t·diag(p^{e_1}, ..., p^{e_n}).
    pub fn scaled_diagonal(ctx: Ctx, exps: &[u32]) -> Arc<Self> {
        let t = ctx.skew_unit();
        let d: Vec<Witt> = exps.iter().map(|&e| ctx.mul(&t, &ctx.p_pow(e))).collect();
        Self::new(ctx, Mat::diag(&d)).expect("diagonal skew gram is valid")
    }

    /// t·I_n.
    pub fn standard(ctx: Ctx, n: usize) -> Arc<Self> {
        Self::scaled_diagonal(ctx, &vec![0; n])
    }

    /// t·J_n with J_n = diag(p, 1, ..., 1).
    pub fn non_self_dual(ctx: Ctx, n: usize) -> Arc<Self> {
        let mut e = vec![0; n];
        e[0] = 1;
        Self::scaled_diagonal(ctx, &e)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn gram(&self) -> &Mat {
        &self.gram
    }
    pub fn form_class(&self) -> FormClass {
        self.form_class
    }

    /// {x, y} = xᵀ G σ(y).
    pub fn pairing(&self, x: &[Witt], y: &[Witt]) -> Witt {
        let c = &self.ctx;
        let sy: Vec<Witt> = y.iter().map(|a| c.frobenius(a)).collect();
        let gy = self.gram.apply(c, &sy);
        x.iter().zip(&gy).fold(c.zero(), |acc, (a, b)| c.add(&acc, &c.mul(a, b)))
    }

    /// Gram matrix Xᵀ G σ(X) of the columns of X.
    pub fn gram_of(&self, x: &Mat) -> Mat {
        let c = &self.ctx;
        x.transpose().mul(c, &self.gram).mul(c, &x.frob_pow(c, 1))
    }
}

pub fn is_skew_hermitian(ctx: &PrimeContext, g: &Mat, v: u32) -> bool {
    g.eq_mod(ctx, &g.frob_pow(ctx, 1).transpose().neg(ctx), v)
}

/// Two perfect skew-hermitian forms exist up to isomorphism; they are told
/// apart by the parity of the valuation of the determinant.
pub fn classify_form(ctx: &PrimeContext, gram: &Mat) -> Result<FormClass> {
    let v = mat::det_valuation(ctx, gram)?;
    Ok(if v % 2 == 0 { FormClass::SelfDualClass } else { FormClass::NonSelfDualClass })
}

/// Canonical identity of a lattice: the denominator exponent, the diagonal
/// exponents of the Hermite form and the reduced off-diagonal coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeKey {
    pub denom: i32,
    pub exps: Vec<u32>,
    pub entries: Vec<u64>,
}

impl LatticeKey {
    pub fn to_hex(&self) -> String {
        let mut bytes = Vec::with_capacity(4 + self.exps.len() + 8 * self.entries.len());
        bytes.extend_from_slice(&self.denom.to_be_bytes());
        bytes.extend(self.exps.iter().map(|&e| e as u8));
        for &c in &self.entries {
            bytes.extend_from_slice(&c.to_be_bytes());
        }
        hex::encode(bytes)
    }
}

impl fmt::Display for LatticeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Clone)]
pub struct HermitianLattice {
    space: Arc<HermitianSpace>,
    basis: Mat,
    denom: i32,
    exps: Vec<u32>,
}

impl PartialEq for HermitianLattice {
    fn eq(&self, other: &Self) -> bool {
        self.denom == other.denom && self.exps == other.exps && self.basis == other.basis
    }
}
impl Eq for HermitianLattice {}

impl fmt::Debug for HermitianLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p^{}·{:?}", -self.denom, self.basis)
    }
}

impl HermitianLattice {
    /// Lattice p^{-denom}·span(columns of gens).
    pub fn from_generators(space: &Arc<HermitianSpace>, gens: &Mat, denom: i32) -> Result<Self> {
        let ctx = space.ctx();
        let v = gens.valuation(ctx);
        if v >= ctx.precision() {
            return Err(crate::error::precision("zero generator matrix"));
        }
        let g = gens.div_p_pow(ctx, v).unwrap();
        let (exps, basis) = hnf(ctx, &g)?;
        Ok(HermitianLattice { space: space.clone(), basis, denom: denom - v as i32, exps })
    }

    /// Span of the coordinate basis.
    pub fn standard(space: &Arc<HermitianSpace>) -> Self {
        let n = space.dim();
        HermitianLattice { space: space.clone(), basis: Mat::identity(space.ctx(), n), denom: 0, exps: vec![0; n] }
    }

    pub fn space(&self) -> &Arc<HermitianSpace> {
        &self.space
    }
    pub fn ctx(&self) -> &Ctx {
        self.space.ctx()
    }
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
    /// Integral Hermite basis H; the lattice is p^{-denom}·span(H).
    pub fn basis(&self) -> &Mat {
        &self.basis
    }
    pub fn denom(&self) -> i32 {
        self.denom
    }
    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    /// Same lattice placed in another space of the same dimension.
    pub fn with_space(&self, space: &Arc<HermitianSpace>) -> Self {
        assert_eq!(space.dim(), self.dim());
        HermitianLattice { space: space.clone(), ..self.clone() }
    }

    pub fn key(&self) -> LatticeKey {
        let ctx = self.ctx();
        let k = ctx.degree();
        let n = self.dim();
        let mut entries = Vec::with_capacity(n * (n - 1) / 2 * k);
        for j in 0..n {
            for i in 0..j {
                entries.extend_from_slice(&self.basis[(i, j)].coords()[..k]);
            }
        }
        LatticeKey { denom: self.denom, exps: self.exps.clone(), entries }
    }

    /// p^k·L.
    pub fn scale(&self, k: i32) -> Self {
        HermitianLattice { denom: self.denom - k, ..self.clone() }
    }

    /// Length of O^n / L, extended to fractional lattices.
    pub fn vdet(&self) -> i64 {
        self.exps.iter().map(|&a| a as i64).sum::<i64>() - self.dim() as i64 * self.denom as i64
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        let ctx = self.ctx();
        let e = self.denom.max(other.denom);
        let a = self.basis.shl(ctx, (e - self.denom) as u32);
        let b = other.basis.shl(ctx, (e - other.denom) as u32);
        Self::from_generators(&self.space, &a.hconcat(&b), e)
    }

    // p^{e}·span(K^{-T}) for the lattice basis K
    fn inverse_transpose_span(&self, k: &Mat, e: i32) -> Result<Self> {
        let ctx = self.ctx();
        let s = snf(ctx, k)?;
        let amax = *s.exps.iter().max().unwrap();
        let mut x = s.left.transpose();
        for (j, &a) in s.exps.iter().enumerate() {
            for i in 0..x.rows() {
                x[(i, j)] = ctx.shl(&x[(i, j)], amax - a);
            }
        }
        Self::from_generators(&self.space, &x, amax as i32 - e)
    }

    /// Hermitian dual L^∨ = {y : {y, L} ⊂ W}.
    pub fn dual(&self) -> Result<Self> {
        let ctx = self.ctx();
        let k = self.space.gram.mul(ctx, &self.basis.frob_pow(ctx, 1));
        self.inverse_transpose_span(&k, self.denom)
    }

    /// Dual for the untwisted bilinear pairing yᵀz.
    pub fn sharp(&self) -> Result<Self> {
        self.inverse_transpose_span(&self.basis, self.denom)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.sharp()?.sum(&other.sharp()?)?.sharp()
    }

    /// τ = σ² applied entrywise.
    pub fn tau(&self) -> Result<Self> {
        if self.ctx().degree() == 2 {
            return Ok(self.clone());
        }
        Self::from_generators(&self.space, &self.basis.frob_pow(self.ctx(), 2), self.denom)
    }

    pub fn is_tau_invariant(&self) -> Result<bool> {
        Ok(self.tau()? == *self)
    }

    /// other ⊆ self.
    pub fn contains(&self, other: &Self) -> Result<bool> {
        Ok(self.sum(other)? == *self)
    }

    /// Image of the lattice under x ↦ p^{-a_denom}·A·σ^j(x), placed in `target`.
    pub fn image(&self, target: &Arc<HermitianSpace>, a: &Mat, a_denom: i32, j: i64) -> Result<Self> {
        let ctx = self.ctx();
        let g = a.mul(ctx, &self.basis.frob_pow(ctx, j));
        Self::from_generators(target, &g, self.denom + a_denom)
    }

    /// Basis vectors as fractional columns (p^{-denom}·H).
    pub fn fractional_basis(&self) -> (Mat, i32) {
        (self.basis.clone(), self.denom)
    }

    /// Gram matrix of the Hermite basis, if the lattice is integral for the form.
    pub fn integral_gram(&self) -> Option<Mat> {
        integral_gram(&self.space, &self.basis, self.denom)
    }
}

fn integral_gram(space: &HermitianSpace, x: &Mat, e: i32) -> Option<Mat> {
    let ctx = space.ctx();
    let q = space.gram_of(x);
    if e >= 0 {
        q.div_p_pow(ctx, 2 * e as u32)
    } else {
        Some(q.shl(ctx, (-2 * e) as u32))
    }
}

/// [L' : L], the generalized index of L in L'.
pub fn index(l: &HermitianLattice, lp: &HermitianLattice) -> i64 {
    l.vdet() - lp.vdet()
}

/// [ref : M].
pub fn volume(m: &HermitianLattice, reference: &HermitianLattice) -> i64 {
    index(m, reference)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub sub: String,
    pub sup: String,
    pub expected: i64,
    pub index: i64,
    pub contained: bool,
}

impl ChainStep {
    pub fn ok(&self) -> bool {
        self.contained && self.index == self.expected
    }
}

/// Inclusions with their indices, plus free-form boolean side conditions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    pub checks: Vec<(String, bool)>,
}

impl ChainReport {
    pub fn satisfied(&self) -> bool {
        self.steps.iter().all(ChainStep::ok) && self.checks.iter().all(|c| c.1)
    }

    pub fn push(&mut self, sub: &str, l: &HermitianLattice, sup: &str, lp: &HermitianLattice, expected: i64) -> Result<()> {
        self.steps.push(ChainStep {
            sub: sub.into(),
            sup: sup.into(),
            expected,
            index: index(l, lp),
            contained: lp.contains(l)?,
        });
        Ok(())
    }

    pub fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .steps
            .iter()
            .filter(|s| !s.ok())
            .map(|s| {
                format!("{} ⊂^{} {}: contained={} index={}", s.sub, s.expected, s.sup, s.contained, s.index)
            })
            .collect();
        out.extend(self.checks.iter().filter(|c| !c.1).map(|c| c.0.clone()));
        out
    }
}

/// Checks p^{i+1}A^∨ ⊂^1 A ⊂^{n-1} p^i A^∨.
pub fn check_d_i(a: &HermitianLattice, i: i32) -> Result<ChainReport> {
    let n = a.dim() as i64;
    let d = a.dual()?;
    let mut r = ChainReport::default();
    r.push("p^{i+1}A^∨", &d.scale(i + 1), "A", a, 1)?;
    r.push("A", a, "p^i A^∨", &d.scale(i), n - 1)?;
    Ok(r)
}

/// Type l = [Λ : p^{i+1}Λ^∨] of a vertex lattice.
pub fn vertex_type(lambda: &HermitianLattice, i: i32) -> Result<u32> {
    if !lambda.is_tau_invariant()? {
        return Err(Error::NotAVertex("lattice is not τ-invariant".into()));
    }
    let d = lambda.dual()?;
    let low = d.scale(i + 1);
    let high = d.scale(i);
    if !lambda.contains(&low)? || !high.contains(lambda)? || low == *lambda {
        return Err(Error::NotAVertex("p^{i+1}Λ^∨ ⊊ Λ ⊂ p^iΛ^∨ fails".into()));
    }
    let l = index(&low, lambda);
    if l % 2 == 0 || l < 1 || l > lambda.dim() as i64 {
        return Err(Error::NotAVertex(format!("index {l} is not an odd type")));
    }
    Ok(l as u32)
}

#[derive(Clone, Debug)]
pub struct TauStable {
    pub d: usize,
    pub lattice: HermitianLattice,
    pub report: ChainReport,
}

/// Smallest τ-invariant lattice Λ = A + τA + ... + τ^d A containing A,
/// together with the chain
/// p^{i+1}Λ^∨ ⊂ p^{i+1}A^∨ ⊂^1 A ⊂^d Λ ⊂^{n-2d-1} p^iΛ^∨ ⊂ p^iA^∨.
pub fn tau_stabilize(a: &HermitianLattice, i: i32, s: usize) -> Result<TauStable> {
    let pre = check_d_i(a, i)?;
    if !pre.satisfied() {
        return Err(Error::ChainViolation(pre.failures().join("; ")));
    }
    let n = a.dim() as i64;
    let mut t = a.clone();
    let mut d = 0usize;
    loop {
        let tt = t.tau()?;
        if tt == t {
            break;
        }
        t = t.sum(&tt)?;
        d += 1;
        if d > a.ctx().degree() {
            return Err(Error::ChainViolation("τ-orbit sum does not stabilize".into()));
        }
    }
    let ad = a.dual()?;
    let ld = t.dual()?;
    let di = d as i64;
    let mut r = ChainReport::default();
    r.push("p^{i+1}Λ^∨", &ld.scale(i + 1), "p^{i+1}A^∨", &ad.scale(i + 1), di)?;
    r.push("p^{i+1}A^∨", &ad.scale(i + 1), "A", a, 1)?;
    r.push("A", a, "Λ", &t, di)?;
    r.push("Λ", &t, "p^iΛ^∨", &ld.scale(i), n - 2 * di - 1)?;
    r.push("p^iΛ^∨", &ld.scale(i), "p^iA^∨", &ad.scale(i), di)?;
    r.push("p^{i+1}Λ^∨", &ld.scale(i + 1), "Λ", &t, 2 * di + 1)?;
    r.check(format!("d = {d} ≤ s/2 = {}", s / 2), 2 * d <= s);
    Ok(TauStable { d, lattice: t, report: r })
}

/// A basis p^{-denom}·cols of a lattice in which the gram matrix is
/// t·diag(I_r, p·I_s).
#[derive(Clone, Debug)]
pub struct NormalBasis {
    pub cols: Mat,
    pub denom: i32,
}

impl NormalBasis {
    pub fn vector(&self, j: usize) -> Vec<Witt> {
        self.cols.col(j)
    }

    /// Reorders the basis vectors.
    pub fn permuted(&self, order: &[usize]) -> NormalBasis {
        NormalBasis { cols: self.cols.select_cols(order), denom: self.denom }
    }
}

/// Basis of M with gram t·diag(I_r, pI_s), assuming pM^∨ ⊂^r M ⊂^s M^∨.
/// Pivots are chosen by minimal valuation, lowest index first.
pub fn gram_schmidt_normalize(m: &HermitianLattice, r: usize, s: usize) -> Result<NormalBasis> {
    let ctx = m.ctx().clone();
    let n = m.dim();
    if r + s != n {
        return Err(Error::InvalidParameter(format!("r + s = {} but n = {n}", r + s)));
    }
    let d = m.dual()?;
    let mut pre = ChainReport::default();
    pre.push("pM^∨", &d.scale(1), "M", m, r as i64)?;
    pre.push("M", m, "M^∨", &d, s as i64)?;
    if !pre.satisfied() {
        return Err(Error::ChainViolation(pre.failures().join("; ")));
    }
    let e = m.denom();
    let loss = GUARD + 2 * e.max(0) as u32;
    let tol = ctx.precision().saturating_sub(loss);
    let space = m.space().clone();
    let t = ctx.skew_unit();
    let tinv = ctx.inv(&t).unwrap();
    let herm = |x: &Mat| -> Result<Mat> {
        let q = integral_gram(&space, x, e).ok_or_else(|| Error::ChainViolation("M is not integral".into()))?;
        Ok(q.scale(&ctx, &tinv))
    };
    let mut x = m.basis().clone();
    if !is_skew_hermitian(&ctx, &integral_gram(&space, &x, e).unwrap(), tol) {
        return Err(Error::NotSkewHermitian);
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots: Vec<(u32, usize)> = Vec::with_capacity(n);
    while !active.is_empty() {
        let h = herm(&x)?;
        let val = |i: usize, j: usize| ctx.valuation(&h[(i, j)]);
        let v = active.iter().flat_map(|&i| active.iter().map(move |&j| (i, j))).map(|(i, j)| val(i, j)).min().unwrap();
        if v > 1 {
            return Err(Error::ChainViolation(format!("pivot valuation {v} > 1")));
        }
        let j = match active.iter().copied().find(|&i| val(i, i) == v) {
            Some(j) => j,
            None => {
                let (j, k) = active
                    .iter()
                    .flat_map(|&i| active.iter().map(move |&k| (i, k)))
                    .find(|&(i, k)| i != k && val(i, k) == v)
                    .unwrap();
                // b_j += c·b_k with σ(c) = p^v / h_jk makes h_jj of valuation v
                let u = ctx.div_p_pow(&h[(j, k)], v).unwrap();
                let c = ctx.frobenius_inv(&ctx.inv(&u).unwrap());
                mat::col_axpy(&mut x, &ctx, j, k, &ctx.neg(&c));
                j
            }
        };
        let h = herm(&x)?;
        let hjj = h[(j, j)];
        if ctx.valuation(&hjj) != v {
            return Err(crate::error::precision("diagonal pivot lost valuation"));
        }
        let hjj_inv_unit = ctx.inv(&ctx.div_p_pow(&hjj, v).unwrap()).unwrap();
        for &k in active.iter().filter(|&&k| k != j) {
            let a = ctx.div_p_pow(&ctx.mul(&h[(k, j)], &hjj_inv_unit), v)
                .ok_or_else(|| crate::error::precision("orthogonalization coefficient not integral"))?;
            mat::col_axpy(&mut x, &ctx, k, j, &a);
        }
        // rescale so that h(b_j, b_j) = p^v exactly: c σ(c) = (h_jj / p^v)^{-1}
        let c = ctx.solve_norm(&hjj_inv_unit).ok_or_else(|| crate::error::precision("norm equation has no solution"))?;
        mat::scale_col(&mut x, &ctx, j, &c);
        active.retain(|&i| i != j);
        pivots.push((v, j));
    }
    pivots.sort_by_key(|&(v, _)| v);
    let units = pivots.iter().filter(|&&(v, _)| v == 0).count();
    if units != r {
        return Err(Error::ChainViolation(format!("found {units} unit pivots, expected {r}")));
    }
    let order: Vec<usize> = pivots.iter().map(|&(_, j)| j).collect();
    let out = NormalBasis { cols: x.select_cols(&order), denom: e };
    let q = integral_gram(&space, &out.cols, e).unwrap();
    let target: Vec<Witt> = (0..n).map(|i| ctx.mul(&t, &ctx.p_pow(u32::from(i >= r)))).collect();
    if !q.eq_mod(&ctx, &Mat::diag(&target), tol) {
        return Err(crate::error::precision("normalized gram does not verify"));
    }
    Ok(out)
}

/// Ψ_i : A ↦ p^{-i/2}A for even i.
pub fn shift_psi(a: &HermitianLattice, i: i32) -> Result<HermitianLattice> {
    if i % 2 != 0 {
        return Err(Error::OddShiftUnsupported(i));
    }
    Ok(a.scale(-i / 2))
}

pub fn canonicalize(l: &HermitianLattice) -> LatticeKey {
    l.key()
}

/// Random matrix invertible over W/p^N.
pub fn random_unimodular<R: Rng + ?Sized>(ctx: &PrimeContext, n: usize, rng: &mut R) -> Mat {
    loop {
        let m = Mat::from_fn(n, n, |_, _| ctx.random(rng));
        if mat::det_valuation(ctx, &m).is_ok_and(|v| v == 0) {
            return m;
        }
    }
}

/// Random lattice U·diag(p^{a_i}) with a_i ≤ max_exp, scaled by p^{-denom}.
pub fn random_lattice<R: Rng + ?Sized>(
    space: &Arc<HermitianSpace>,
    max_exp: u32,
    denom: i32,
    rng: &mut R,
) -> HermitianLattice {
    let ctx = space.ctx();
    let n = space.dim();
    let u = random_unimodular(ctx, n, rng);
    let d: Vec<Witt> = (0..n).map(|_| ctx.p_pow(rng.random_range(0..=max_exp))).collect();
    let g = u.mul(ctx, &Mat::diag(&d));
    HermitianLattice::from_generators(space, &g, denom).expect("random lattice within precision")
}

/// Random unimodular change of basis of a lattice, returned as generators.
pub fn random_basis<R: Rng + ?Sized>(l: &HermitianLattice, rng: &mut R) -> Mat {
    let ctx = l.ctx();
    l.basis().mul(ctx, &random_unimodular(ctx, l.dim(), rng))
}

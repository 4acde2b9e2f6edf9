//! Truncated Witt rings W(F_{p^{2m}})/p^N.
//!
//! The ring is modelled as (Z/p^N)[x]/(f) where f is the minimal polynomial
//! of the Teichmüller lift of a primitive element. With this choice Frobenius
//! is the substitution x ↦ x^p and Teichmüller lifts are monomials x^j.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{is_prime, Fe, Gf};

/// Largest supported residue degree 2m.
pub const MAX_DEG: usize = 8;

/// Default bound on the size q^3 of enumeration loops.
pub const DEFAULT_MAX_ENUM: u128 = 1 << 30;

/// Enumeration bound, overridable through `UL_MAX_ENUM`.
pub fn max_enum() -> u128 {
    std::env::var("UL_MAX_ENUM").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MAX_ENUM)
}

/// Precision used for lattice work: 2(s+2) plus four guard digits.
pub fn default_precision(s: u32) -> u32 {
    2 * (s + 2) + 4
}

/// Element of W(F_q)/p^N given by its coordinates in the power basis of the
/// context it was created in. Unused trailing coordinates are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Witt {
    c: [u64; MAX_DEG],
}

impl std::fmt::Debug for Witt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let last = self.c.iter().rposition(|&v| v != 0).map_or(1, |i| i + 1);
        write!(f, "{:?}", &self.c[..last])
    }
}

impl Witt {
    pub fn coords(&self) -> &[u64; MAX_DEG] {
        &self.c
    }
}

#[derive(Debug)]
pub struct PrimeContext {
    p: u64,
    m: u32,
    k: usize,
    n: u32,
    pn: u64,
    pows: Vec<u64>,
    modulus: Vec<u64>,
    neg_modulus: Vec<u64>,
    // frob_imgs[j][i] = σ^j(x^i)
    frob_imgs: Vec<Vec<Witt>>,
    teich: Vec<Witt>,
    gf: Gf,
}

pub type Ctx = Arc<PrimeContext>;

fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    (a as u128 * b as u128 % n as u128) as u64
}

fn poly_mul(a: &Witt, b: &Witt, k: usize, pn: u64, neg_modulus: &[u64]) -> Witt {
    let mut acc = [0u128; 2 * MAX_DEG];
    for i in 0..k {
        if a.c[i] == 0 {
            continue;
        }
        for j in 0..k {
            acc[i + j] += a.c[i] as u128 * b.c[j] as u128;
        }
    }
    let mut t = [0u64; 2 * MAX_DEG];
    for d in 0..2 * k - 1 {
        t[d] = (acc[d] % pn as u128) as u64;
    }
    for d in (k..2 * k - 1).rev() {
        let c = t[d];
        if c == 0 {
            continue;
        }
        for i in 0..k {
            t[d - k + i] = ((t[d - k + i] as u128 + c as u128 * neg_modulus[i] as u128) % pn as u128) as u64;
        }
    }
    let mut out = Witt::default();
    out.c[..k].copy_from_slice(&t[..k]);
    out
}

fn poly_pow(a: &Witt, mut e: u128, k: usize, pn: u64, neg_modulus: &[u64]) -> Witt {
    let mut base = *a;
    let mut r = Witt::default();
    r.c[0] = 1 % pn;
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mul(&r, &base, k, pn, neg_modulus);
        }
        base = poly_mul(&base, &base, k, pn, neg_modulus);
        e >>= 1;
    }
    r
}

/// Builds the context for W(F_{p^{2m}})/p^N.
pub fn make_context(p: u64, m: u32, n: u32) -> Result<Ctx> {
    make_context_bounded(p, m, n, max_enum())
}

pub fn make_context_bounded(p: u64, m: u32, n: u32, bound: u128) -> Result<Ctx> {
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 || 2 * m as usize > MAX_DEG {
        return Err(Error::InvalidParameter(format!("m = {m} must lie in 1..={}", MAX_DEG / 2)));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("precision N must be positive".into()));
    }
    let k = 2 * m as usize;
    let q = (p as u128).pow(k as u32);
    let work = q.pow(3);
    if work > bound {
        return Err(Error::BoundExceeded { needed: work, bound });
    }
    let pn = (p as u128).checked_pow(n).filter(|&v| v < 1 << 62);
    let pn = pn.ok_or_else(|| Error::InvalidParameter(format!("p^N = {p}^{n} exceeds 2^62")))? as u64;
    let gf = Gf::new(p as u32, k as u32)?;

    // naive lift F0 of the residue modulus, then Teichmüller generator in Z/p^N[x]/(F0)
    let f0: Vec<u64> = gf.modulus().iter().map(|&c| c as u64).collect();
    let neg0: Vec<u64> = f0[..k].iter().map(|&c| (pn - c % pn) % pn).collect();
    let mut x = Witt::default();
    x.c[1] = 1;
    let mut zeta = x;
    for _ in 0..n {
        zeta = poly_pow(&zeta, q, k, pn, &neg0);
    }
    // f = prod_j (X - zeta^{p^j}), coefficients computed in R0 and must be scalars
    let mut coeffs: Vec<Witt> = vec![Witt::default(); k + 1];
    coeffs[0].c[0] = 1;
    let mut conj = zeta;
    for _ in 0..k {
        // multiply by (X - conj)
        let mut next = vec![Witt::default(); k + 1];
        for d in 0..k {
            let c = coeffs[d];
            // X * c
            for i in 0..k {
                next[d + 1].c[i] = (next[d + 1].c[i] + c.c[i]) % pn;
            }
            let prod = poly_mul(&c, &conj, k, pn, &neg0);
            for i in 0..k {
                next[d].c[i] = (next[d].c[i] + pn - prod.c[i]) % pn;
            }
        }
        coeffs = next;
        conj = poly_pow(&conj, p as u128, k, pn, &neg0);
    }
    let mut modulus = Vec::with_capacity(k + 1);
    for c in &coeffs {
        if c.c[1..].iter().any(|&v| v != 0) {
            return Err(crate::error::precision("Teichmüller modulus has non-scalar coefficients"));
        }
        modulus.push(c.c[0]);
    }
    let neg_modulus: Vec<u64> = modulus[..k].iter().map(|&c| (pn - c) % pn).collect();

    let qm1 = (q - 1) as usize;
    let mut teich = Vec::with_capacity(qm1);
    let mut cur = Witt::default();
    cur.c[0] = 1;
    for _ in 0..qm1 {
        teich.push(cur);
        cur = poly_mul(&cur, &x, k, pn, &neg_modulus);
    }
    if cur.c[0] != 1 || cur.c[1..].iter().any(|&v| v != 0) {
        return Err(crate::error::precision("x^(q-1) != 1 in the constructed ring"));
    }
    let mut frob_imgs = Vec::with_capacity(k);
    let mut pj = 1usize;
    for _ in 0..k {
        frob_imgs.push((0..k).map(|i| teich[(i * pj) % qm1]).collect());
        pj = pj * p as usize % qm1;
    }
    let pows = (0..=n).map(|i| p.pow(i)).collect();
    Ok(Arc::new(PrimeContext { p, m, k, n, pn, pows, modulus, neg_modulus, frob_imgs, teich, gf }))
}

impl PrimeContext {
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    /// Residue degree 2m.
    pub fn degree(&self) -> usize {
        self.k
    }
    /// Working precision N.
    pub fn precision(&self) -> u32 {
        self.n
    }
    /// Residue field size q = p^{2m}.
    pub fn q(&self) -> u64 {
        self.gf.order() as u64
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn residue_field(&self) -> &Gf {
        &self.gf
    }

    pub fn zero(&self) -> Witt {
        Witt::default()
    }

    pub fn one(&self) -> Witt {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> Witt {
        let mut w = Witt::default();
        w.c[0] = v.rem_euclid(self.pn as i64) as u64;
        w
    }

    pub fn from_coords(&self, coords: &[u64]) -> Witt {
        let mut w = Witt::default();
        for (i, &c) in coords.iter().take(self.k).enumerate() {
            w.c[i] = c % self.pn;
        }
        w
    }

    /// p^v (zero when v ≥ N).
    pub fn p_pow(&self, v: u32) -> Witt {
        let mut w = Witt::default();
        if v < self.n {
            w.c[0] = self.pows[v as usize];
        }
        w
    }

    pub fn add(&self, a: &Witt, b: &Witt) -> Witt {
        let mut o = Witt::default();
        for i in 0..self.k {
            let s = a.c[i] + b.c[i];
            o.c[i] = if s >= self.pn { s - self.pn } else { s };
        }
        o
    }

    pub fn sub(&self, a: &Witt, b: &Witt) -> Witt {
        let mut o = Witt::default();
        for i in 0..self.k {
            o.c[i] = if a.c[i] >= b.c[i] { a.c[i] - b.c[i] } else { a.c[i] + self.pn - b.c[i] };
        }
        o
    }

    pub fn neg(&self, a: &Witt) -> Witt {
        self.sub(&Witt::default(), a)
    }

    pub fn mul(&self, a: &Witt, b: &Witt) -> Witt {
        poly_mul(a, b, self.k, self.pn, &self.neg_modulus)
    }

    pub fn mul_int(&self, a: &Witt, s: i64) -> Witt {
        let s = s.rem_euclid(self.pn as i64) as u64;
        let mut o = Witt::default();
        for i in 0..self.k {
            o.c[i] = mulmod(a.c[i], s, self.pn);
        }
        o
    }

    pub fn pow(&self, a: &Witt, e: u128) -> Witt {
        poly_pow(a, e, self.k, self.pn, &self.neg_modulus)
    }

    pub fn is_zero(&self, a: &Witt) -> bool {
        a.c[..self.k].iter().all(|&v| v == 0)
    }

    /// p-adic valuation; N stands for "≥ N" (the zero class).
    pub fn valuation(&self, a: &Witt) -> u32 {
        let mut v = self.n;
        for &c in &a.c[..self.k] {
            if c != 0 {
                v = v.min(c.trailing_zeros_base(self.p));
            }
        }
        v
    }

    pub fn is_unit(&self, a: &Witt) -> bool {
        self.valuation(a) == 0
    }

    /// Multiplication by p^v.
    pub fn shl(&self, a: &Witt, v: u32) -> Witt {
        if v >= self.n {
            return Witt::default();
        }
        self.mul_int(a, self.pows[v as usize] as i64)
    }

    /// Exact division by p^v; the result is determined modulo p^{N-v}.
    /// Returns `None` if v exceeds the valuation of a.
    pub fn div_p_pow(&self, a: &Witt, v: u32) -> Option<Witt> {
        if v == 0 {
            return Some(*a);
        }
        if self.valuation(a) < v {
            return None;
        }
        let d = self.pows[v as usize];
        let mut o = Witt::default();
        for i in 0..self.k {
            o.c[i] = a.c[i] / d;
        }
        Some(o)
    }

    /// Coordinatewise division with remainder by p^v: a = w·p^v + r with
    /// every coordinate of r in [0, p^v).
    pub fn divmod_p_pow(&self, a: &Witt, v: u32) -> (Witt, Witt) {
        if v >= self.n {
            return (Witt::default(), *a);
        }
        let d = self.pows[v as usize];
        let (mut w, mut r) = (Witt::default(), Witt::default());
        for i in 0..self.k {
            w.c[i] = a.c[i] / d;
            r.c[i] = a.c[i] % d;
        }
        (w, r)
    }

    /// σ^j for any integer j.
    pub fn frob_pow(&self, a: &Witt, j: i64) -> Witt {
        let j = j.rem_euclid(self.k as i64) as usize;
        if j == 0 {
            return *a;
        }
        let imgs = &self.frob_imgs[j];
        let mut acc = [0u128; MAX_DEG];
        for i in 0..self.k {
            let c = a.c[i];
            if c == 0 {
                continue;
            }
            for (t, slot) in acc.iter_mut().enumerate().take(self.k) {
                *slot += c as u128 * imgs[i].c[t] as u128;
            }
        }
        let mut o = Witt::default();
        for t in 0..self.k {
            o.c[t] = (acc[t] % self.pn as u128) as u64;
        }
        o
    }

    pub fn frobenius(&self, a: &Witt) -> Witt {
        self.frob_pow(a, 1)
    }

    pub fn frobenius_inv(&self, a: &Witt) -> Witt {
        self.frob_pow(a, -1)
    }

    /// τ = σ² on scalars.
    pub fn tau(&self, a: &Witt) -> Witt {
        self.frob_pow(a, 2)
    }

    pub fn reduce(&self, a: &Witt) -> Fe {
        let d: Vec<u32> = a.c[..self.k].iter().map(|&c| (c % self.p) as u32).collect();
        self.gf.from_digits(&d)
    }

    /// Coordinatewise lift of a residue (not multiplicative).
    pub fn naive_lift(&self, a: Fe) -> Witt {
        let d: Vec<u64> = self.gf.digits(a).into_iter().map(u64::from).collect();
        self.from_coords(&d)
    }

    pub fn teichmuller(&self, a: Fe) -> Witt {
        match self.gf.log(a) {
            None => Witt::default(),
            Some(l) => self.teich[l as usize],
        }
    }

    /// ζ^j for the Teichmüller generator ζ = x.
    pub fn teich_pow(&self, j: i64) -> Witt {
        self.teich[j.rem_euclid(self.teich.len() as i64) as usize]
    }

    /// Inverse of a unit by Newton iteration from the residue inverse.
    pub fn inv(&self, a: &Witt) -> Option<Witt> {
        let r = self.reduce(a);
        if r == 0 {
            return None;
        }
        let mut b = self.teichmuller(self.gf.inv(r));
        let two = self.from_int(2);
        let mut prec = 1;
        while prec < self.n {
            b = self.mul(&b, &self.sub(&two, &self.mul(a, &b)));
            prec *= 2;
        }
        Some(b)
    }

    /// a/b for a unit b.
    pub fn div(&self, a: &Witt, b: &Witt) -> Option<Witt> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    /// Splits a nonzero element as p^v · u with u a unit.
    pub fn unit_part(&self, a: &Witt) -> Option<(u32, Witt)> {
        let v = self.valuation(a);
        (v < self.n).then(|| (v, self.div_p_pow(a, v).unwrap()))
    }

    /// Square root of a unit whose residue is a square.
    pub fn sqrt_unit(&self, a: &Witt) -> Option<Witt> {
        let r = self.gf.sqrt(self.reduce(a))?;
        if r == 0 {
            return None;
        }
        let mut y = self.teichmuller(r);
        let half = self.inv(&self.from_int(2)).unwrap();
        let mut prec = 1;
        while prec < self.n {
            let t = self.add(&y, &self.div(a, &y)?);
            y = self.mul(&t, &half);
            prec *= 2;
        }
        Some(y)
    }

    /// Solves c·σ(c) = u for a unit u fixed by σ, with c in W(F_{p^2}).
    pub fn solve_norm(&self, u: &Witt) -> Option<Witt> {
        let ur = self.reduce(u);
        let p = self.p;
        let z = self
            .gf
            .subfield_elements(2)
            .into_iter()
            .find(|&z| z != 0 && self.gf.pow(z, p + 1) == ur)?;
        let tz = self.teichmuller(z);
        let w = self.div(u, &self.mul(&tz, &self.frobenius(&tz)))?;
        let s = self.sqrt_unit(&w)?;
        Some(self.mul(&tz, &s))
    }

    /// The skew unit t = ζ^e with e minimal such that σ(t) = -t.
    pub fn skew_unit(&self) -> Witt {
        let q = self.q();
        self.teich_pow(((q - 1) / (2 * (self.p - 1))) as i64)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Witt {
        let mut w = Witt::default();
        for i in 0..self.k {
            w.c[i] = rng.random_range(0..self.pn);
        }
        w
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Witt {
        loop {
            let w = self.random(rng);
            if self.is_unit(&w) {
                return w;
            }
        }
    }
}

trait TrailingZerosBase {
    fn trailing_zeros_base(self, p: u64) -> u32;
}

impl TrailingZerosBase for u64 {
    fn trailing_zeros_base(mut self, p: u64) -> u32 {
        let mut v = 0;
        while self.is_multiple_of(p) {
            self /= p;
            v += 1;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generator_is_teichmuller() {
        let ctx = make_context(3, 1, 4).unwrap();
        assert_eq!(ctx.modulus().len(), 3);
        let x = ctx.teich_pow(1);
        assert_eq!(ctx.pow(&x, 8), ctx.one());
        assert_ne!(ctx.pow(&x, 4), ctx.one());
    }

    #[test]
    fn teichmuller_roots_of_unity_f9() {
        let ctx = make_context(3, 1, 4).unwrap();
        let gf = ctx.residue_field();
        for a in gf.units() {
            let t = ctx.teichmuller(a);
            assert_eq!(ctx.pow(&t, 8), ctx.one());
            assert_eq!(ctx.reduce(&t), a);
        }
        assert_eq!(ctx.teichmuller(0), ctx.zero());
    }

    #[test]
    fn frobenius_order_and_fixed_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ctx = make_context(3, 1, 6).unwrap();
        for _ in 0..100 {
            let a = ctx.random(&mut rng);
            assert_eq!(ctx.frobenius(&ctx.frobenius(&a)), a);
        }
        let p = ctx.from_int(3);
        assert_eq!(ctx.frobenius(&p), p);
        let c2 = make_context(5, 2, 5).unwrap();
        let a = c2.random(&mut rng);
        let mut b = a;
        for _ in 0..4 {
            b = c2.frobenius(&b);
        }
        assert_eq!(a, b);
        assert_eq!(c2.frobenius_inv(&c2.frobenius(&a)), a);
    }

    #[test]
    fn skew_unit_is_skew() {
        for (p, m) in [(3, 1), (3, 2), (5, 1), (7, 1), (3, 3)] {
            let ctx = make_context(p, m, 6).unwrap();
            let t = ctx.skew_unit();
            assert_eq!(ctx.valuation(&t), 0);
            assert!(ctx.is_zero(&ctx.add(&ctx.frobenius(&t), &t)));
        }
    }

    #[test]
    fn inverse_and_norm_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ctx = make_context(3, 2, 8).unwrap();
        for _ in 0..50 {
            let u = ctx.random_unit(&mut rng);
            assert_eq!(ctx.mul(&u, &ctx.inv(&u).unwrap()), ctx.one());
        }
        for v in [1i64, 2, 4, 5, 7, 10, 13] {
            let u = ctx.from_int(v);
            let c = ctx.solve_norm(&u).unwrap();
            assert_eq!(ctx.mul(&c, &ctx.frobenius(&c)), u);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_context(2, 1, 4).unwrap_err(), Error::EvenPrime);
        assert_eq!(make_context(9, 1, 4).unwrap_err(), Error::NotPrime(9));
        assert!(matches!(make_context_bounded(3, 2, 4, 1000), Err(Error::BoundExceeded { .. })));
    }
}

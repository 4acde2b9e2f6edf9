//! Finite fields F_{p^k} with log/exp tables.
//!
//! Elements are `u32` values whose base-p digits are the coordinates in the
//! power basis 1, x, ..., x^{k-1} of F_p[x]/(f), where f is the smallest
//! monic primitive polynomial of degree k (so x generates the unit group).

use crate::error::{Error, Result};

/// Element of a [`Gf`]; only meaningful together with its field.
pub type Fe = u32;

const ADD_TABLE_LIMIT: u32 = 1024;

#[derive(Debug, Clone)]
pub struct Gf {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    pow_p: Vec<u32>,
    exp: Vec<Fe>,
    log: Vec<u32>,
    add_tab: Option<Vec<Fe>>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Gf {
    /// Builds F_{p^k}. Rejects composite p; allows p = 2 (the prime checks
    /// for oddness live in the Witt context).
    pub fn new(p: u32, k: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("field degree must be positive".into()));
        }
        let q64 = (p as u64).checked_pow(k).filter(|&q| q <= 1 << 24);
        let q = q64.ok_or_else(|| Error::InvalidParameter(format!("field {p}^{k} too large")))? as u32;
        let pow_p: Vec<u32> = (0..k).map(|i| p.pow(i)).collect();
        let mut exp = vec![0; (q - 1) as usize];
        // tails enumerate c_0 + c_1 p + ... in increasing order
        for tail in 0..q {
            if tail % p == 0 {
                continue;
            }
            let mut modulus: Vec<u32> = (0..k).map(|i| (tail / pow_p[i as usize]) % p).collect();
            modulus.push(1);
            let mut f = Gf { p, k, q, modulus, pow_p: pow_p.clone(), exp: Vec::new(), log: Vec::new(), add_tab: None };
            if f.fill_tables(&mut exp) {
                f.exp = std::mem::take(&mut exp);
                let mut log = vec![u32::MAX; q as usize];
                for (j, &e) in f.exp.iter().enumerate() {
                    log[e as usize] = j as u32;
                }
                f.log = log;
                if q <= ADD_TABLE_LIMIT {
                    let mut tab = vec![0; (q * q) as usize];
                    for a in 0..q {
                        for b in 0..q {
                            tab[(a * q + b) as usize] = f.add_digits(a, b);
                        }
                    }
                    f.add_tab = Some(tab);
                }
                return Ok(f);
            }
        }
        unreachable!("a primitive polynomial always exists")
    }

    fn mul_x(&self, a: Fe) -> Fe {
        let p = self.p;
        let k = self.k as usize;
        let top = a / self.pow_p[k - 1];
        let shifted = (a % self.pow_p[k - 1]) * p;
        if top == 0 {
            return shifted;
        }
        // x^k = -(f_0 + ... + f_{k-1} x^{k-1})
        let mut corr = 0;
        for i in 0..k {
            let c = (p - self.modulus[i] % p) % p * top % p;
            corr += c * self.pow_p[i];
        }
        self.add_digits(shifted, corr)
    }

    fn fill_tables(&self, exp: &mut [Fe]) -> bool {
        let n = (self.q - 1) as usize;
        let mut cur: Fe = 1;
        for (j, slot) in exp.iter_mut().take(n).enumerate() {
            *slot = cur;
            cur = self.mul_x(cur);
            // x must have order exactly q-1
            if cur == 1 && j + 1 < n {
                return false;
            }
        }
        cur == 1
    }

    fn add_digits(&self, a: Fe, b: Fe) -> Fe {
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        for i in 0..self.k as usize {
            out += ((a % p + b % p) % p) * self.pow_p[i];
            a /= p;
            b /= p;
        }
        out
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.k
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    /// Coefficients f_0..f_k (monic) of the defining polynomial.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.add_tab {
            Some(t) => t[(a * self.q + b) as usize],
            None => self.add_digits(a, b),
        }
    }

    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.p;
        let mut x = a;
        let mut out = 0;
        for i in 0..self.k as usize {
            out += ((p - x % p) % p) * self.pow_p[i];
            x /= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(s % (self.q as u64 - 1)) as usize]
    }

    pub fn inv(&self, a: Fe) -> Fe {
        assert!(a != 0, "inverse of zero");
        let l = self.log[a as usize];
        self.exp[((self.q - 1 - l) % (self.q - 1)) as usize]
    }

    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u128 * e as u128 % (self.q as u128 - 1);
        self.exp[l as usize]
    }

    /// a ↦ a^{p^j} for any integer j (negative = inverse Frobenius).
    pub fn frob_pow(&self, a: Fe, j: i64) -> Fe {
        let j = j.rem_euclid(self.k as i64) as u32;
        self.pow(a, (self.p as u64).pow(j))
    }

    pub fn frob(&self, a: Fe) -> Fe {
        self.frob_pow(a, 1)
    }

    pub fn frob_inv(&self, a: Fe) -> Fe {
        self.frob_pow(a, -1)
    }

    /// Discrete log with respect to x, `None` for zero.
    pub fn log(&self, a: Fe) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    pub fn exp(&self, j: u64) -> Fe {
        self.exp[(j % (self.q as u64 - 1)) as usize]
    }

    pub fn from_int(&self, n: i64) -> Fe {
        n.rem_euclid(self.p as i64) as Fe
    }

    /// Coordinates in the power basis.
    pub fn digits(&self, a: Fe) -> Vec<u32> {
        (0..self.k as usize).map(|i| (a / self.pow_p[i]) % self.p).collect()
    }

    pub fn from_digits(&self, d: &[u32]) -> Fe {
        d.iter().zip(&self.pow_p).map(|(&c, &w)| (c % self.p) * w).sum()
    }

    /// Nonzero elements x^0, x^1, ..., x^{q-2}.
    pub fn units(&self) -> impl Iterator<Item = Fe> + '_ {
        self.exp.iter().copied()
    }

    /// 0 followed by the units in generator-power order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        std::iter::once(0).chain(self.units())
    }

    /// Generator of the subfield F_{p^d}; `d` must divide the degree.
    pub fn subfield_generator(&self, d: u32) -> Fe {
        assert!(self.k.is_multiple_of(d), "F_p^{d} is not a subfield");
        let qd = self.p.pow(d) as u64;
        self.exp((self.q as u64 - 1) / (qd - 1))
    }

    /// Elements of F_{p^d}: 0, then g^0, g^1, ... for the subfield generator g.
    pub fn subfield_elements(&self, d: u32) -> Vec<Fe> {
        let g = self.subfield_generator(d);
        let qd = self.p.pow(d) as u64;
        std::iter::once(0).chain((0..qd - 1).map(|j| self.pow(g, j))).collect()
    }

    pub fn in_subfield(&self, a: Fe, d: u32) -> bool {
        self.frob_pow(a, d as i64) == a
    }

    /// Square root if one exists.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        l.is_multiple_of(2).then(|| self.exp[(l / 2) as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_tables_consistent() {
        let f = Gf::new(3, 2).unwrap();
        assert_eq!(f.order(), 9);
        assert_eq!(f.units().count(), 8);
        for a in f.units() {
            assert_eq!(f.mul(a, f.inv(a)), 1);
            assert_eq!(f.pow(a, 8), 1);
            assert_eq!(f.frob_inv(f.frob(a)), a);
        }
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a)), 0);
        }
    }

    #[test]
    fn distributive_f81() {
        let f = Gf::new(3, 4).unwrap();
        for a in f.elements().step_by(7) {
            for b in f.elements().step_by(5) {
                for c in f.elements().step_by(11) {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive() {
        let f = Gf::new(5, 2).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.frob(f.add(a, b)), f.add(f.frob(a), f.frob(b)));
            }
        }
    }

    #[test]
    fn subfield() {
        let f = Gf::new(3, 4).unwrap();
        let sub = f.subfield_elements(2);
        assert_eq!(sub.len(), 9);
        assert!(sub.iter().all(|&a| f.in_subfield(a, 2)));
        assert_eq!(f.elements().filter(|&a| f.in_subfield(a, 2)).count(), 9);
    }

    #[test]
    fn rejects_composite() {
        assert_eq!(Gf::new(9, 1).unwrap_err(), Error::NotPrime(9));
    }
}

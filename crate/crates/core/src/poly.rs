//! Sparse multivariate polynomials over a finite field.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::gf::{Fe, Gf};

pub type Monomial = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Fe>,
}

pub fn total_degree(m: &[u16]) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

/// Graded reverse lexicographic comparison.
pub fn grevlex(a: &[u16], b: &[u16]) -> Ordering {
    total_degree(a).cmp(&total_degree(b)).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

/// Graded lexicographic comparison (variable 0 largest).
pub fn grlex(a: &[u16], b: &[u16]) -> Ordering {
    total_degree(a).cmp(&total_degree(b)).then_with(|| a.cmp(b))
}

/// All monomials in `n` variables of total degree ≤ d.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(n: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e as u16);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Fe) -> Self {
        Self::term(nvars, c, vec![0; nvars])
    }

    pub fn term(nvars: usize, c: Fe, mono: Monomial) -> Self {
        let mut p = Self::zero(nvars);
        if c != 0 {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        Self::term(nvars, 1, m)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> &BTreeMap<Monomial, Fe> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, m: &[u16]) -> Fe {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| total_degree(m)).max()
    }

    pub fn constant_term(&self) -> Fe {
        self.coeff(&vec![0; self.nvars])
    }

    /// Coefficients of the degree-one part, indexed by variable.
    pub fn linear_part(&self) -> Vec<Fe> {
        (0..self.nvars)
            .map(|i| {
                let mut m = vec![0; self.nvars];
                m[i] = 1;
                self.coeff(&m)
            })
            .collect()
    }

    fn add_term(&mut self, gf: &Gf, m: Monomial, c: Fe) {
        if c == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = gf.add(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, gf: &Gf, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(gf, m.clone(), c);
        }
        out
    }

    pub fn sub(&self, gf: &Gf, other: &Poly) -> Poly {
        self.add(gf, &other.scale(gf, gf.neg(1)))
    }

    pub fn scale(&self, gf: &Gf, c: Fe) -> Poly {
        if c == 0 {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, &a)| (m.clone(), gf.mul(a, c))).collect() }
    }

    pub fn mul_term(&self, gf: &Gf, c: Fe, mono: &[u16]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        if c == 0 {
            return out;
        }
        for (m, &a) in &self.terms {
            let mm: Monomial = m.iter().zip(mono).map(|(x, y)| x + y).collect();
            out.terms.insert(mm, gf.mul(a, c));
        }
        out
    }

    pub fn mul(&self, gf: &Gf, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, &c) in &other.terms {
            for (mm, a) in self.mul_term(gf, c, m).terms {
                out.add_term(gf, mm, a);
            }
        }
        out
    }

    pub fn pow(&self, gf: &Gf, e: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, 1);
        for _ in 0..e {
            out = out.mul(gf, self);
        }
        out
    }

    pub fn eval(&self, gf: &Gf, point: &[Fe]) -> Fe {
        self.terms.iter().fold(0, |acc, (m, &c)| {
            let v = m.iter().zip(point).fold(c, |v, (&e, &x)| gf.mul(v, gf.pow(x, e as u64)));
            gf.add(acc, v)
        })
    }

    /// Replaces variable i by the polynomial `s`.
    pub fn substitute(&self, gf: &Gf, i: usize, s: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        let mut powers: Vec<Poly> = vec![Poly::constant(self.nvars, 1)];
        for (m, &c) in &self.terms {
            let e = m[i] as usize;
            while powers.len() <= e {
                let next = powers.last().unwrap().mul(gf, s);
                powers.push(next);
            }
            let mut rest = m.clone();
            rest[i] = 0;
            out = out.add(gf, &powers[e].mul_term(gf, c, &rest));
        }
        out
    }

    /// Division by a single polynomial for the lexicographic order with the
    /// given variable priority (first entry largest). Returns (quotient, remainder).
    pub fn divide_lex(&self, gf: &Gf, g: &Poly, priority: &[usize]) -> (Poly, Poly) {
        let key = |m: &Monomial| priority.iter().map(|&i| m[i]).collect::<Vec<_>>();
        let lead = |p: &Poly| p.terms.iter().max_by(|a, b| key(a.0).cmp(&key(b.0))).map(|(m, &c)| (m.clone(), c));
        let (gm, gc) = lead(g).expect("division by zero polynomial");
        let ginv = gf.inv(gc);
        let mut f = self.clone();
        let mut q = Poly::zero(self.nvars);
        let mut r = Poly::zero(self.nvars);
        while let Some((fm, fc)) = lead(&f) {
            if fm.iter().zip(&gm).all(|(a, b)| a >= b) {
                let mono: Monomial = fm.iter().zip(&gm).map(|(a, b)| a - b).collect();
                let c = gf.mul(fc, ginv);
                q.add_term(gf, mono.clone(), c);
                f = f.sub(gf, &g.mul_term(gf, c, &mono));
            } else {
                r.add_term(gf, fm.clone(), fc);
                f.terms.remove(&fm);
            }
        }
        (q, r)
    }

    /// Human-readable form with the given variable names, terms in
    /// descending graded-lex order and coefficients as field indices.
    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut ts: Vec<(&Monomial, &Fe)> = self.terms.iter().collect();
        ts.sort_by(|a, b| grlex(b.0, a.0));
        ts.iter()
            .map(|(m, c)| {
                let mut s = format!("{c}");
                for (i, &e) in m.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => s.push_str(&format!("*{}", names[i])),
                        _ => s.push_str(&format!("*{}^{e}", names[i])),
                    }
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

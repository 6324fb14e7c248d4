//! Dense univariate polynomials over a finite field, with factorization.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use super::field::{Elem, Field};

/// A polynomial with coefficients in `field`, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Field,
    c: Vec<Elem>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_string_var("x"))
    }
}

impl Poly {
    pub fn new(field: Field, mut c: Vec<Elem>) -> Poly {
        while c.last().is_some_and(|e| e.is_zero()) {
            c.pop();
        }
        Poly { field, c }
    }

    pub fn from_ints(field: Field, c: &[i64]) -> Poly {
        Poly::new(field, c.iter().map(|&n| field.int(n)).collect())
    }

    pub fn zero(field: Field) -> Poly {
        Poly { field, c: Vec::new() }
    }

    pub fn one(field: Field) -> Poly {
        Poly::constant(field, field.one())
    }

    pub fn constant(field: Field, a: Elem) -> Poly {
        Poly::new(field, vec![a])
    }

    /// The variable.
    pub fn x(field: Field) -> Poly {
        Poly::monomial(field, field.one(), 1)
    }

    /// c·x^k.
    pub fn monomial(field: Field, c: Elem, k: usize) -> Poly {
        let mut v = vec![field.zero(); k + 1];
        v[k] = c;
        Poly::new(field, v)
    }

    /// x − a.
    pub fn linear(field: Field, a: Elem) -> Poly {
        Poly::new(field, vec![field.neg(a), field.one()])
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0] == self.field.one()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with −1 for zero.
    pub fn degree(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.c.get(i).copied().unwrap_or(Elem::ZERO)
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn lead(&self) -> Elem {
        self.c.last().copied().unwrap_or(Elem::ZERO)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Exponent of the largest power of x dividing self; `None` for zero.
    pub fn low_order(&self) -> Option<usize> {
        self.c.iter().position(|e| !e.is_zero())
    }

    pub fn scale(&self, a: Elem) -> Poly {
        let f = self.field;
        Poly::new(f, self.c.iter().map(|&e| f.mul(e, a)).collect())
    }

    /// self · x^k.
    pub fn shl(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Elem::ZERO; k];
        v.extend_from_slice(&self.c);
        Poly::new(self.field, v)
    }

    /// Drop the k lowest coefficients (division by x^k, discarding the remainder).
    pub fn shr(&self, k: usize) -> Poly {
        Poly::new(self.field, self.c.iter().skip(k).copied().collect())
    }

    /// Truncate to degree < k.
    pub fn truncate(&self, k: usize) -> Poly {
        Poly::new(self.field, self.c.iter().take(k).copied().collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.field.inv(self.lead()))
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == self.field.one()
    }

    pub fn derivative(&self) -> Poly {
        let f = self.field;
        Poly::new(
            f,
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &e)| f.mul(f.int(i as i64), e))
                .collect(),
        )
    }

    pub fn eval(&self, a: Elem) -> Elem {
        let f = self.field;
        self.c.iter().rev().fold(f.zero(), |acc, &e| f.add(f.mul(acc, a), e))
    }

    pub fn pow(&self, e: u64) -> Poly {
        let mut result = Poly::one(self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// self(g).
    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::zero(self.field);
        for &e in self.c.iter().rev() {
            acc = &(&acc * g) + &Poly::constant(self.field, e);
        }
        acc
    }

    /// self(x + a).
    pub fn shift(&self, a: Elem) -> Poly {
        self.compose(&Poly::new(self.field, vec![a, self.field.one()]))
    }

    /// self(u·x).
    pub fn scale_var(&self, u: Elem) -> Poly {
        let f = self.field;
        let mut pw = f.one();
        let mut v = Vec::with_capacity(self.c.len());
        for &e in &self.c {
            v.push(f.mul(e, pw));
            pw = f.mul(pw, u);
        }
        Poly::new(f, v)
    }

    /// x^n · self(1/x), for n ≥ deg.
    pub fn reverse(&self, n: usize) -> Poly {
        let mut v = vec![Elem::ZERO; n + 1];
        for (i, &e) in self.c.iter().enumerate() {
            v[n - i] = e;
        }
        Poly::new(self.field, v)
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let f = self.field;
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return (Poly::zero(f), self.clone());
        }
        let inv = f.inv(d.lead());
        let mut r = self.c.clone();
        let mut q = vec![Elem::ZERO; r.len() - dd];
        for i in (0..q.len()).rev() {
            let co = f.mul(r[i + dd], inv);
            if co.is_zero() {
                continue;
            }
            q[i] = co;
            for (j, &dj) in d.c.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(co, dj));
            }
        }
        r.truncate(dd);
        (Poly::new(f, q), Poly::new(f, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    /// Exact quotient; panics when the division leaves a remainder.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        let (q, r) = self.divrem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.rem(self).is_zero()
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// (g, s, t) with g = s·self + t·other monic.
    pub fn ext_gcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let f = self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(f), Poly::zero(f));
        let (mut t0, mut t1) = (Poly::zero(f), Poly::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = &s0 - &(&q * &s1);
            s0 = std::mem::replace(&mut s1, s);
            let t = &t0 - &(&q * &t1);
            t0 = std::mem::replace(&mut t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lead());
        (r0.scale(inv), s0.scale(inv), t0.scale(inv))
    }

    /// Inverse modulo m, if it exists.
    pub fn inv_mod(&self, m: &Poly) -> Option<Poly> {
        let (g, s, _) = self.rem(m).ext_gcd(m);
        g.is_one().then(|| s.rem(m))
    }

    pub fn mul_mod(&self, other: &Poly, m: &Poly) -> Poly {
        (self * other).rem(m)
    }

    pub fn pow_mod(&self, e: u64, m: &Poly) -> Poly {
        let mut result = Poly::one(self.field).rem(m);
        let mut base = self.rem(m);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_mod(&base, m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(&base, m);
            }
        }
        result
    }

    /// g with g^p = self, when every exponent is divisible by p.
    pub fn pth_root(&self) -> Option<Poly> {
        let f = self.field;
        let p = f.p() as usize;
        let mut v = Vec::with_capacity(self.c.len() / p + 1);
        for (i, &e) in self.c.iter().enumerate() {
            if i % p == 0 {
                v.push(f.pth_root(e));
            } else if !e.is_zero() {
                return None;
            }
        }
        Some(Poly::new(f, v))
    }

    /// Distinct roots in the coefficient field, ascending by encoding.
    pub fn roots(&self) -> Vec<Elem> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut out: Vec<Elem> = self
            .factor()
            .into_iter()
            .filter(|(g, _)| g.deg() == Some(1))
            .map(|(g, _)| self.field.neg(g.coeff(0)))
            .collect();
        out.sort();
        out
    }

    /// Multiplicity of `a` as a root.
    pub fn root_multiplicity(&self, a: Elem) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        self.shift(a).low_order().unwrap_or(0)
    }

    /// Squarefree decomposition: monic squarefree, pairwise coprime s_i with
    /// self = lead · Π s_i^{e_i}.
    pub fn squarefree(&self) -> Vec<(Poly, usize)> {
        let f = self.field;
        let p = f.p() as usize;
        let mut out = Vec::new();
        if self.deg().unwrap_or(0) == 0 {
            return out;
        }
        let a = self.monic();
        let d = a.derivative();
        if d.is_zero() {
            let r = a.pth_root().expect("zero derivative implies a p-th power");
            for (g, e) in r.squarefree() {
                out.push((g, e * p));
            }
            return out;
        }
        let mut c = a.gcd(&d);
        let mut w = a.div_exact(&c);
        let mut i = 1;
        while !w.is_constant() {
            let y = w.gcd(&c);
            let z = w.div_exact(&y);
            if !z.is_constant() {
                out.push((z, i));
            }
            i += 1;
            w = y;
            c = c.div_exact(&w);
        }
        if !c.is_constant() {
            let r = c.pth_root().expect("remaining cofactor is a p-th power");
            for (g, e) in r.squarefree() {
                out.push((g, e * p));
            }
        }
        out.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
        out
    }

    /// Full factorization into monic irreducibles with multiplicities, sorted.
    pub fn factor(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        for (s, e) in self.squarefree() {
            for (g, d) in s.distinct_degree() {
                for h in g.equal_degree(d) {
                    out.push((h, e));
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// self^{q^k} mod m via repeated Frobenius.
    fn frob_mod(&self, k: u32, m: &Poly) -> Poly {
        let q = self.field.q() as u64;
        let mut h = self.rem(m);
        for _ in 0..k {
            h = h.pow_mod(q, m);
        }
        h
    }

    fn distinct_degree(&self) -> Vec<(Poly, usize)> {
        let f = self.field;
        let mut out = Vec::new();
        let mut a = self.monic();
        let x = Poly::x(f);
        let mut h = x.clone();
        let mut d = 0usize;
        while a.deg().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = h.frob_mod(1, &a);
            let g = (&h - &x).gcd(&a);
            if !g.is_constant() {
                a = a.div_exact(&g);
                h = h.rem(&a);
                out.push((g, d));
            }
        }
        if !a.is_constant() {
            let dd = a.deg().unwrap();
            out.push((a, dd));
        }
        out
    }

    /// Split a product of distinct irreducibles of degree d (Cantor–Zassenhaus,
    /// with a fixed pseudo-random sequence so results are reproducible).
    fn equal_degree(&self, d: usize) -> Vec<Poly> {
        let n = self.deg().unwrap_or(0);
        if n == 0 {
            return Vec::new();
        }
        if n == d {
            return vec![self.monic()];
        }
        let f = self.field;
        let mut seed: u64 = 0x9E37_79B9_7F4A_7C15 ^ (n as u64) ^ ((d as u64) << 32);
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        loop {
            let r = Poly::new(f, (0..n).map(|_| Elem((next() % f.q() as u64) as u32)).collect());
            if r.is_constant() {
                continue;
            }
            let b = if f.p() == 2 {
                let mut t = r.rem(self);
                let mut acc = t.clone();
                for _ in 1..(f.m() as usize * d) {
                    t = t.mul_mod(&t, self);
                    acc = &acc + &t;
                }
                acc
            } else {
                let mut norm = r.rem(self);
                let mut t = norm.clone();
                for _ in 1..d {
                    t = t.frob_mod(1, self);
                    norm = norm.mul_mod(&t, self);
                }
                let mut b = norm.pow_mod((f.q() as u64 - 1) / 2, self);
                b = &b - &Poly::one(f);
                b
            };
            let g = b.gcd(self);
            if !g.is_constant() && g.deg() != self.deg() {
                let mut out = g.equal_degree(d);
                out.extend(self.div_exact(&g).equal_degree(d));
                out.sort();
                return out;
            }
        }
    }

    /// Render with the given variable name, descending degree.
    pub fn to_string_var(&self, var: &str) -> String {
        let f = self.field;
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, &e) in self.c.iter().enumerate().rev() {
            if e.is_zero() {
                continue;
            }
            let mut cs = f.fmt_elem(e);
            let compound = cs.contains('+');
            if compound && i > 0 {
                cs = format!("({cs})");
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let term = if i == 0 {
                cs
            } else if e == f.one() {
                mono
            } else {
                format!("{cs}*{mono}")
            };
            if !s.is_empty() {
                s.push('+');
            }
            s.push_str(&term);
        }
        s
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree first, then coefficients from the top down by encoding.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c
            .len()
            .cmp(&other.c.len())
            .then_with(|| self.c.iter().rev().cmp(other.c.iter().rev()))
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let f = self.field;
        let n = self.c.len().max(o.c.len());
        Poly::new(f, (0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let f = self.field;
        let n = self.c.len().max(o.c.len());
        Poly::new(f, (0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let f = self.field;
        Poly::new(f, self.c.iter().map(|&e| f.neg(e)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let f = self.field;
        if self.is_zero() || o.is_zero() {
            return Poly::zero(f);
        }
        let mut v = vec![Elem::ZERO; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        Poly::new(f, v)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, o: &Poly) -> Poly {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Field {
        Field::prime(5).unwrap()
    }

    #[test]
    fn divrem_roundtrip() {
        let f = f5();
        let a = Poly::from_ints(f, &[1, 2, 3, 4, 1, 2]);
        let b = Poly::from_ints(f, &[3, 0, 1]);
        let (q, r) = a.divrem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree() < b.degree());
    }

    #[test]
    fn factor_reconstructs() {
        for &(p, m) in &[(2u32, 1u32), (3, 1), (5, 1), (7, 1), (3, 2), (2, 3)] {
            let f = Field::new(p, m).unwrap();
            let polys = [
                Poly::from_ints(f, &[1, 1, 0, 1, 1, 0, 1]),
                Poly::from_ints(f, &[0, 0, 1]).pow(3) * Poly::from_ints(f, &[1, 1, 1]).pow(2),
                Poly::from_ints(f, &[2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
                Poly::from_ints(f, &[1, 0, 1]).pow(p as u64) * Poly::from_ints(f, &[1, 1]),
            ];
            for a in polys {
                if a.is_zero() {
                    continue;
                }
                let fac = a.factor();
                let mut prod = Poly::constant(f, a.lead());
                for (g, e) in &fac {
                    assert!(g.is_monic());
                    prod = &prod * &g.pow(*e as u64);
                    let irreducible = g.factor();
                    assert_eq!(irreducible.len(), 1);
                    assert_eq!(irreducible[0].1, 1);
                }
                assert_eq!(prod, a, "p={p} m={m}");
            }
        }
    }

    #[test]
    fn roots_of_split_poly() {
        let f = f5();
        let a = Poly::from_ints(f, &[0, 1]).pow(3) * Poly::from_ints(f, &[-1, 1]) * Poly::from_ints(f, &[1, 0, 1]);
        let r = a.roots();
        assert_eq!(r, vec![f.int(0), f.int(1), f.int(2), f.int(3)]);
        assert_eq!(a.root_multiplicity(f.int(0)), 3);
    }

    #[test]
    fn display_descending() {
        let f = f5();
        assert_eq!(Poly::from_ints(f, &[1, 0, 1]).to_string_var("x"), "x^2+1");
        assert_eq!(Poly::from_ints(f, &[1, -2]).to_string_var("x"), "3*x+1");
    }
}

//! Rational functions in one variable over F_q, kept in canonical form.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::field::{Elem, Field};
use super::poly::Poly;

/// A point of P^1 over the coefficient field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Point {
    Finite(Elem),
    Infinity,
}

/// A closed point of P^1: the zero set of a monic irreducible polynomial, or ∞.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Place {
    Finite(Poly),
    Infinity,
}

/// num/den with den monic and gcd(num, den) = 1. Equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// First `n` coefficients of the power series a/b; requires b(0) ≠ 0.
pub fn series_div(a: &Poly, b: &Poly, n: usize) -> Vec<Elem> {
    let f = a.field();
    let b0inv = f.inv(b.coeff(0));
    let mut rem: Vec<Elem> = (0..n).map(|i| a.coeff(i)).collect();
    let mut out = vec![f.zero(); n];
    for i in 0..n {
        let c = f.mul(rem[i], b0inv);
        out[i] = c;
        if c.is_zero() {
            continue;
        }
        for (j, &bj) in b.coeffs().iter().enumerate().skip(1) {
            if i + j >= n {
                break;
            }
            rem[i + j] = f.sub(rem[i + j], f.mul(c, bj));
        }
    }
    out
}

impl RatFunc {
    /// Canonical num/den; panics when den is zero.
    pub fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "rational function with zero denominator");
        let f = num.field();
        if num.is_zero() {
            return RatFunc { num, den: Poly::one(f) };
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num.div_exact(&g), den.div_exact(&g));
        let inv = f.inv(d.lead());
        n = n.scale(inv);
        d = d.scale(inv);
        RatFunc { num: n, den: d }
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        let f = p.field();
        RatFunc { num: p, den: Poly::one(f) }
    }

    pub fn zero(f: Field) -> RatFunc {
        RatFunc::from_poly(Poly::zero(f))
    }

    pub fn one(f: Field) -> RatFunc {
        RatFunc::from_poly(Poly::one(f))
    }

    pub fn constant(f: Field, a: Elem) -> RatFunc {
        RatFunc::from_poly(Poly::constant(f, a))
    }

    pub fn x(f: Field) -> RatFunc {
        RatFunc::from_poly(Poly::x(f))
    }

    /// c · x^k for any integer k.
    pub fn monomial(f: Field, c: Elem, k: i64) -> RatFunc {
        if k >= 0 {
            RatFunc::from_poly(Poly::monomial(f, c, k as usize))
        } else {
            RatFunc::new(Poly::constant(f, c), Poly::monomial(f, f.one(), (-k) as usize))
        }
    }

    /// 1/∏(x − a_i)^{e_i}.
    pub fn inverse_product(f: Field, factors: &[(Elem, u64)]) -> RatFunc {
        let mut d = Poly::one(f);
        for &(a, e) in factors {
            d = &d * &Poly::linear(f, a).pow(e);
        }
        RatFunc::new(Poly::one(f), d)
    }

    pub fn field(&self) -> Field {
        self.num.field()
    }
    pub fn num(&self) -> &Poly {
        &self.num
    }
    pub fn den(&self) -> &Poly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }
    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn scale(&self, a: Elem) -> RatFunc {
        RatFunc::new(self.num.scale(a), self.den.clone())
    }

    pub fn inv(&self) -> RatFunc {
        assert!(!self.is_zero(), "inverse of the zero function");
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i64) -> RatFunc {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let k = e.unsigned_abs();
        RatFunc { num: base.num.pow(k), den: base.den.pow(k) }.renormalized()
    }

    fn renormalized(self) -> RatFunc {
        if self.den.is_monic() {
            self
        } else {
            RatFunc::new(self.num, self.den)
        }
    }

    pub fn derivative(&self) -> RatFunc {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        RatFunc::new(n, &self.den * &self.den)
    }

    /// Value at a finite point, `None` at a pole.
    pub fn eval(&self, a: Elem) -> Option<Elem> {
        let f = self.field();
        let d = self.den.eval(a);
        (!d.is_zero()).then(|| f.div(self.num.eval(a), d))
    }

    /// self(u·x + b).
    pub fn compose_affine(&self, u: Elem, b: Elem) -> RatFunc {
        let f = self.field();
        let lin = Poly::new(f, vec![b, u]);
        RatFunc::new(self.num.compose(&lin), self.den.compose(&lin))
    }

    /// self(g) for a rational function g.
    pub fn compose(&self, g: &RatFunc) -> RatFunc {
        let f = self.field();
        let horner = |p: &Poly| {
            let mut acc = RatFunc::zero(f);
            for &c in p.coeffs().iter().rev() {
                acc = &(&acc * g) + &RatFunc::constant(f, c);
            }
            acc
        };
        &horner(&self.num) / &horner(&self.den)
    }

    /// Pullback of the differential self·dx under x ↦ u·x + b, as a function times dx.
    pub fn pullback_form(&self, u: Elem, b: Elem) -> RatFunc {
        self.compose_affine(u, b).scale(u)
    }

    /// Rescale so the numerator is monic (the zero function is unchanged).
    pub fn monic_numerator(&self) -> RatFunc {
        if self.is_zero() {
            return self.clone();
        }
        let f = self.field();
        self.scale(f.inv(self.num.lead()))
    }

    /// Order of vanishing at a point (negative at poles); `i64::MAX` for zero.
    pub fn ord_at(&self, pt: Point) -> i64 {
        if self.is_zero() {
            return i64::MAX;
        }
        match pt {
            Point::Finite(a) => {
                self.num.root_multiplicity(a) as i64 - self.den.root_multiplicity(a) as i64
            }
            Point::Infinity => self.den.degree() - self.num.degree(),
        }
    }

    /// Order of the differential self·dx at a point.
    pub fn form_ord_at(&self, pt: Point) -> i64 {
        match pt {
            Point::Infinity if !self.is_zero() => self.ord_at(pt) - 2,
            _ => self.ord_at(pt),
        }
    }

    /// g with g^p = self, if it exists.
    pub fn pth_root(&self) -> Option<RatFunc> {
        Some(RatFunc::new(self.num.pth_root()?, self.den.pth_root()?))
    }

    pub fn is_pth_power(&self) -> bool {
        self.num.pth_root().is_some() && self.den.pth_root().is_some()
    }

    /// Polynomial part (quotient of num by den).
    pub fn poly_part(&self) -> Poly {
        self.num.divrem(&self.den).0
    }

    /// Distinct finite poles as (monic irreducible, order).
    pub fn finite_poles(&self) -> Vec<(Poly, usize)> {
        self.den.factor()
    }

    /// Order of the pole at ∞ (0 if none).
    pub fn pole_order_at_infinity(&self) -> usize {
        (self.num.degree() - self.den.degree()).max(0) as usize
    }

    /// Numerator U of the principal part U/π^e at the place π (π^e ∥ den), deg U < e·deg π.
    pub fn principal_numerator(&self, pi: &Poly) -> (Poly, usize) {
        let f = self.field();
        let mut e = 0usize;
        let mut rest = self.den.clone();
        loop {
            let (q, r) = rest.divrem(pi);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e == 0 {
            return (Poly::zero(f), 0);
        }
        let pie = pi.pow(e as u64);
        let inv = rest.inv_mod(&pie).expect("cofactor is prime to π");
        (self.num.mul_mod(&inv, &pie), e)
    }

    /// π-adic principal part: entry j−1 holds the coefficient of π^{−j}, j = 1..=e.
    pub fn principal_part(&self, pi: &Poly) -> Vec<Poly> {
        let (mut u, e) = self.principal_numerator(pi);
        let mut digits = Vec::with_capacity(e);
        for _ in 0..e {
            let (q, r) = u.divrem(pi);
            digits.push(r);
            u = q;
        }
        digits.reverse();
        digits
    }

    /// Laurent coefficients at a finite point: (order of the first term, coefficients).
    pub fn laurent_at(&self, a: Elem, n: usize) -> (i64, Vec<Elem>) {
        let num = self.num.shift(a);
        let den = self.den.shift(a);
        let vn = num.low_order().unwrap_or(0);
        let vd = den.low_order().unwrap_or(0);
        let coeffs = series_div(&num.shr(vn), &den.shr(vd), n);
        (vn as i64 - vd as i64, coeffs)
    }

    /// Expansion in 1/x at ∞: (k0, c) meaning self = Σ_i c_i x^{−(k0+i)}.
    pub fn laurent_at_infinity(&self, n: usize) -> (i64, Vec<Elem>) {
        let dn = self.num.deg().unwrap_or(0);
        let dd = self.den.deg().unwrap_or(0);
        let coeffs = series_div(&self.num.reverse(dn), &self.den.reverse(dd), n);
        (dd as i64 - dn as i64, coeffs)
    }

    pub fn render(&self, var: &str) -> String {
        let f = self.field();
        if self.den.is_one() {
            return self.num.to_string_var(var);
        }
        let numerator = {
            let s = self.num.to_string_var(var);
            if s.contains('+') || s[1..].contains('-') {
                format!("({s})")
            } else {
                s
            }
        };
        let mut factors = self.den.factor();
        factors.sort_by(|a, b| {
            let key = |g: &Poly| (g.deg(), if g.deg() == Some(1) { f.neg(g.coeff(0)) } else { Elem::ZERO });
            key(&a.0).cmp(&key(&b.0)).then_with(|| a.0.cmp(&b.0))
        });
        let mut parts = Vec::new();
        for (g, e) in &factors {
            let (base, atomic) = if g.deg() == Some(1) {
                let root = f.neg(g.coeff(0));
                if root.is_zero() {
                    (var.to_string(), true)
                } else {
                    let r = f.fmt_elem(root);
                    if r.contains('+') {
                        (format!("{var}-({r})"), false)
                    } else {
                        (format!("{var}-{r}"), false)
                    }
                }
            } else {
                (g.to_string_var(var), false)
            };
            let wrapped = if atomic { base } else { format!("({base})") };
            parts.push(if *e == 1 { wrapped } else { format!("{wrapped}^{e}") });
        }
        let denominator = if parts.len() == 1 { parts.remove(0) } else { format!("({})", parts.join("*")) };
        format!("{numerator}/{denominator}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("x"))
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den.clone());
        }
        RatFunc::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Div<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn div(self, o: &RatFunc) -> RatFunc {
        assert!(!o.is_zero(), "division by the zero function");
        RatFunc::new(&self.num * &o.den, &self.den * &o.num)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc {
                (&self).$m(&o)
            }
        }
        impl $tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: &RatFunc) -> RatFunc {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

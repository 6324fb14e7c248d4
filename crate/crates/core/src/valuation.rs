//! Gauss valuations on F_q(τ)(X) with τ^N = t, and reductions to F_q(x).

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::algebra::parse::{generator_elem, parse_expr, Expr};
use crate::algebra::{AlgebraError, Elem, Field, Poly, RatFunc};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuationError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the valuation of zero is undefined")]
    Zero,
    #[error("the radius parameter s must be nonnegative, got {0}")]
    NegativeRadius(Q),
    #[error("centre {0} is not in the open unit disc")]
    CentreOutsideDisc(String),
    #[error("malformed place `{0}`; expected `s=<rational>,z=<expr in t>`")]
    BadPlace(String),
    #[error("`{0}` is not a polynomial in t")]
    NotTPolynomial(String),
}

/// Polynomial in τ = t^{1/n} with coefficients in F_q.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TPoly {
    n: u32,
    poly: Poly,
}

fn spread(p: &Poly, k: u32) -> Poly {
    if k == 1 || p.is_zero() {
        return p.clone();
    }
    let f = p.field();
    let mut v = vec![f.zero(); (p.coeffs().len() - 1) * k as usize + 1];
    for (i, &c) in p.coeffs().iter().enumerate() {
        v[i * k as usize] = c;
    }
    Poly::new(f, v)
}

/// t-exponent k/n as a reduced rational.
fn exponent(k: usize, n: u32) -> Q {
    Q::new(k as i64, n as i64)
}

pub(crate) fn fmt_t_power(r: Q) -> String {
    if r == Q::from_integer(1) {
        "t".into()
    } else if r.is_integer() {
        format!("t^{r}")
    } else {
        format!("t^({r})")
    }
}

/// Ascending-degree rendering of a polynomial in τ = t^{1/n}.
fn fmt_tau_poly(p: &Poly, n: u32) -> String {
    let f = p.field();
    if p.is_zero() {
        return "0".into();
    }
    let mut terms = Vec::new();
    for (k, &c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let cs = f.fmt_elem(c);
        let cs = if cs.contains('+') { format!("({cs})") } else { cs };
        terms.push(match (k, c == f.one()) {
            (0, _) => cs,
            (_, true) => fmt_t_power(exponent(k, n)),
            (_, false) => format!("{cs}*{}", fmt_t_power(exponent(k, n))),
        });
    }
    terms.join("+")
}

impl TPoly {
    pub fn new(n: u32, poly: Poly) -> TPoly {
        TPoly { n, poly }.reduced()
    }

    pub fn zero(f: Field) -> TPoly {
        TPoly { n: 1, poly: Poly::zero(f) }
    }

    pub fn field(&self) -> Field {
        self.poly.field()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Smallest denominator representing the same element.
    fn reduced(self) -> TPoly {
        let mut g = self.n as u64;
        for (k, c) in self.poly.coeffs().iter().enumerate() {
            if !c.is_zero() {
                g = g.gcd(&(k as u64));
            }
        }
        if g <= 1 {
            return self;
        }
        let f = self.poly.field();
        let v = self.poly.coeffs().iter().step_by(g as usize).copied().collect();
        TPoly { n: self.n / g as u32, poly: Poly::new(f, v) }
    }

    /// Coefficients as a polynomial in τ = t^{1/n}, for n a multiple of self.n.
    pub fn at(&self, n: u32) -> Poly {
        assert!(n % self.n == 0, "denominator {n} is not a multiple of {}", self.n);
        spread(&self.poly, n / self.n)
    }

    /// t-adic valuation (None for zero).
    pub fn valuation(&self) -> Option<Q> {
        self.poly.low_order().map(|k| exponent(k, self.n))
    }

    /// Coefficient of the lowest t-power.
    pub fn leading(&self) -> Option<Elem> {
        self.poly.low_order().map(|k| self.poly.coeff(k))
    }

    pub fn sub(&self, o: &TPoly) -> TPoly {
        let n = self.n.lcm(&o.n);
        TPoly::new(n, &self.at(n) - &o.at(n))
    }

    /// Lexicographic order by t-exponent then coefficient, with 0 first.
    pub fn sort_key(&self) -> Vec<(Q, u32)> {
        self.poly
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (exponent(k, self.n), c.code()))
            .collect()
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_tau_poly(&self.poly, self.n))
    }
}

/// Σ c_i(τ) X^i with c_i ∈ F_q[τ].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BiPoly {
    field: Field,
    c: Vec<Poly>,
}

impl BiPoly {
    pub fn new(field: Field, mut c: Vec<Poly>) -> BiPoly {
        while c.last().is_some_and(|p| p.is_zero()) {
            c.pop();
        }
        BiPoly { field, c }
    }

    pub fn zero(f: Field) -> BiPoly {
        BiPoly { field: f, c: Vec::new() }
    }

    pub fn constant(p: Poly) -> BiPoly {
        let f = p.field();
        BiPoly::new(f, vec![p])
    }

    pub fn one(f: Field) -> BiPoly {
        BiPoly::constant(Poly::one(f))
    }

    /// X.
    pub fn var(f: Field) -> BiPoly {
        BiPoly::new(f, vec![Poly::zero(f), Poly::one(f)])
    }

    /// τ^k.
    pub fn tau_pow(f: Field, k: usize) -> BiPoly {
        BiPoly::constant(Poly::monomial(f, f.one(), k))
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg_x(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> &Poly {
        self.c.last().expect("leading coefficient of zero")
    }

    pub fn max_tau_degree(&self) -> usize {
        self.c.iter().filter_map(|p| p.deg()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let n = self.c.len().max(o.c.len());
        let zero = Poly::zero(self.field);
        BiPoly::new(
            self.field,
            (0..n)
                .map(|i| self.c.get(i).unwrap_or(&zero) + o.c.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> BiPoly {
        BiPoly { field: self.field, c: self.c.iter().map(|p| -p).collect() }
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        if self.is_zero() || o.is_zero() {
            return BiPoly::zero(self.field);
        }
        let mut v = vec![Poly::zero(self.field); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] = &v[i + j] + &(a * b);
                }
            }
        }
        BiPoly::new(self.field, v)
    }

    pub fn pow(&self, e: u64) -> BiPoly {
        let mut result = BiPoly::one(self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn scale(&self, a: &Poly) -> BiPoly {
        BiPoly::new(self.field, self.c.iter().map(|p| p * a).collect())
    }

    pub fn scale_elem(&self, a: Elem) -> BiPoly {
        BiPoly::new(self.field, self.c.iter().map(|p| p.scale(a)).collect())
    }

    fn shift_x(&self, k: usize) -> BiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Poly::zero(self.field); k];
        v.extend(self.c.iter().cloned());
        BiPoly { field: self.field, c: v }
    }

    /// Exact division of every coefficient by a τ-polynomial.
    pub fn div_tau(&self, d: &Poly) -> BiPoly {
        BiPoly::new(self.field, self.c.iter().map(|p| p.div_exact(d)).collect())
    }

    /// τ ↦ τ^k.
    pub fn spread_tau(&self, k: u32) -> BiPoly {
        BiPoly::new(self.field, self.c.iter().map(|p| spread(p, k)).collect())
    }

    /// Monic gcd of the τ-coefficients.
    pub fn content(&self) -> Poly {
        let mut g = Poly::zero(self.field);
        for p in &self.c {
            g = g.gcd(p);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn primitive_part(&self) -> BiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = self.content();
        if c.is_one() {
            self.clone()
        } else {
            self.div_tau(&c)
        }
    }

    /// Lowest τ-order among the coefficients.
    pub fn tau_order(&self) -> Option<usize> {
        self.c.iter().filter_map(|p| p.low_order()).min()
    }

    /// Pseudo-remainder of self by d.
    fn prem(&self, d: &BiPoly) -> BiPoly {
        let dd = d.deg_x().expect("pseudo-division by zero");
        let ld = d.lead();
        let mut r = self.clone();
        while let Some(dr) = r.deg_x() {
            if dr < dd {
                break;
            }
            let lr = r.lead().clone();
            r = r.scale(ld).sub(&d.scale(&lr).shift_x(dr - dd));
        }
        r
    }

    /// Gcd over F_q[τ][X], normalized primitive times content gcd, leading τ-coefficient monic.
    pub fn gcd(&self, o: &BiPoly) -> BiPoly {
        if self.is_zero() {
            return o.normalized();
        }
        if o.is_zero() {
            return self.normalized();
        }
        let c = self.content().gcd(&o.content());
        let (mut a, mut b) = (self.primitive_part(), o.primitive_part());
        if a.deg_x() < b.deg_x() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.deg_x() == Some(0) {
                return BiPoly::constant(c);
            }
            let r = a.prem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.scale(&c).normalized()
    }

    /// Scale so the leading τ-coefficient of the leading X-coefficient is 1.
    pub fn normalized(&self) -> BiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let f = self.field;
        self.scale_elem(f.inv(self.lead().lead()))
    }

    /// Exact division over F_q[τ][X]; None if not divisible.
    pub fn div_exact(&self, d: &BiPoly) -> Option<BiPoly> {
        let dd = d.deg_x()?;
        let ld = d.lead();
        let mut r = self.clone();
        let mut q = vec![Poly::zero(self.field); self.c.len().saturating_sub(dd).max(1)];
        while let Some(dr) = r.deg_x() {
            if dr < dd {
                return None;
            }
            let (qc, rem) = r.lead().divrem(ld);
            if !rem.is_zero() {
                return None;
            }
            r = r.sub(&d.scale(&qc).shift_x(dr - dd));
            q[dr - dd] = qc;
        }
        Some(BiPoly::new(self.field, q))
    }

    /// Value at X = z.
    pub fn eval(&self, z: &Poly) -> Poly {
        let mut acc = Poly::zero(self.field);
        for c in self.c.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    /// self(z + τ^e·x) as a polynomial in x.
    pub fn compose_linear(&self, z: &Poly, e: usize) -> BiPoly {
        let f = self.field;
        let te = Poly::monomial(f, f.one(), e);
        let mut acc: Vec<Poly> = Vec::new();
        for c in self.c.iter().rev() {
            let mut next = vec![Poly::zero(f); acc.len() + 1];
            for (j, a) in acc.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                next[j] = &next[j] + &(a * z);
                next[j + 1] = &next[j + 1] + &(a * &te);
            }
            next[0] = &next[0] + c;
            acc = next;
        }
        BiPoly::new(f, acc)
    }

    /// (τ-order, reduction in F_q[x]) of self(z + τ^e·x).
    pub fn local_leading(&self, z: &Poly, e: usize) -> Option<(usize, Poly)> {
        let g = self.compose_linear(z, e);
        let k = g.tau_order()?;
        Some((k, Poly::new(self.field, g.c.iter().map(|p| p.coeff(k)).collect())))
    }

    /// Roots in F_q[τ] with multiplicities. Returns the found roots and the
    /// total multiplicity accounted for.
    pub fn tau_roots(&self) -> Vec<(Poly, usize)> {
        let f = self.field;
        let mut out = Vec::new();
        if self.deg_x().unwrap_or(0) == 0 {
            return out;
        }
        let budget = self.max_tau_degree() + 1;
        root_search(&self.primitive_part(), &Poly::zero(f), 0, budget, &mut out);
        out.sort();
        out
    }

    pub fn render(&self, n: u32) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = fmt_tau_poly(c, n);
            let mono = match i {
                0 => String::new(),
                1 => "X".into(),
                _ => format!("X^{i}"),
            };
            terms.push(if i == 0 {
                cs
            } else if c.is_one() {
                mono
            } else if cs.contains('+') {
                format!("({cs})*{mono}")
            } else {
                format!("{cs}*{mono}")
            });
        }
        terms.join("+")
    }
}

/// Depth-first τ-adic digit search for roots z = prefix + τ^depth·w of d(w).
fn root_search(d: &BiPoly, prefix: &Poly, depth: usize, budget: usize, out: &mut Vec<(Poly, usize)>) {
    let f = d.field;
    let mut d = d.clone();
    let mut mult = 0;
    while d.c.first().is_some_and(|c| c.is_zero()) {
        d.c.remove(0);
        mult += 1;
    }
    if mult > 0 {
        out.push((prefix.clone(), mult));
    }
    if d.deg_x().unwrap_or(0) == 0 || depth >= budget {
        return;
    }
    let k0 = d.tau_order().unwrap_or(0);
    let layer = Poly::new(f, d.c.iter().map(|p| p.coeff(k0)).collect());
    for c in layer.roots() {
        let next = d.compose_linear(&Poly::constant(f, c), 1);
        let k = next.tau_order().unwrap_or(0);
        let next = next.div_tau(&Poly::monomial(f, f.one(), k));
        let pre = prefix + &Poly::monomial(f, c, depth);
        root_search(&next, &pre, depth + 1, budget, out);
    }
}

/// A rational function in X over F_q(τ), τ^N = t, in lowest terms with the
/// leading τ-coefficient of the leading X-coefficient of the denominator equal to 1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BivRat {
    n: u32,
    num: BiPoly,
    den: BiPoly,
}

impl BivRat {
    pub fn new(n: u32, num: BiPoly, den: BiPoly) -> BivRat {
        assert!(!den.is_zero(), "zero denominator");
        let f = num.field;
        if num.is_zero() {
            return BivRat { n, num, den: BiPoly::one(f) };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.deg_x() == Some(0) && g.lead().is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let inv = f.inv(den.lead().lead());
        BivRat { n, num: num.scale_elem(inv), den: den.scale_elem(inv) }
    }

    pub fn field(&self) -> Field {
        self.num.field
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn num(&self) -> &BiPoly {
        &self.num
    }
    pub fn den(&self) -> &BiPoly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn zero(f: Field) -> BivRat {
        BivRat { n: 1, num: BiPoly::zero(f), den: BiPoly::one(f) }
    }

    pub fn from_bipoly(n: u32, p: BiPoly) -> BivRat {
        let f = p.field;
        BivRat::new(n, p, BiPoly::one(f))
    }

    /// t^r for rational r, with the smallest suitable N.
    pub fn t_pow(f: Field, r: Q) -> BivRat {
        let n = *r.denom() as u32;
        let k = r.numer() * n as i64 / r.denom();
        if k >= 0 {
            BivRat::from_bipoly(n, BiPoly::tau_pow(f, k as usize))
        } else {
            BivRat::new(n, BiPoly::one(f), BiPoly::tau_pow(f, (-k) as usize))
        }
    }

    pub fn x(f: Field) -> BivRat {
        BivRat::from_bipoly(1, BiPoly::var(f))
    }

    pub fn constant(f: Field, a: Elem) -> BivRat {
        BivRat::from_bipoly(1, BiPoly::constant(Poly::constant(f, a)))
    }

    pub fn from_tpoly(z: &TPoly) -> BivRat {
        BivRat::from_bipoly(z.n, BiPoly::constant(z.poly.clone()))
    }

    /// Same element written over τ' with τ'^{N·k} = t.
    pub fn promote(&self, k: u32) -> BivRat {
        if k == 1 {
            return self.clone();
        }
        BivRat { n: self.n * k, num: self.num.spread_tau(k), den: self.den.spread_tau(k) }
    }

    pub fn with_n(&self, n: u32) -> BivRat {
        assert!(n % self.n == 0, "cannot write over N = {n}");
        self.promote(n / self.n)
    }

    fn aligned(&self, o: &BivRat) -> (BivRat, BivRat) {
        let n = self.n.lcm(&o.n);
        (self.with_n(n), o.with_n(n))
    }

    pub fn add(&self, o: &BivRat) -> BivRat {
        let (a, b) = self.aligned(o);
        if a.den == b.den {
            return BivRat::new(a.n, a.num.add(&b.num), a.den);
        }
        let g = a.den.gcd(&b.den);
        let (ad, bd) = (a.den.div_exact(&g).expect("gcd"), b.den.div_exact(&g).expect("gcd"));
        BivRat::new(a.n, a.num.mul(&bd).add(&b.num.mul(&ad)), a.den.mul(&bd))
    }

    pub fn neg(&self) -> BivRat {
        BivRat { n: self.n, num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &BivRat) -> BivRat {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BivRat) -> BivRat {
        let (a, b) = self.aligned(o);
        BivRat::new(a.n, a.num.mul(&b.num), a.den.mul(&b.den))
    }

    pub fn inv(&self) -> BivRat {
        assert!(!self.is_zero(), "inverse of zero");
        BivRat::new(self.n, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &BivRat) -> BivRat {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: i64) -> BivRat {
        let b = if e < 0 { self.inv() } else { self.clone() };
        let k = e.unsigned_abs();
        BivRat::new(b.n, b.num.pow(k), b.den.pow(k))
    }

    pub fn scale(&self, a: Elem) -> BivRat {
        BivRat::new(self.n, self.num.scale_elem(a), self.den.clone())
    }

    /// ℘(self) = self^p − self.
    pub fn wp(&self) -> BivRat {
        self.pow(self.field().p() as i64).sub(self)
    }

    /// Substitute a rational function of one variable: g(self).
    pub fn compose_into(g: &RatFunc, arg: &BivRat) -> BivRat {
        let f = g.field();
        let horner = |p: &Poly| {
            let mut acc = BivRat::zero(f);
            for &c in p.coeffs().iter().rev() {
                acc = acc.mul(arg).add(&BivRat::constant(f, c));
            }
            acc
        };
        horner(g.num()).div(&horner(g.den()))
    }

    /// τ^k · g((X − z)/τ^e) built without intermediate gcds.
    pub fn local_lift(g: &RatFunc, n: u32, k: i64, z: &Poly, e: usize) -> BivRat {
        let f = g.field();
        let lin = BiPoly::new(f, vec![-z, Poly::one(f)]);
        let homog = |p: &Poly, d: usize| {
            let mut acc = BiPoly::zero(f);
            let mut pw = BiPoly::one(f);
            for (j, &c) in p.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    let term = pw.scale(&Poly::monomial(f, c, e * (d - j)));
                    acc = acc.add(&term);
                }
                pw = pw.mul(&lin);
            }
            acc
        };
        let dn = g.num().deg().unwrap_or(0);
        let dd = g.den().deg().unwrap_or(0);
        let shift = k + (e as i64) * (dd as i64 - dn as i64);
        let mut num = homog(g.num(), dn);
        let mut den = homog(g.den(), dd);
        if shift >= 0 {
            num = num.scale(&Poly::monomial(f, f.one(), shift as usize));
        } else {
            den = den.scale(&Poly::monomial(f, f.one(), (-shift) as usize));
        }
        BivRat::new(n, num, den)
    }

    /// Substitute t = 0 when both numerator and denominator stay nonzero.
    pub fn at_t_zero(&self) -> Option<RatFunc> {
        let f = self.field();
        let cut = |b: &BiPoly| Poly::new(f, b.c.iter().map(|p| p.coeff(0)).collect());
        let (n, d) = (cut(&self.num), cut(&self.den));
        (!d.is_zero()).then(|| RatFunc::new(n, d))
    }

    pub fn parse(src: &str, field: Field) -> Result<BivRat, AlgebraError> {
        let e = parse_expr(src)?;
        let n = t_denominator(&e);
        eval_bivrat(&e, field, n)
    }
}

impl fmt::Display for BivRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.num.render(self.n);
        let den = self.den.render(self.n);
        if self.den.deg_x() == Some(0) && self.den.lead().is_one() {
            return write!(f, "{num}");
        }
        let wrap = |s: String| if s.contains('+') || s.contains('*') { format!("({s})") } else { s };
        write!(f, "{}/{}", wrap(num), wrap(den))
    }
}

fn t_denominator(e: &Expr) -> u32 {
    match e {
        Expr::Pow(b, r) => {
            let inner = t_denominator(b);
            if matches!(**b, Expr::Var(ref s) if s == "t") {
                (*r.denom() as u32).lcm(&inner)
            } else {
                inner
            }
        }
        Expr::Neg(a) => t_denominator(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            t_denominator(a).lcm(&t_denominator(b))
        }
        _ => 1,
    }
}

fn eval_bivrat(e: &Expr, field: Field, n: u32) -> Result<BivRat, AlgebraError> {
    let rec = |e: &Expr| eval_bivrat(e, field, n);
    Ok(match e {
        Expr::Int(v) => BivRat::constant(field, field.int(*v)).with_n(n),
        Expr::Var(s) if s == "X" => BivRat::x(field).with_n(n),
        Expr::Var(s) if s == "t" => BivRat::t_pow(field, Q::from_integer(1)).with_n(n),
        Expr::Var(s) => match generator_elem(field, s) {
            Some(g) => BivRat::constant(field, g).with_n(n),
            None => return Err(AlgebraError::UnknownVariable(s.clone())),
        },
        Expr::Neg(a) => rec(a)?.neg(),
        Expr::Add(a, b) => rec(a)?.add(&rec(b)?),
        Expr::Sub(a, b) => rec(a)?.sub(&rec(b)?),
        Expr::Mul(a, b) => rec(a)?.mul(&rec(b)?),
        Expr::Div(a, b) => {
            let d = rec(b)?;
            if d.is_zero() {
                return Err(AlgebraError::DivisionByZero);
            }
            rec(a)?.div(&d)
        }
        Expr::Pow(b, r) => {
            if matches!(**b, Expr::Var(ref s) if s == "t") {
                return Ok(BivRat::t_pow(field, *r).with_n(n));
            }
            if !r.is_integer() {
                return Err(AlgebraError::FractionalExponent(r.to_string()));
            }
            let base = rec(b)?;
            if base.is_zero() && r.is_negative() {
                return Err(AlgebraError::DivisionByZero);
            }
            base.pow(r.to_integer())
        }
    })
}

/// Parse a polynomial in t with possibly fractional exponents.
pub fn parse_tpoly(src: &str, field: Field) -> Result<TPoly, ValuationError> {
    let b = BivRat::parse(src, field)?;
    let ok = b.den.deg_x() == Some(0) && b.den.lead().is_one() && b.num.deg_x().unwrap_or(0) == 0;
    if !ok {
        return Err(ValuationError::NotTPolynomial(src.to_string()));
    }
    let p = b.num.c.first().cloned().unwrap_or_else(|| Poly::zero(field));
    Ok(TPoly::new(b.n, p))
}

/// The closed disc ν(X − z) ≥ s.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Place {
    pub z: TPoly,
    pub s: Q,
}

impl Place {
    pub fn new(z: TPoly, s: Q) -> Result<Place, ValuationError> {
        if s.is_negative() {
            return Err(ValuationError::NegativeRadius(s));
        }
        if z.valuation().is_some_and(|v| v <= Q::zero()) {
            return Err(ValuationError::CentreOutsideDisc(z.to_string()));
        }
        Ok(Place { z, s })
    }

    pub fn origin(f: Field, s: Q) -> Place {
        Place { z: TPoly::zero(f), s }
    }

    /// Parse `s=<rational>,z=<expr in t>`; z defaults to 0.
    pub fn parse(src: &str, field: Field) -> Result<Place, ValuationError> {
        let bad = || ValuationError::BadPlace(src.to_string());
        let mut s = None;
        let mut z = TPoly::zero(field);
        for part in src.split([',', ';']) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "s" => s = Some(v.trim().parse::<Q>().map_err(|_| bad())?),
                "z" => z = parse_tpoly(v, field)?,
                _ => return Err(bad()),
            }
        }
        Place::new(z, s.ok_or_else(bad)?)
    }

    /// Smallest N over which this place is defined.
    pub fn n(&self) -> u32 {
        (*self.s.denom() as u32).lcm(&self.z.n)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={},z={}", self.s, self.z)
    }
}

/// Local data of F at a place, all over a common τ with τ^n = t.
pub(crate) struct Local {
    pub n: u32,
    /// ν in τ-units.
    pub nu: i64,
    pub reduction: RatFunc,
    /// τ-exponent e with X = z + τ^e·x.
    pub e: usize,
    pub z: Poly,
}

pub(crate) fn local(f: &BivRat, pl: &Place) -> Result<Local, ValuationError> {
    if f.is_zero() {
        return Err(ValuationError::Zero);
    }
    let n = f.n.lcm(&pl.n());
    let g = f.with_n(n);
    let z = pl.z.at(n);
    let e = (pl.s * Q::from_integer(n as i64)).to_integer() as usize;
    let (kn, rn) = g.num.local_leading(&z, e).expect("nonzero numerator");
    let (kd, rd) = g.den.local_leading(&z, e).expect("nonzero denominator");
    Ok(Local { n, nu: kn as i64 - kd as i64, reduction: RatFunc::new(rn, rd), e, z })
}

/// ν_{s,z}(F).
pub fn gauss_valuation(f: &BivRat, pl: &Place) -> Result<Q, ValuationError> {
    let l = local(f, pl)?;
    Ok(Q::new(l.nu, l.n as i64))
}

/// ([F]_{s,z}, ν_{s,z}(F)).
pub fn reduction_at(f: &BivRat, pl: &Place) -> Result<(RatFunc, Q), ValuationError> {
    let l = local(f, pl)?;
    Ok((l.reduction, Q::new(l.nu, l.n as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn valuation_of_linear_and_constants() {
        let f = Field::prime(5).unwrap();
        let z = parse_tpoly("t^3+2*t^4", f).unwrap();
        let pl = Place::new(z.clone(), q(7, 2)).unwrap();
        let xz = BivRat::x(f).sub(&BivRat::from_tpoly(&z));
        assert_eq!(gauss_valuation(&xz, &pl).unwrap(), q(7, 2));
        let c = BivRat::parse("t^(5/3)", f).unwrap();
        assert_eq!(gauss_valuation(&c, &pl).unwrap(), q(5, 3));
    }

    #[test]
    fn golden_cover_at_s10() {
        let f = Field::prime(5).unwrap();
        let g = BivRat::parse("(-2*X+t^10)/((-2)*X^5*(X-t^10)^2*(X-t^5)^5)", f).unwrap();
        let pl = Place::origin(f, q(10, 1));
        let (r, nu) = reduction_at(&g, &pl).unwrap();
        assert_eq!(nu, q(-85, 1));
        let expect = crate::algebra::parse_ratfunc("(-2*x+1)/((-2)*x^5*(x-1)^2*(-1)^5)", f).unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn p2_reduction() {
        let f = Field::prime(2).unwrap();
        let g = BivRat::parse("1/(X*(X-t^2))", f).unwrap();
        let (r, nu) = reduction_at(&g, &Place::origin(f, q(2, 1))).unwrap();
        assert_eq!(nu, q(-4, 1));
        assert_eq!(r.to_string(), "1/(x*(x-1))");
    }

    #[test]
    fn tau_roots_with_multiplicity() {
        let f = Field::prime(5).unwrap();
        let g = BivRat::parse("1/(X^5*(X-t^10)^2*(X-t^5-t^10)^3)", f).unwrap();
        let roots = g.den().tau_roots();
        let total: usize = roots.iter().map(|r| r.1).sum();
        assert_eq!(total, 10);
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn tpoly_denominators_reduce() {
        let f = Field::prime(3).unwrap();
        let z = parse_tpoly("t^(2/4)+t", f).unwrap();
        assert_eq!(z.n(), 2);
        assert_eq!(z.to_string(), "t^(1/2)+t");
    }
}

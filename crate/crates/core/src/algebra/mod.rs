//! Finite fields, polynomials and rational functions over F_q, with the
//! Artin-Schreier normal form and exactness tests for differentials.

pub mod field;
pub mod parse;
pub mod poly;
pub mod ratfunc;

use serde::Serialize;
use thiserror::Error;

pub use field::{is_prime, Elem, Field, FieldError};
pub use parse::{parse_expr, parse_poly, parse_ratfunc, Expr};
pub use poly::Poly;
pub use ratfunc::{Place, Point, RatFunc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("fractional exponent {0} is not allowed here")]
    FractionalExponent(String),
    #[error("`{0}` is not a polynomial")]
    NotPolynomial(String),
    #[error("pole of order {order} at {place} is divisible by p; reduce the function first")]
    NotReduced { place: String, order: usize },
    #[error("the function is trivial modulo Artin-Schreier equivalence")]
    Trivial,
    #[error("a cover needs at least one branch point")]
    EmptyDatum,
    #[error("conductor {0} is not allowed (conductors are at least 2 and not 1 mod p)")]
    BadConductor(u64),
}

/// f* with f = f* − ℘(w) + c, where ℘(w) = w^p − w and c is a constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub reduced: RatFunc,
    pub witness: RatFunc,
    pub dropped_constant: Elem,
    pub trivial: bool,
}

/// ℘(w) = w^p − w.
pub fn wp(w: &RatFunc) -> RatFunc {
    let p = w.field().p() as i64;
    &w.pow(p) - w
}

/// b with b^p ≡ g mod π in the residue field F_q[x]/π.
fn residue_pth_root(g: &Poly, pi: &Poly) -> Poly {
    let f = g.field();
    let steps = f.m() as usize * pi.deg().unwrap_or(1) - 1;
    let mut b = g.rem(pi);
    for _ in 0..steps {
        b = b.pow_mod(f.p() as u64, pi);
    }
    b
}

/// Artin-Schreier normal form: no pole order in f* is divisible by p.
pub fn as_reduce(f: &RatFunc) -> Reduction {
    let fld = f.field();
    let p = fld.p() as usize;
    let places: Vec<Poly> = f.finite_poles().into_iter().map(|(pi, _)| pi).collect();
    let mut cur = f.clone();
    let mut witness = RatFunc::zero(fld);
    loop {
        let mut peeled = Vec::new();
        for pi in &places {
            let pp = cur.principal_part(pi);
            if let Some(j) = (1..=pp.len()).rev().find(|&j| j % p == 0 && !pp[j - 1].is_zero()) {
                let b = residue_pth_root(&pp[j - 1], pi);
                peeled.push(RatFunc::new(b, pi.pow((j / p) as u64)));
            }
        }
        let poly = cur.poly_part();
        if let Some(j) = (1..=poly.degree().max(0) as usize).rev().find(|&j| j % p == 0 && !poly.coeff(j).is_zero()) {
            peeled.push(RatFunc::monomial(fld, fld.pth_root(poly.coeff(j)), (j / p) as i64));
        }
        if peeled.is_empty() {
            break;
        }
        for a in peeled {
            cur = &cur - &wp(&a);
            witness = &witness - &a;
        }
    }
    let dropped_constant = cur.poly_part().coeff(0);
    if !dropped_constant.is_zero() {
        cur = &cur - &RatFunc::constant(fld, dropped_constant);
    }
    Reduction { trivial: cur.is_zero(), reduced: cur, witness, dropped_constant }
}

/// A branch point of a cover: a closed point of P^1 with its conductor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchPoint {
    pub location: String,
    pub degree: usize,
    pub conductor: u64,
}

/// Branch points with conductors h = (pole order) + 1 of a reduced function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchingDatum {
    pub p: u32,
    pub points: Vec<BranchPoint>,
}

impl BranchingDatum {
    /// Conductors of the geometric branch points, each counted once per conjugate.
    pub fn conductors(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for b in &self.points {
            out.extend(std::iter::repeat_n(b.conductor, b.degree));
        }
        out
    }
}

fn place_name(pi: &Poly) -> String {
    let f = pi.field();
    if pi.deg() == Some(1) {
        f.fmt_elem(f.neg(pi.coeff(0)))
    } else {
        format!("root of {}", pi.to_string_var("x"))
    }
}

/// Branching datum of a reduced function.
pub fn branching_datum(f: &RatFunc) -> Result<BranchingDatum, AlgebraError> {
    let fld = f.field();
    let p = fld.p() as usize;
    if f.is_zero() {
        return Err(AlgebraError::Trivial);
    }
    let mut points = Vec::new();
    let mut poles = f.finite_poles();
    poles.sort_by(|a, b| (a.0.deg(), &a.0).cmp(&(b.0.deg(), &b.0)));
    for (pi, e) in poles {
        if e % p == 0 {
            return Err(AlgebraError::NotReduced { place: place_name(&pi), order: e });
        }
        points.push(BranchPoint { location: place_name(&pi), degree: pi.deg().unwrap_or(1), conductor: e as u64 + 1 });
    }
    let e = f.pole_order_at_infinity();
    if e > 0 {
        if e % p == 0 {
            return Err(AlgebraError::NotReduced { place: "infinity".into(), order: e });
        }
        points.push(BranchPoint { location: "infinity".into(), degree: 1, conductor: e as u64 + 1 });
    }
    if points.is_empty() {
        return Err(AlgebraError::Trivial);
    }
    Ok(BranchingDatum { p: fld.p(), points })
}

/// Genus from conductors: g = (Σ h − 2)(p − 1)/2.
pub fn genus_of_conductors(conductors: &[u64], p: u32) -> Result<u64, AlgebraError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p).into());
    }
    if conductors.is_empty() {
        return Err(AlgebraError::EmptyDatum);
    }
    for &h in conductors {
        if h < 2 || h % p as u64 == 1 {
            return Err(AlgebraError::BadConductor(h));
        }
    }
    let s: u64 = conductors.iter().sum();
    Ok((s - 2) * (p as u64 - 1) / 2)
}

pub fn genus(datum: &BranchingDatum) -> Result<u64, AlgebraError> {
    genus_of_conductors(&datum.conductors(), datum.p)
}

/// Exactness of f·dx, with an antiderivative when exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exactness {
    pub exact: bool,
    pub antiderivative: Option<RatFunc>,
}

/// f·dx = dH iff the coefficients of x^j, j ≡ −1 mod p, in N·D^{p−1} vanish (f = N/D).
pub fn is_exact(f: &RatFunc) -> Exactness {
    let fld = f.field();
    let p = fld.p() as usize;
    let d = f.den();
    let m = f.num() * &d.pow(p as u64 - 1);
    let mut h = vec![fld.zero(); m.coeffs().len() + 1];
    for (j, &c) in m.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if (j + 1) % p == 0 {
            return Exactness { exact: false, antiderivative: None };
        }
        h[j + 1] = fld.div(c, fld.int((j + 1) as i64));
    }
    let anti = RatFunc::new(Poly::new(fld, h), d.pow(p as u64));
    Exactness { exact: true, antiderivative: Some(anti) }
}

/// Residue of f·dx at a point of P^1.
pub fn residue_at(f: &RatFunc, pt: Point) -> Elem {
    let fld = f.field();
    match pt {
        Point::Finite(a) => {
            let e = f.den().root_multiplicity(a);
            if e == 0 {
                return fld.zero();
            }
            let (_, c) = f.laurent_at(a, e);
            c[e - 1]
        }
        Point::Infinity => fld.neg(residue_sum_proper(f.num(), f.den())),
    }
}

/// Coefficient of 1/x in the expansion at ∞ of the proper part of num/den.
fn residue_sum_proper(num: &Poly, den: &Poly) -> Elem {
    let fld = num.field();
    let r = num.rem(den);
    if r.degree() == den.degree() - 1 && !r.is_zero() {
        fld.div(r.lead(), den.lead())
    } else {
        fld.zero()
    }
}

/// Sum of the residues of f·dx over the conjugate roots of the irreducible π.
pub fn residue_at_place(f: &RatFunc, pi: &Poly) -> Elem {
    let (u, e) = f.principal_numerator(pi);
    if e == 0 {
        return f.field().zero();
    }
    residue_sum_proper(&u, &pi.pow(e as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> Field {
        Field::prime(5).unwrap()
    }

    #[test]
    fn reduction_identity_holds() {
        let f = f5();
        let g = parse_ratfunc("1/x^10 + 3/(x-1)^5 + x^5 + 2x + 4", f).unwrap();
        let r = as_reduce(&g);
        let back = &(&r.reduced - &wp(&r.witness)) + &RatFunc::constant(f, r.dropped_constant);
        assert_eq!(back, g);
        let d = branching_datum(&r.reduced).unwrap();
        assert!(d.conductors().iter().all(|h| h % 5 != 1));
    }

    #[test]
    fn pth_powers_are_trivial() {
        let f = f5();
        let w = parse_ratfunc("1/(x^2+2)", f).unwrap();
        assert!(as_reduce(&wp(&w)).trivial);
    }

    #[test]
    fn exactness_of_standard_forms() {
        let f = f5();
        let w = parse_ratfunc("1/(x^4*(x-1)^3)", f).unwrap();
        let e = is_exact(&w);
        assert!(e.exact);
        assert_eq!(e.antiderivative.unwrap().derivative(), w);
        assert!(!is_exact(&parse_ratfunc("1/x", f).unwrap()).exact);
        assert!(!is_exact(&parse_ratfunc("x^4", f).unwrap()).exact);
    }

    #[test]
    fn residues_sum_to_zero() {
        let f = f5();
        let w = parse_ratfunc("(x^3+2)/(x^2*(x-1)*(x^2+2))", f).unwrap();
        let mut total = fld_sum(f, &[residue_at(&w, Point::Finite(f.int(0))), residue_at(&w, Point::Finite(f.int(1)))]);
        total = f.add(total, residue_at_place(&w, &parse_poly("x^2+2", f).unwrap()));
        total = f.add(total, residue_at(&w, Point::Infinity));
        assert!(total.is_zero());
    }

    fn fld_sum(f: Field, xs: &[Elem]) -> Elem {
        xs.iter().fold(f.zero(), |a, &b| f.add(a, b))
    }

    #[test]
    fn genus_formula() {
        assert_eq!(genus_of_conductors(&[2, 3], 5).unwrap(), 6);
        assert!(genus_of_conductors(&[6], 5).is_err());
    }
}

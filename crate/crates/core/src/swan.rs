//! Degeneration of a Z/p-cover Y^p − Y = F(X, t) of the closed unit disc:
//! reduced representatives, depth and differential Swan conductors, boundary
//! Swan conductors, depth profiles and the good-reduction test.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{as_reduce, AlgebraError, Field, Point, RatFunc};
use crate::valuation::{local, BivRat, Place, TPoly, ValuationError};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwanError {
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("reduction loop did not terminate within {0} steps")]
    IterationCap(usize),
    #[error("malformed cover `{0}`; expected `p=<prime>; F=<expr in X and t>`")]
    BadCover(String),
    #[error("F has a pole at X = ∞; the branch locus must lie in the open unit disc")]
    PoleAtInfinity,
    #[error("branch point {0} is not in the open unit disc")]
    BranchPointOutsideDisc(String),
    #[error("the branch locus is not defined over F_q[t^(1/{0})]; found {1} of {2} poles")]
    IrrationalBranchLocus(u32, usize, usize),
    #[error("the depth profile did not settle; giving up near s = {0}")]
    ProfileUnresolved(Q),
}

/// A branch point of the generic fibre with its conductor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchPoint {
    pub z: TPoly,
    pub conductor: u64,
}

/// Y^p − Y = F over the closed unit disc.
#[derive(Clone, Debug)]
pub struct Cover {
    f: BivRat,
    branch: Vec<BranchPoint>,
}

/// F* = F + ℘(witness) − dropped, reduced at the place.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub f_star: BivRat,
    pub witness: BivRat,
    /// Terms constant in X; they become ℘-trivial after a finite extension of R.
    pub dropped: BivRat,
    pub valuation: Q,
    pub reduction: RatFunc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegenerationType {
    /// δ > 0 and the differential conductor ω = omega·dx, scaled so its numerator is monic.
    Radical { delta: Q, omega: RatFunc },
    /// δ = 0, with the reduced class of the reduction and its jump at x = 0.
    Etale { reduction: RatFunc, jump: u64 },
}

impl DegenerationType {
    pub fn depth(&self) -> Q {
        match self {
            DegenerationType::Radical { delta, .. } => *delta,
            DegenerationType::Etale { .. } => Q::zero(),
        }
    }

    pub fn omega(&self) -> Option<&RatFunc> {
        match self {
            DegenerationType::Radical { omega, .. } => Some(omega),
            DegenerationType::Etale { .. } => None,
        }
    }

    /// Boundary Swan conductor in direction `dir` of the residue line.
    pub fn boundary_swan(&self, dir: Point) -> i64 {
        match self {
            DegenerationType::Radical { omega, .. } => -omega.form_ord_at(dir) - 1,
            DegenerationType::Etale { reduction, .. } => {
                if reduction.is_zero() {
                    return 0;
                }
                match dir {
                    Point::Infinity => reduction.pole_order_at_infinity() as i64,
                    Point::Finite(_) => (-reduction.ord_at(dir)).max(0),
                }
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            DegenerationType::Radical { delta, omega } => serde_json::json!({
                "kind": "radical", "delta": delta.to_string(), "omega": omega.to_string()
            }),
            DegenerationType::Etale { reduction, jump } => serde_json::json!({
                "kind": "etale", "reduction": reduction.to_string(), "jump": jump
            }),
        }
    }
}

impl fmt::Display for DegenerationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegenerationType::Radical { delta, omega } => write!(f, "radical: delta = {delta}, omega = ({omega}) dx"),
            DegenerationType::Etale { reduction, jump } => write!(f, "etale: reduction y^p - y = {reduction}, jump {jump}"),
        }
    }
}

/// Subtract ℘ of lifted p-th roots of the leading part until F* is reduced at `pl`.
pub fn make_reduced_at(f: &BivRat, pl: &Place) -> Result<Reduced, SwanError> {
    let fld = f.field();
    let p = fld.p() as i64;
    let mut cur = f.with_n(f.n().lcm(&pl.n()));
    let mut witness = BivRat::zero(fld);
    let mut dropped = BivRat::zero(fld);
    let first = local(&cur, pl)?;
    let cap = (p as usize) * (first.n as usize * first.nu.unsigned_abs() as usize + 16);
    let mut steps = 0;
    loop {
        let l = local(&cur, pl)?;
        if l.nu >= 0 || !l.reduction.is_pth_power() {
            return Ok(Reduced {
                f_star: cur,
                witness,
                dropped,
                valuation: Q::new(l.nu, l.n as i64),
                reduction: l.reduction,
            });
        }
        steps += 1;
        if steps > cap {
            return Err(SwanError::IterationCap(cap));
        }
        if l.reduction.is_constant() {
            let c = BivRat::local_lift(&l.reduction, l.n, l.nu, &l.z, l.e);
            cur = cur.sub(&c);
            dropped = dropped.add(&c);
            continue;
        }
        if l.nu % p != 0 {
            cur = cur.promote(fld.p());
            continue;
        }
        let g = l.reduction.pth_root().expect("checked p-th power");
        let a = BivRat::local_lift(&g, l.n, l.nu / p, &l.z, l.e);
        cur = cur.sub(&a.wp());
        witness = witness.sub(&a);
    }
}

fn jump_at_zero(r: &RatFunc) -> u64 {
    if r.is_zero() {
        return 0;
    }
    (-r.ord_at(Point::Finite(r.field().zero()))).max(0) as u64
}

/// Degeneration type of F restricted to the disc `pl`.
pub fn degeneration_type_of(f: &BivRat, pl: &Place) -> Result<DegenerationType, SwanError> {
    let r = make_reduced_at(f, pl)?;
    let fld = f.field();
    if r.valuation.is_negative() {
        let delta = -r.valuation / Q::from_integer(fld.p() as i64);
        let omega = r.reduction.derivative().monic_numerator();
        return Ok(DegenerationType::Radical { delta, omega });
    }
    let base = if r.valuation.is_zero() { r.reduction } else { RatFunc::zero(fld) };
    let reduction = as_reduce(&base).reduced;
    let jump = jump_at_zero(&reduction);
    Ok(DegenerationType::Etale { reduction, jump })
}

impl Cover {
    /// Build a cover and compute its branch locus with generic conductors.
    pub fn new(f: BivRat) -> Result<Cover, SwanError> {
        let num_deg = f.num().deg_x().unwrap_or(0);
        let den_deg = f.den().deg_x().unwrap_or(0);
        if num_deg > den_deg {
            return Err(SwanError::PoleAtInfinity);
        }
        let roots = f.den().tau_roots();
        let found: usize = roots.iter().map(|r| r.1).sum();
        if found != den_deg {
            return Err(SwanError::IrrationalBranchLocus(f.n(), found, den_deg));
        }
        let points: Vec<TPoly> = roots.into_iter().map(|(z, _)| TPoly::new(f.n(), z)).collect();
        for z in &points {
            if z.valuation().is_some_and(|v| v <= Q::zero()) {
                return Err(SwanError::BranchPointOutsideDisc(z.to_string()));
            }
        }
        let mut branch = Vec::new();
        for (i, z) in points.iter().enumerate() {
            let sep = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .filter_map(|(_, w)| z.sub(w).valuation())
                .max()
                .unwrap_or(Q::zero());
            let h = generic_conductor(&f, z, sep)?;
            if h > 1 {
                branch.push(BranchPoint { z: z.clone(), conductor: h });
            }
        }
        branch.sort_by(|a, b| a.z.sort_key().cmp(&b.z.sort_key()));
        Ok(Cover { f, branch })
    }

    /// Parse `p=<prime>; F=<expr>` with an optional `m=<degree>`.
    pub fn parse(src: &str) -> Result<Cover, SwanError> {
        let bad = || SwanError::BadCover(src.to_string());
        let (mut p, mut m, mut expr) = (None, 1u32, None);
        for part in src.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "p" => p = Some(v.trim().parse::<u32>().map_err(|_| bad())?),
                "m" => m = v.trim().parse::<u32>().map_err(|_| bad())?,
                "F" => expr = Some(v.trim().to_string()),
                _ => return Err(bad()),
            }
        }
        let field = Field::new(p.ok_or_else(bad)?, m).map_err(AlgebraError::from)?;
        let f = BivRat::parse(&expr.ok_or_else(bad)?, field)?;
        Cover::new(f)
    }

    pub fn field(&self) -> Field {
        self.f.field()
    }

    pub fn p(&self) -> u32 {
        self.f.field().p()
    }

    pub fn rhs(&self) -> &BivRat {
        &self.f
    }

    pub fn branch_locus(&self) -> &[BranchPoint] {
        &self.branch
    }

    pub fn conductor_sum(&self) -> u64 {
        self.branch.iter().map(|b| b.conductor).sum()
    }

    pub fn make_reduced_at(&self, pl: &Place) -> Result<Reduced, SwanError> {
        make_reduced_at(&self.f, pl)
    }

    pub fn degeneration_type(&self, pl: &Place) -> Result<DegenerationType, SwanError> {
        degeneration_type_of(&self.f, pl)
    }

    pub fn boundary_swan(&self, pl: &Place, dir: Point) -> Result<i64, SwanError> {
        Ok(self.degeneration_type(pl)?.boundary_swan(dir))
    }

    pub fn depth_profile(&self, z: &TPoly, s_max: Q) -> Result<Profile, SwanError> {
        depth_profile(self, z, s_max)
    }

    pub fn good_reduction(&self) -> Result<GoodnessReport, SwanError> {
        good_reduction(self)
    }
}

/// h = sw(0) + 1 on a disc around z containing no other branch point.
fn generic_conductor(f: &BivRat, z: &TPoly, sep: Q) -> Result<u64, SwanError> {
    let mut s = sep.floor() + Q::one();
    let mut prev = None;
    for _ in 0..6 {
        let pl = Place { z: z.clone(), s };
        let h = (degeneration_type_of(f, &pl)?.boundary_swan(Point::Finite(f.field().zero())) + 1).max(1) as u64;
        if prev == Some(h) {
            return Ok(h);
        }
        prev = Some(h);
        s *= Q::from_integer(2);
    }
    Ok(prev.unwrap_or(1))
}

/// Depth and generic-direction data at a single radius.
#[derive(Clone, Debug)]
struct Sample {
    delta: Q,
    left: Q,
    right: Q,
    kind: DegenerationType,
}

fn sample(c: &Cover, z: &TPoly, s: Q) -> Result<Sample, SwanError> {
    let kind = c.degeneration_type(&Place { z: z.clone(), s })?;
    let p = Q::from_integer(c.p() as i64);
    let fld = c.field();
    let right = Q::from_integer(kind.boundary_swan(Point::Finite(fld.zero()))) / p;
    let left = -Q::from_integer(kind.boundary_swan(Point::Infinity)) / p;
    Ok(Sample { delta: kind.depth(), left, right, kind })
}

/// Rational with the smallest denominator strictly between a and b.
pub fn simplest_between(a: Q, b: Q) -> Q {
    assert!(a < b);
    let mut d = 1i64;
    loop {
        let n = (a * Q::from_integer(d)).floor().to_integer() + 1;
        let c = Q::new(n, d);
        if c < b {
            return c;
        }
        d += 1;
    }
}

/// δ(s) = slope·s + intercept on [from, to].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub from: Q,
    pub to: Q,
    pub slope: Q,
    pub intercept: Q,
    pub omega: Option<RatFunc>,
}

impl Segment {
    pub fn delta_at(&self, s: Q) -> Q {
        self.slope * s + self.intercept
    }

    /// Affine formula in s with a common denominator, e.g. "(3*s-2)/2".
    pub fn delta_formula(&self) -> String {
        affine_formula(self.slope, self.intercept)
    }
}

pub fn affine_formula(slope: Q, intercept: Q) -> String {
    let d = slope.denom().lcm(intercept.denom());
    let a = (slope * Q::from_integer(d)).to_integer();
    let b = (intercept * Q::from_integer(d)).to_integer();
    let mut terms = String::new();
    match a {
        0 => {}
        1 => terms.push('s'),
        -1 => terms.push_str("-s"),
        _ => terms.push_str(&format!("{a}*s")),
    }
    let single = a == 0 || b == 0;
    if b != 0 || a == 0 {
        if a != 0 && b > 0 {
            terms.push('+');
        }
        terms.push_str(&b.to_string());
    }
    match (d, single) {
        (1, _) => terms,
        (_, true) => format!("{terms}/{d}"),
        (_, false) => format!("({terms})/{d}"),
    }
}

/// Piecewise-linear depth function with the conductor along each piece and at each kink.
#[derive(Clone, Debug)]
pub struct Profile {
    pub segments: Vec<Segment>,
    pub kinks: Vec<(Q, Option<RatFunc>)>,
}

impl Profile {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.segments
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "from": s.from.to_string(),
                        "to": s.to.to_string(),
                        "delta": s.delta_formula(),
                        "omega": s.omega.as_ref().map(|w| w.to_string()),
                    })
                })
                .collect(),
        )
    }
}

struct ProfileBuilder<'a> {
    cover: &'a Cover,
    z: &'a TPoly,
    pieces: Vec<(Q, Q, Q, Q)>,
}

impl ProfileBuilder<'_> {
    fn at(&self, s: Q) -> Result<Sample, SwanError> {
        sample(self.cover, self.z, s)
    }

    fn solve(&mut self, a: Q, b: Q, depth: usize) -> Result<(), SwanError> {
        let sa = self.at(a)?;
        let sb = self.at(b)?;
        let line_a = |s: Q| sa.delta + sa.right * (s - a);
        if line_a(b) == sb.delta && sa.right == sb.left {
            self.pieces.push((a, b, sa.right, sa.delta - sa.right * a));
            return Ok(());
        }
        if depth > 48 {
            return Err(SwanError::ProfileUnresolved(a));
        }
        if sa.right != sb.left {
            let k = (sb.delta - sb.left * b - sa.delta + sa.right * a) / (sa.right - sb.left);
            if a < k && k < b {
                let sk = self.at(k)?;
                if sk.delta == line_a(k) && sk.left == sa.right && sk.right == sb.left {
                    self.pieces.push((a, k, sa.right, sa.delta - sa.right * a));
                    self.pieces.push((k, b, sb.left, sb.delta - sb.left * b));
                    return Ok(());
                }
            }
        }
        let m = simplest_between(a, b);
        self.solve(a, m, depth + 1)?;
        self.solve(m, b, depth + 1)
    }
}

/// Exact piecewise description of s ↦ δ on the discs around z with radius parameter in [0, s_max].
pub fn depth_profile(c: &Cover, z: &TPoly, s_max: Q) -> Result<Profile, SwanError> {
    if s_max.is_negative() {
        return Err(ValuationError::NegativeRadius(s_max).into());
    }
    let mut cuts = vec![Q::zero(), s_max];
    for b in c.branch_locus() {
        if let Some(v) = b.z.sub(z).valuation() {
            if v > Q::zero() && v < s_max {
                cuts.push(v);
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut builder = ProfileBuilder { cover: c, z, pieces: Vec::new() };
    if s_max.is_zero() {
        let s0 = builder.at(Q::zero())?;
        builder.pieces.push((Q::zero(), Q::zero(), Q::zero(), s0.delta));
    }
    for w in cuts.windows(2) {
        builder.solve(w[0], w[1], 0)?;
    }
    let mut merged: Vec<(Q, Q, Q, Q)> = Vec::new();
    for piece in builder.pieces {
        match merged.last_mut() {
            Some(last) if last.2 == piece.2 && last.3 == piece.3 => last.1 = piece.1,
            _ => merged.push(piece),
        }
    }
    let mut segments = Vec::new();
    for (from, to, slope, intercept) in merged {
        let omega = if from < to {
            sample(c, z, simplest_between(from, to))?.kind.omega().cloned()
        } else {
            None
        };
        segments.push(Segment { from, to, slope, intercept, omega });
    }
    let mut kinks = Vec::new();
    for w in segments.windows(2) {
        let s = w[0].to;
        kinks.push((s, sample(c, z, s)?.kind.omega().cloned()));
    }
    Ok(Profile { segments, kinks })
}

/// Vanishing-cycle data at the closed point 0̄ of the special fibre.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodnessReport {
    pub conductor_sum: u64,
    pub boundary_swan: i64,
    #[serde(serialize_with = "crate::ser_q")]
    pub depth: Q,
    #[serde(serialize_with = "crate::ser_q")]
    pub delta_ybar: Q,
    pub verdict: bool,
}

pub fn good_reduction(c: &Cover) -> Result<GoodnessReport, SwanError> {
    let fld = c.field();
    let kind = c.degeneration_type(&Place::origin(fld, Q::zero()))?;
    let sw = kind.boundary_swan(Point::Finite(fld.zero()));
    let csum = c.conductor_sum();
    let delta_ybar = Q::new((c.p() as i64 - 1) * (csum as i64 - 1 - sw), 2);
    Ok(GoodnessReport {
        conductor_sum: csum,
        boundary_swan: sw,
        depth: kind.depth(),
        delta_ybar,
        verdict: kind.depth().is_zero() && delta_ybar.is_zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_ratfunc;

    const A: &str = "p=5; F=(-2*X+t^10)/((-2)*X^5*(X-t^10)^2*(X-t^5)^5)";
    const B: &str = "p=2; F=1/(X*(X-t^2))";

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn golden_a_types() {
        let c = Cover::parse(A).unwrap();
        let f = c.field();
        let t10 = c.degeneration_type(&Place::origin(f, q(10))).unwrap();
        assert_eq!(t10.depth(), q(17));
        assert_eq!(t10.omega().unwrap(), &parse_ratfunc("1/(x^4*(x-1)^3)", f).unwrap());
        let t5 = c.degeneration_type(&Place::origin(f, q(5))).unwrap();
        assert_eq!(t5.depth(), q(11));
        assert_eq!(t5.omega().unwrap().to_string(), "1/(x^7*(x-1)^5)");
        let t0 = c.degeneration_type(&Place::origin(f, q(0))).unwrap();
        assert_eq!(t0, DegenerationType::Etale { reduction: parse_ratfunc("1/x^11", f).unwrap(), jump: 11 });
        let conds: Vec<u64> = c.branch_locus().iter().map(|b| b.conductor).collect();
        assert_eq!(conds, vec![4, 5, 3]);
        assert!(c.good_reduction().unwrap().verdict);
    }

    #[test]
    fn golden_b_profile() {
        let c = Cover::parse(B).unwrap();
        let prof = c.depth_profile(&TPoly::zero(c.field()), q(3)).unwrap();
        let f: Vec<String> = prof.segments.iter().map(|s| s.delta_formula()).collect();
        assert_eq!(f, vec!["s/2", "(3*s-2)/2", "(s+2)/2"]);
        let r = c.good_reduction().unwrap();
        assert!(!r.verdict);
        assert_eq!(r.conductor_sum, 4);
    }

    #[test]
    fn affine_formulas() {
        assert_eq!(affine_formula(Q::new(1, 2), q(0)), "s/2");
        assert_eq!(affine_formula(Q::new(3, 2), q(-1)), "(3*s-2)/2");
        assert_eq!(affine_formula(q(0), Q::new(11, 5)), "11/5");
        assert_eq!(affine_formula(q(-1), q(3)), "-s+3");
    }
}

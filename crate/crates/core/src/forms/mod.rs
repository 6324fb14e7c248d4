//! Exact differential forms dx/∏(x − P_i)^{h_i}: existence by type, witnesses,
//! and chains of splits deciding local deformability [h] → [h_1, …, h_r].

pub mod groebner;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{is_exact, Elem, Field, FieldError, Poly, RatFunc};
use groebner::{is_unit_ideal, MPoly, Outcome, MAX_VARS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("empty type")]
    Empty,
    #[error("entry {0} is not a conductor (entries are ≥ 2 and ≢ 1 mod p)")]
    BadEntry(u64),
    #[error("entries sum to {sum}, not {h}")]
    SumMismatch { sum: u64, h: u64 },
    #[error("{0} ≡ 1 mod p is not a conductor")]
    BadTotal(u64),
    #[error("{0} points do not fit in the Gröbner engine (at most {max})", max = MAX_VARS + 1)]
    TooManyPoints(usize),
}

/// A multiset of conductors for a fixed p.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FormType {
    pub p: u32,
    /// Descending.
    pub entries: Vec<u64>,
}

impl FormType {
    pub fn new(p: u32, entries: &[u64]) -> Result<FormType, FormError> {
        Field::prime(p)?;
        if entries.is_empty() {
            return Err(FormError::Empty);
        }
        for &h in entries {
            if h < 2 || h % p as u64 == 1 {
                return Err(FormError::BadEntry(h));
            }
        }
        let mut e = entries.to_vec();
        e.sort_unstable_by(|a, b| b.cmp(a));
        Ok(FormType { p, entries: e })
    }

    pub fn parse(p: u32, src: &str) -> Result<FormType, FormError> {
        let entries: Vec<u64> = src
            .split(|c: char| c == ',' || c.is_whitespace() || c == '{' || c == '}')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().map_err(|_| FormError::BadEntry(0)))
            .collect::<Result<_, _>>()?;
        FormType::new(p, &entries)
    }

    pub fn sum(&self) -> u64 {
        self.entries.iter().sum()
    }
}

impl fmt::Display for FormType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_multiset(&self.entries))
    }
}

pub fn fmt_multiset(e: &[u64]) -> String {
    format!("{{{}}}", e.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","))
}

/// Residues mod p with the zero residues dropped, descending.
pub fn normalize_type(t: &FormType) -> Vec<u64> {
    let p = t.p as u64;
    let mut e: Vec<u64> = t.entries.iter().map(|h| h % p).filter(|&h| h != 0).collect();
    e.sort_unstable_by(|a, b| b.cmp(a));
    e
}

/// An exact form with pairwise distinct poles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// ω = form·dx; over F_p when the poles need not be rational.
    pub form: RatFunc,
    /// Field containing all poles.
    pub pole_field: Field,
    pub poles: Vec<(Elem, u64)>,
}

impl Witness {
    fn from_poles(field: Field, poles: Vec<(Elem, u64)>) -> Witness {
        Witness { form: RatFunc::inverse_product(field, &poles), pole_field: field, poles }
    }

    /// Exactness and distinctness of the poles, rechecked from scratch.
    pub fn verify(&self) -> bool {
        let mut seen = HashSet::new();
        let distinct = self.poles.iter().all(|(a, _)| seen.insert(*a));
        distinct && is_exact(&self.form).exact
    }

    pub fn pole_orders(&self) -> Vec<u64> {
        let mut e: Vec<u64> = self.poles.iter().map(|x| x.1).collect();
        e.sort_unstable_by(|a, b| b.cmp(a));
        e
    }

    pub fn form_string(&self) -> String {
        let s = self.form.to_string();
        match s.strip_prefix("1/") {
            Some(den) => format!("dx/{den}"),
            None => format!("({s}) dx"),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = self.pole_field;
        serde_json::json!({
            "form": self.form.to_string(),
            "field": format!("{f:?}"),
            "poles": self.poles.iter().map(|(a, h)| serde_json::json!({"at": f.fmt_elem(*a), "order": h})).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) dx", self.form)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Trivial,
    NecessaryBound,
    PairLaw,
    Family,
    BruteForce,
    Groebner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    /// None only when the Gröbner cap was hit and no witness was found.
    pub exists: Option<bool>,
    pub method: Method,
    pub witness: Option<Witness>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct FormConfig {
    /// Largest extension degree searched for witnesses.
    pub m_max: u32,
    pub pair_cap: usize,
    /// Exactness tests per brute-force scan.
    pub brute_budget: u64,
}

impl Default for FormConfig {
    fn default() -> Self {
        FormConfig { m_max: 3, pair_cap: 1_000_000, brute_budget: 2_000_000 }
    }
}

/// Carry a polynomial over F_p into an extension.
fn lift(poly: &Poly, f: Field) -> Poly {
    Poly::new(f, poly.coeffs().to_vec())
}

fn lift_rat(r: &RatFunc, f: Field) -> RatFunc {
    RatFunc::new(lift(r.num(), f), lift(r.den(), f))
}

/// G = ∏(x − P_i)^{p − h_i} has no coefficient in degree ≡ −1 mod p.
fn exact_for(field: Field, entries: &[u64], pts: &[Elem]) -> bool {
    let p = field.p() as u64;
    let mut g = Poly::one(field);
    for (&h, &a) in entries.iter().zip(pts) {
        g = &g * &Poly::linear(field, a).pow(p - h);
    }
    g.coeffs().iter().enumerate().all(|(j, c)| c.is_zero() || (j as u64 + 1) % p != 0)
}

/// Outcome of a brute-force scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scan {
    Found(Witness),
    /// Every placement over F_{p^m}, m ≤ m_max, was tested.
    Exhausted,
    /// The budget ran out first.
    Budget,
}

/// Search placements with P_1 = 0, P_2 = 1 over F_{p^m}, m = 1..=m_max, of a normalized type.
pub fn brute_force_witness(p: u32, normalized: &[u64], m_max: u32, budget: u64) -> Result<Scan, FormError> {
    let n = normalized.len();
    let mut entries = normalized.to_vec();
    entries.sort_unstable_by(|a, b| b.cmp(a));
    if n <= 2 {
        let f = Field::prime(p)?;
        let pts: Vec<Elem> = (0..n).map(|i| f.int(i as i64)).collect();
        return Ok(if exact_for(f, &entries, &pts) {
            Scan::Found(Witness::from_poles(f, pts.into_iter().zip(entries).collect()))
        } else {
            Scan::Exhausted
        });
    }
    let mut spent = 0u64;
    for m in 1..=m_max {
        let f = match Field::new(p, m) {
            Ok(f) => f,
            Err(_) => return Ok(Scan::Budget),
        };
        let free: Vec<Elem> = f.elements().filter(|a| a.code() > 1).collect();
        if free.len() < n - 2 {
            continue;
        }
        let count = placements(free.len() as u64, &entries[2..]);
        if spent.saturating_add(count) > budget {
            return Ok(Scan::Budget);
        }
        spent += count;
        let base = &Poly::linear(f, f.zero()).pow(p as u64 - entries[0]) * &Poly::linear(f, f.one()).pow(p as u64 - entries[1]);
        let hit = (0..free.len()).into_par_iter().find_map_first(|i0| {
            let mut chosen = vec![i0];
            let g = &base * &Poly::linear(f, free[i0]).pow(p as u64 - entries[2]);
            search(f, &entries, &free, &mut chosen, g)
        });
        if let Some(idx) = hit {
            let mut poles = vec![(f.zero(), entries[0]), (f.one(), entries[1])];
            poles.extend(idx.iter().zip(&entries[2..]).map(|(&i, &h)| (free[i], h)));
            return Ok(Scan::Found(Witness::from_poles(f, poles)));
        }
    }
    Ok(Scan::Exhausted)
}

/// Number of placements with increasing order among equal exponents.
fn placements(k: u64, rest: &[u64]) -> u64 {
    let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
    for &h in rest {
        *groups.entry(h).or_default() += 1;
    }
    let mut left = k;
    let mut total: u64 = 1;
    for (_, c) in groups {
        let mut binom: u64 = 1;
        for i in 0..c {
            binom = binom.saturating_mul(left - i) / (i + 1);
        }
        total = total.saturating_mul(binom);
        left = left.saturating_sub(c);
    }
    total
}

fn search(f: Field, entries: &[u64], free: &[Elem], chosen: &mut Vec<usize>, g: Poly) -> Option<Vec<usize>> {
    let p = f.p() as u64;
    let k = chosen.len() + 2;
    if k == entries.len() {
        let ok = g.coeffs().iter().enumerate().all(|(j, c)| c.is_zero() || (j as u64 + 1) % p != 0);
        return ok.then(|| chosen.clone());
    }
    let start = if entries[k] == entries[k - 1] && k > 2 { chosen[chosen.len() - 1] + 1 } else { 0 };
    for i in start..free.len() {
        if chosen.contains(&i) {
            continue;
        }
        chosen.push(i);
        let next = &g * &Poly::linear(f, free[i]).pow(p - entries[k]);
        if let Some(w) = search(f, entries, free, chosen, next) {
            return Some(w);
        }
        chosen.pop();
    }
    None
}

/// Value a + b·t of a specialized point, where t generates F_{p^2} over F_p.
pub type Specialized = (usize, (u32, u32));

/// Coefficients (c0, c1) of the irreducible μ(t) = t^2 + c1·t + c0 used for F_{p^2}.
fn quadratic_modulus(p: u32) -> (u32, u32) {
    if p == 2 {
        return (1, 1);
    }
    let r = (2..p).find(|&r| (1..p).all(|x| (x as u64 * x as u64) % p as u64 != r as u64)).expect("non-residue");
    (p - r, 0)
}

/// Generators of the exactness ideal in the free points and s, with P_1 = 0, P_2 = 1 and
/// the points listed in `fixed` set to elements of F_{p^2}, saturated by the discriminant
/// ∏_{i<j}(P_i − P_j).
pub fn exactness_ideal(p: u32, normalized: &[u64], fixed: &[Specialized]) -> Result<Vec<MPoly>, FormError> {
    let n = normalized.len();
    let free: Vec<usize> = (2..n).filter(|i| !fixed.iter().any(|f| f.0 == *i)).collect();
    let uses_t = fixed.iter().any(|f| f.1 .1 % p != 0);
    let t = free.len();
    let s = free.len() + usize::from(uses_t);
    if n < 2 || s + 1 > MAX_VARS {
        return Err(FormError::TooManyPoints(n));
    }
    let point = |i: usize| -> MPoly {
        match i {
            0 => MPoly::zero(),
            1 => MPoly::constant(1, p),
            _ => match fixed.iter().find(|f| f.0 == i) {
                Some(&(_, (a, b))) => MPoly::constant(a, p).add(&MPoly::var(t).scale(b, p), p),
                None => MPoly::var(free.iter().position(|&j| j == i).expect("free point")),
            },
        }
    };
    // G(x) = Σ_k g[k] x^k.
    let mut g: Vec<MPoly> = vec![MPoly::constant(1, p)];
    for (i, &h) in normalized.iter().enumerate() {
        let pi = point(i);
        for _ in 0..(p as u64 - h) {
            let mut next = vec![MPoly::zero(); g.len() + 1];
            for (k, c) in g.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c, p);
                next[k] = next[k].sub(&c.mul(&pi, p), p);
            }
            g = next;
        }
    }
    let mut gens: Vec<MPoly> = g
        .into_iter()
        .enumerate()
        .filter(|(k, c)| (*k as u64 + 1) % p as u64 == 0 && !c.is_zero())
        .map(|(_, c)| c)
        .collect();
    let mut disc = MPoly::constant(1, p);
    for i in 0..n {
        for j in i + 1..n {
            disc = disc.mul(&point(i).sub(&point(j), p), p);
        }
    }
    let one = MPoly::constant(1, p);
    gens.push(one.sub(&MPoly::var(s).mul(&disc, p), p));
    if uses_t {
        let (c0, c1) = quadratic_modulus(p);
        let tv = MPoly::var(t);
        gens.push(tv.mul(&tv, p).add(&tv.scale(c1, p), p).add(&MPoly::constant(c0, p), p));
    }
    Ok(gens)
}

fn xmul(a: &[MPoly], b: &[MPoly], p: u32) -> Vec<MPoly> {
    let mut out = vec![MPoly::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate().filter(|t| !t.1.is_zero()) {
        for (j, y) in b.iter().enumerate().filter(|t| !t.1.is_zero()) {
            out[i + j] = out[i + j].add(&x.mul(y, p), p);
        }
    }
    out
}

/// Determinant by expansion along columns, memoized on the set of used rows.
fn det(m: &[Vec<MPoly>], p: u32) -> MPoly {
    fn rec(m: &[Vec<MPoly>], mask: u32, p: u32, memo: &mut HashMap<u32, MPoly>) -> MPoly {
        let c = mask.count_ones() as usize;
        if c == m.len() {
            return MPoly::constant(1, p);
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let mut acc = MPoly::zero();
        let mut k = 0;
        for r in 0..m.len() {
            if mask & (1 << r) != 0 {
                continue;
            }
            if !m[r][c].is_zero() {
                let term = m[r][c].mul(&rec(m, mask | (1 << r), p, memo), p);
                acc = if k % 2 == 0 { acc.add(&term, p) } else { acc.sub(&term, p) };
            }
            k += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }
    rec(m, 0, p, &mut HashMap::new())
}

/// Sylvester resultant of a and b with formal degrees len − 1.
fn resultant(a: &[MPoly], b: &[MPoly], p: u32) -> MPoly {
    let (da, db) = (a.len() - 1, b.len() - 1);
    let size = da + db;
    if size == 0 {
        return MPoly::constant(1, p);
    }
    let mut m = vec![vec![MPoly::zero(); size]; size];
    for r in 0..db {
        for i in 0..=da {
            m[r][r + i] = a[da - i].clone();
        }
    }
    for r in 0..da {
        for i in 0..=db {
            m[db + r][r + i] = b[db - i].clone();
        }
    }
    det(&m, p)
}

/// The exactness ideal in symmetric coordinates: free points of equal order are the roots
/// of a monic polynomial whose coefficients are the variables, and the points in `fixed`
/// take values in F_{p^2}. Distinctness becomes the non-vanishing of discriminants, mutual
/// resultants and values at 0, 1 and the fixed points.
pub fn symmetric_exactness_ideal(p: u32, normalized: &[u64], fixed: &[Specialized]) -> Result<Vec<MPoly>, FormError> {
    let n = normalized.len();
    let uses_t = fixed.iter().any(|f| f.1 .1 % p != 0);
    let nvars = n.saturating_sub(2 + fixed.len()) + usize::from(uses_t);
    if n < 2 || nvars + 1 > MAX_VARS {
        return Err(FormError::TooManyPoints(n));
    }
    let t = nvars - usize::from(uses_t);
    let one = MPoly::constant(1, p);
    let value = |(a, b): (u32, u32)| MPoly::constant(a, p).add(&MPoly::var(t).scale(b, p), p);
    let mut roots: Vec<(MPoly, u64)> = vec![(MPoly::zero(), normalized[0]), (one.clone(), normalized[1])];
    roots.extend(fixed.iter().map(|&(i, v)| (value(v), normalized[i])));
    let mut g: Vec<MPoly> = vec![one.clone()];
    for (r, h) in &roots {
        let lin = vec![MPoly::zero().sub(r, p), one.clone()];
        for _ in 0..(p as u64 - h) {
            g = xmul(&g, &lin, p);
        }
    }
    let mut groups: Vec<Vec<MPoly>> = Vec::new();
    let rest: Vec<u64> = (2..n).filter(|i| !fixed.iter().any(|f| f.0 == *i)).map(|i| normalized[i]).collect();
    let mut var = 0;
    let mut i = 0;
    while i < rest.len() {
        let h = rest[i];
        let k = rest[i..].iter().take_while(|&&x| x == h).count();
        // Q = x^k + v_1 x^{k−1} + … + v_k.
        let mut q: Vec<MPoly> = (0..k).map(|j| MPoly::var(var + k - 1 - j)).collect();
        q.push(one.clone());
        var += k;
        for _ in 0..(p as u64 - h) {
            g = xmul(&g, &q, p);
        }
        groups.push(q);
        i += k;
    }
    let mut gens: Vec<MPoly> = g
        .into_iter()
        .enumerate()
        .filter(|(k, c)| (*k as u64 + 1) % p as u64 == 0 && !c.is_zero())
        .map(|(_, c)| c)
        .collect();
    let mut sat = one.clone();
    for (a, q) in groups.iter().enumerate() {
        for (r, _) in &roots {
            let at = q.iter().rev().fold(MPoly::zero(), |acc, c| acc.mul(r, p).add(c, p));
            sat = sat.mul(&at, p);
        }
        let deriv: Vec<MPoly> = q.iter().enumerate().skip(1).map(|(j, c)| c.scale(j as u32, p)).collect();
        sat = sat.mul(&resultant(q, &deriv, p), p);
        for r in &groups[a + 1..] {
            sat = sat.mul(&resultant(q, r, p), p);
        }
    }
    gens.push(one.sub(&MPoly::var(nvars).mul(&sat, p), p));
    if uses_t {
        let (c0, c1) = quadratic_modulus(p);
        let tv = MPoly::var(t);
        gens.push(tv.mul(&tv, p).add(&tv.scale(c1, p), p).add(&MPoly::constant(c0, p), p));
    }
    Ok(gens)
}

/// Assignments of distinct elements of F_{p^2} \ {0, 1} to the last `k` points, those
/// inside F_p first.
fn specializations(p: u32, n: usize, k: usize, limit: usize) -> Vec<Vec<Specialized>> {
    fn rec(vals: &[(u32, u32)], idx: &[usize], from: usize, cur: &mut Vec<Specialized>, out: &mut Vec<Vec<Specialized>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if cur.len() == idx.len() {
            out.push(cur.clone());
            return;
        }
        for v in from..vals.len() {
            cur.push((idx[cur.len()], vals[v]));
            rec(vals, idx, v + 1, cur, out, limit);
            cur.pop();
        }
    }
    let idx: Vec<usize> = (n - k..n).collect();
    let mut out = Vec::new();
    let base: Vec<(u32, u32)> = (2..p).map(|a| (a, 0)).collect();
    rec(&base, &idx, 0, &mut Vec::new(), &mut out, limit);
    let ext: Vec<(u32, u32)> = (0..p).flat_map(|a| (1..p).map(move |b| (a, b))).chain(base.iter().copied()).collect();
    let mut more = Vec::new();
    rec(&ext, &idx, 0, &mut Vec::new(), &mut more, limit);
    out.extend(more.into_iter().filter(|f| f.iter().any(|x| x.1 .1 != 0)));
    out.truncate(limit);
    out
}

/// Whether the exactness ideal with the discriminant inverted is the unit ideal.
///
/// Specializations are tried first. Fixing free points keeps every common zero a zero of
/// the full ideal, so a proper specialization certifies a proper ideal. A unit answer
/// always comes from the full computation.
pub fn groebner_unit_test(p: u32, normalized: &[u64], pair_cap: usize) -> Result<Outcome, FormError> {
    let n = normalized.len();
    let full = symmetric_exactness_ideal(p, normalized, &[])?;
    let equations = full.len() - 1;
    let free = n.saturating_sub(2);
    if free > equations {
        for fix in specializations(p, n, free - equations, 24) {
            let gens = symmetric_exactness_ideal(p, normalized, &fix)?;
            if is_unit_ideal(&gens, p, pair_cap / 16) == Outcome::Proper {
                return Ok(Outcome::Proper);
            }
        }
    }
    Ok(is_unit_ideal(&full, p, pair_cap))
}

fn with_extension<T>(p: u32, m_max: u32, mut f: impl FnMut(Field) -> Option<T>) -> Option<T> {
    (1..=m_max.max(1)).filter_map(|m| Field::new(p, m).ok()).find_map(&mut f)
}

/// Witnesses from the closed-form families.
fn family_witness(p: u32, e: &[u64], m_max: u32) -> Option<Witness> {
    let n = e.len();
    let fp = Field::prime(p).ok()?;
    let pp = p as u64;
    let check = |w: Witness| w.verify().then_some(w);
    // {p−1, h1, h2}: third pole at (1 − h2)/(h1 − 1).
    if n == 3 {
        for lead in 0..3 {
            if e[lead] != pp - 1 {
                continue;
            }
            let rest: Vec<u64> = (0..3).filter(|&i| i != lead).map(|i| e[i]).collect();
            for (h1, h2) in [(rest[0], rest[1]), (rest[1], rest[0])] {
                let c = fp.div(fp.sub(fp.one(), fp.int(h2 as i64)), fp.sub(fp.int(h1 as i64), fp.one()));
                if c.is_zero() || c == fp.one() {
                    continue;
                }
                let w = Witness::from_poles(fp, vec![(fp.zero(), pp - 1), (fp.one(), h1), (c, h2)]);
                if let Some(w) = check(w) {
                    return Some(w);
                }
            }
        }
    }
    // {(p+1)/2}×3: third pole at a root of Σ C(k,i)² a^{k−i}, k = (p−1)/2.
    if n == 3 && p >= 3 && e.iter().all(|&h| h == (pp + 1) / 2) {
        let k = (pp - 1) / 2;
        let found = with_extension(p, m_max, |f| {
            let mut c = vec![f.zero(); k as usize + 1];
            let mut binom: u64 = 1;
            for i in 0..=k {
                c[(k - i) as usize] = f.int(((binom % pp) * (binom % pp) % pp) as i64);
                binom = binom * (k - i) / (i + 1);
            }
            let poly = Poly::new(f, c);
            let a = poly.roots().into_iter().find(|a| !a.is_zero() && *a != f.one())?;
            check(Witness::from_poles(f, vec![(f.zero(), e[0]), (f.one(), e[1]), (a, e[2])]))
        });
        if found.is_some() {
            return found;
        }
    }
    // {n'+1}^{p−n'+1}: dx/(x^{n'+1}(x^{p−n'} − 1)^{n'+1}).
    if n >= 2 && e.iter().all(|&h| h == e[0]) && e[0] >= 2 && n as u64 == pp - e[0] + 2 {
        let h = e[0];
        let k = pp - (h - 1);
        let den_fp = &Poly::monomial(fp, fp.one(), 1).pow(h) * &(&Poly::monomial(fp, fp.one(), k as usize) - &Poly::one(fp)).pow(h);
        let form = RatFunc::new(Poly::one(fp), den_fp);
        let found = with_extension(p, m_max, |f| {
            let roots = (&Poly::monomial(f, f.one(), k as usize) - &Poly::one(f)).roots();
            if roots.len() as u64 != k {
                return None;
            }
            let mut poles = vec![(f.zero(), h)];
            poles.extend(roots.into_iter().map(|r| (r, h)));
            check(Witness { form: form.clone(), pole_field: f, poles })
        });
        if found.is_some() {
            return found;
        }
    }
    // p = 5: {3,2,2,2} and {3,3,2,2}.
    if p == 5 && (e == [3, 2, 2, 2] || e == [3, 3, 2, 2]) {
        let (den, quad) = if e == [3, 2, 2, 2] {
            ("x^3*(x-1)^2*(x^2+x+1)^2", "x^2+x+1")
        } else {
            ("x^3*(x-1)^3*(x^2+4*x+2)^2", "x^2+4*x+2")
        };
        let form = crate::algebra::parse_ratfunc(&format!("1/({den})"), fp).ok()?;
        let f25 = Field::new(5, 2).ok()?;
        let roots = lift(&crate::algebra::parse_poly(quad, fp).ok()?, f25).roots();
        let mut poles = vec![(f25.zero(), e[0]), (f25.one(), e[1])];
        poles.extend(roots.into_iter().map(|r| (r, 2)));
        return check(Witness { form, pole_field: f25, poles });
    }
    None
}

/// Put back the entries removed by normalization: h_i = h̄_i + p·k_i at the same poles,
/// and multiples of p at fresh points.
fn denormalize(w: &Witness, t: &FormType) -> Option<Witness> {
    let p = t.p as u64;
    let mut pending: Vec<u64> = t.entries.clone();
    let mut poles: Vec<(Elem, u64)> = Vec::new();
    let mut extra: Vec<(Elem, u64)> = Vec::new();
    for &(a, hbar) in &w.poles {
        let pos = pending.iter().position(|&h| h % p == hbar)?;
        let h = pending.remove(pos);
        poles.push((a, h));
        if h > hbar {
            extra.push((a, h - hbar));
        }
    }
    if pending.is_empty() && extra.is_empty() {
        return Some(w.clone());
    }
    let mut field = w.pole_field;
    let need = poles.len() + pending.len();
    if (field.q() as usize) < need {
        if field.m() != 1 {
            return None;
        }
        field = (2..=6).filter_map(|m| Field::new(t.p, m).ok()).find(|f| f.q() as usize >= need)?;
    }
    let used: Vec<Elem> = poles.iter().map(|x| x.0).collect();
    let fresh: Vec<Elem> = field.elements().filter(|a| !used.contains(a)).take(pending.len()).collect();
    for (&a, &h) in fresh.iter().zip(&pending) {
        poles.push((a, h));
        extra.push((a, h));
    }
    let base = if w.form.field() == field { w.form.clone() } else { lift_rat(&w.form, field) };
    let form = &base * &RatFunc::inverse_product(field, &extra);
    Some(Witness { form, pole_field: field, poles })
}

/// Decision for a normalized type; witnesses put the descending orders at 0, 1, then further points.
fn decide_normalized(p: u32, e: &[u64], cfg: &FormConfig) -> Result<Decision, FormError> {
    let n = e.len();
    let fp = Field::prime(p)?;
    let total: u64 = e.iter().sum();
    if n <= 1 {
        let poles: Vec<(Elem, u64)> = e.iter().map(|&h| (fp.zero(), h)).collect();
        return Ok(Decision {
            exists: Some(true),
            method: Method::Trivial,
            witness: Some(Witness::from_poles(fp, poles)),
            note: "at most one pole prime to p".into(),
        });
    }
    if total < p as u64 + n as u64 {
        return Ok(Decision {
            exists: Some(false),
            method: Method::NecessaryBound,
            witness: None,
            note: format!("Σh̄ = {total} < p + n = {}; a residue of the form cannot vanish", p as u64 + n as u64),
        });
    }
    if n == 2 {
        let w = Witness::from_poles(fp, vec![(fp.zero(), e[0]), (fp.one(), e[1])]);
        return Ok(Decision { exists: Some(true), method: Method::PairLaw, witness: Some(w), note: "h̄1 + h̄2 ≥ p + 2".into() });
    }
    if let Some(w) = family_witness(p, e, cfg.m_max) {
        return Ok(Decision { exists: Some(true), method: Method::Family, witness: Some(w), note: "closed-form family".into() });
    }
    let quick = brute_force_witness(p, e, 1, cfg.brute_budget.min(200_000))?;
    if let Scan::Found(w) = quick {
        return Ok(Decision { exists: Some(true), method: Method::BruteForce, witness: Some(w), note: "witness over F_p".into() });
    }
    let outcome = groebner_unit_test(p, e, cfg.pair_cap);
    let scan = || brute_force_witness(p, e, cfg.m_max, cfg.brute_budget);
    match outcome {
        Ok(Outcome::Unit) => Ok(Decision {
            exists: Some(false),
            method: Method::Groebner,
            witness: None,
            note: "the exactness ideal is the unit ideal".into(),
        }),
        Ok(Outcome::Proper) => {
            let witness = match scan()? {
                Scan::Found(w) => Some(w),
                _ => None,
            };
            let note = if witness.is_some() {
                "the exactness ideal is proper".to_string()
            } else {
                format!("the exactness ideal is proper; no witness over F_{{{p}^m}}, m ≤ {}", cfg.m_max)
            };
            Ok(Decision { exists: Some(true), method: Method::Groebner, witness, note })
        }
        Ok(Outcome::CapReached { pairs, basis }) => {
            fallback(format!("Gröbner cap reached after {pairs} pairs with {basis} basis elements"), scan()?)
        }
        Err(e) => fallback(e.to_string(), scan()?),
    }
}

fn fallback(reason: String, scan: Scan) -> Result<Decision, FormError> {
    Ok(match scan {
        Scan::Found(w) => Decision { exists: Some(true), method: Method::BruteForce, witness: Some(w), note: reason },
        _ => Decision { exists: None, method: Method::Groebner, witness: None, note: format!("undecided: {reason}") },
    })
}

/// Decide whether some exact form of type `t` exists, with a witness when one is found.
pub fn exact_form_exists(t: &FormType, cfg: &FormConfig) -> Result<Decision, FormError> {
    let e = normalize_type(t);
    let mut d = decide_normalized(t.p, &e, cfg)?;
    if let Some(w) = d.witness.take() {
        d.witness = denormalize(&w, t).filter(|w| w.verify());
    }
    Ok(d)
}

/// One step {l} ≺ {l_1, …, l_s} of a chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub before: Vec<u64>,
    pub split: u64,
    pub into: Vec<u64>,
    pub after: Vec<u64>,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainWitness {
    pub p: u32,
    pub steps: Vec<ChainStep>,
}

impl ChainWitness {
    pub fn multisets(&self) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        if let Some(first) = self.steps.first() {
            out.push(first.before.clone());
        }
        out.extend(self.steps.iter().map(|s| s.after.clone()));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "steps": self.steps.iter().map(|s| serde_json::json!({
                "before": s.before, "split": s.split, "into": s.into, "after": s.after,
                "witness": s.witness.as_ref().map(|w| w.to_json()),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ChainWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets = self.multisets();
        let chain: Vec<String> = sets.iter().map(|s| fmt_multiset(s)).collect();
        writeln!(f, "{}", chain.join(" ≺ "))?;
        for s in &self.steps {
            let w = s.witness.as_ref().map_or("exists (no witness materialized)".to_string(), |w| w.form_string());
            writeln!(f, "  {} ≺ {}: {}", fmt_multiset(&[s.split]), fmt_multiset(&s.into), w)?;
        }
        Ok(())
    }
}

/// Set partitions of a multiset into at least `min_blocks` blocks, deduplicated; blocks descending.
pub fn groupings(items: &[u64], min_blocks: usize) -> Vec<Vec<Vec<u64>>> {
    let mut items = items.to_vec();
    items.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: HashSet<Vec<Vec<u64>>> = HashSet::new();
    fn rec(items: &[u64], i: usize, blocks: &mut Vec<Vec<u64>>, out: &mut HashSet<Vec<Vec<u64>>>) {
        if i == items.len() {
            let mut b: Vec<Vec<u64>> = blocks.clone();
            for x in &mut b {
                x.sort_unstable_by(|a, b| b.cmp(a));
            }
            b.sort_by(|x, y| y.iter().sum::<u64>().cmp(&x.iter().sum::<u64>()).then_with(|| y.cmp(x)));
            out.insert(b);
            return;
        }
        for k in 0..blocks.len() {
            blocks[k].push(items[i]);
            rec(items, i + 1, blocks, out);
            blocks[k].pop();
        }
        blocks.push(vec![items[i]]);
        rec(items, i + 1, blocks, out);
        blocks.pop();
    }
    rec(&items, 0, &mut Vec::new(), &mut out);
    let mut v: Vec<Vec<Vec<u64>>> = out.into_iter().filter(|b| b.len() >= min_blocks).collect();
    v.sort();
    v
}

/// Memo of exactness decisions keyed by (p, descending type).
pub type ExactMemo = std::sync::Mutex<std::collections::HashMap<(u32, Vec<u64>), Option<bool>>>;

fn exists_cached(p: u32, e: &[u64], cfg: &FormConfig, memo: &ExactMemo) -> bool {
    let mut key = e.to_vec();
    key.sort_unstable_by(|a, b| b.cmp(a));
    if let Some(v) = memo.lock().expect("memo").get(&(p, key.clone())) {
        return v.unwrap_or(false);
    }
    let v = FormType::new(p, &key).ok().and_then(|t| exact_form_exists(&t, cfg).ok()).and_then(|d| d.exists);
    memo.lock().expect("memo").insert((p, key), v);
    v.unwrap_or(false)
}

/// Decide [h] → [target] by searching splits from the single block down to singletons.
pub fn chain_exists(p: u32, h: u64, target: &[u64], cfg: &FormConfig) -> Result<Option<ChainWitness>, FormError> {
    let memo = ExactMemo::default();
    chain_exists_memo(p, h, target, cfg, &memo)
}

pub fn chain_exists_memo(p: u32, h: u64, target: &[u64], cfg: &FormConfig, memo: &ExactMemo) -> Result<Option<ChainWitness>, FormError> {
    let t = FormType::new(p, target)?;
    if t.sum() != h {
        return Err(FormError::SumMismatch { sum: t.sum(), h });
    }
    if h % p as u64 == 1 || h < 2 {
        return Err(FormError::BadTotal(h));
    }
    let mut failed: HashSet<Vec<u64>> = HashSet::new();
    let Some(splits) = resolve(p, &t.entries, cfg, memo, &mut failed) else { return Ok(None) };
    // Replay the splits top-down into a chain of multisets.
    let mut cur = vec![h];
    let mut steps = Vec::new();
    for (block, parts) in splits {
        let sum: u64 = block.iter().sum();
        let before = cur.clone();
        let pos = cur.iter().position(|&x| x == sum).expect("block present");
        cur.remove(pos);
        let mut into: Vec<u64> = parts.iter().map(|b| b.iter().sum()).collect();
        into.sort_unstable_by(|a, b| b.cmp(a));
        cur.extend(&into);
        cur.sort_unstable_by(|a, b| b.cmp(a));
        let witness = FormType::new(p, &into).ok().and_then(|ft| exact_form_exists(&ft, cfg).ok()).and_then(|d| d.witness);
        steps.push(ChainStep { before, split: sum, into, after: cur.clone(), witness });
    }
    Ok(Some(ChainWitness { p, steps }))
}

type Split = (Vec<u64>, Vec<Vec<u64>>);

/// Splits (block, sub-blocks) in top-down order turning the single block into singletons.
fn resolve(p: u32, block: &[u64], cfg: &FormConfig, memo: &ExactMemo, failed: &mut HashSet<Vec<u64>>) -> Option<Vec<Split>> {
    if block.len() <= 1 {
        return Some(Vec::new());
    }
    if failed.contains(block) {
        return None;
    }
    let mut options = groupings(block, 2);
    options.sort_by_key(|g| (g.len(), g.iter().map(|b| b.iter().sum::<u64>()).max()));
    for parts in options {
        let sums: Vec<u64> = parts.iter().map(|b| b.iter().sum()).collect();
        if sums.iter().any(|&s| s % p as u64 == 1) {
            continue;
        }
        if !exists_cached(p, &sums, cfg, memo) {
            continue;
        }
        let mut all = vec![(block.to_vec(), parts.clone())];
        let mut ok = true;
        for b in &parts {
            match resolve(p, b, cfg, memo, failed) {
                Some(s) => all.extend(s),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(all);
        }
    }
    failed.insert(block.to_vec());
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FormConfig {
        FormConfig::default()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_type(&FormType::new(5, &[7, 12, 3]).unwrap()), vec![3, 2, 2]);
        assert!(normalize_type(&FormType::new(5, &[10]).unwrap()).is_empty());
        assert_eq!(normalize_type(&FormType::new(7, &[9]).unwrap()), vec![2]);
    }

    #[test]
    fn small_decisions() {
        let d = exact_form_exists(&FormType::new(5, &[3, 2]).unwrap(), &cfg()).unwrap();
        assert_eq!(d.exists, Some(false));
        let d = exact_form_exists(&FormType::new(5, &[4, 3]).unwrap(), &cfg()).unwrap();
        assert_eq!(d.exists, Some(true));
        assert_eq!(d.witness.unwrap().form.to_string(), "1/(x^4*(x-1)^3)");
        let d = exact_form_exists(&FormType::new(5, &[3, 2, 2, 2]).unwrap(), &cfg()).unwrap();
        assert_eq!(d.exists, Some(true));
        assert!(d.witness.unwrap().verify());
    }

    #[test]
    fn chain_through_seven() {
        let c = chain_exists(5, 12, &[5, 4, 3], &cfg()).unwrap().unwrap();
        assert_eq!(c.multisets(), vec![vec![12], vec![7, 5], vec![5, 4, 3]]);
        assert_eq!(c.steps[0].witness.as_ref().unwrap().form.to_string(), "1/(x^7*(x-1)^5)");
        assert_eq!(c.steps[1].witness.as_ref().unwrap().form.to_string(), "1/(x^4*(x-1)^3)");
        assert!(chain_exists(5, 5, &[3, 2], &cfg()).unwrap().is_none());
        assert!(chain_exists(5, 9, &[3, 2, 2, 2], &cfg()).unwrap().is_some());
        assert!(chain_exists(5, 9, &[9], &cfg()).unwrap().unwrap().steps.is_empty());
    }

    #[test]
    fn coordinate_systems_agree() {
        let cases: [(u32, &[u64]); 7] =
            [(5, &[3, 2, 2, 2]), (5, &[2, 2, 2]), (5, &[4, 3, 2]), (5, &[3, 3, 2, 2]), (7, &[6, 2, 2, 2]), (7, &[3, 3, 3, 3]), (7, &[4, 3, 3, 2])];
        for (p, e) in cases {
            let a = is_unit_ideal(&exactness_ideal(p, e, &[]).unwrap(), p, 1_000_000);
            let b = is_unit_ideal(&symmetric_exactness_ideal(p, e, &[]).unwrap(), p, 1_000_000);
            assert_eq!(a, b, "p={p} {e:?}");
            assert_eq!(a, groebner_unit_test(p, e, 1_000_000).unwrap(), "p={p} {e:?}");
        }
    }

    #[test]
    fn groebner_golden() {
        assert_eq!(groebner_unit_test(7, &[6, 2, 2, 2], 1_000_000).unwrap(), Outcome::Unit);
        assert_eq!(groebner_unit_test(5, &[3, 2, 2, 2], 1_000_000).unwrap(), Outcome::Proper);
        assert_eq!(groebner_unit_test(5, &[2, 2, 2], 1_000_000).unwrap(), Outcome::Unit);
    }
}

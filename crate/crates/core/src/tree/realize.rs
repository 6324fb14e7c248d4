//! Explicit covers realizing a Hurwitz tree.
//!
//! Each vertex v gets an antiderivative H_v of ω_v with a zero of order d_e at ∞,
//! fixed by subtracting p-th powers (x − c)^{−pk} supported on the marked points.
//! The cover is assembled from the leaves up as
//! G_v = t^{−pδ_v}·R_v(y_v)·∏_w t^{pδ_v}·G_w with y_v = (X − z_v)/t^{s_v},
//! where R_v is H_v with the child poles removed.

use num_integer::Integer;
use num_traits::Zero;

use super::{isomorphic, tree_from_cover, validate, HurwitzTree, TreeError};
use crate::algebra::{is_exact, Elem, Field, Poly, RatFunc};
use crate::swan::Cover;
use crate::valuation::BivRat;
use crate::Q;

#[derive(Clone, Debug)]
pub struct RealizeOptions {
    /// Candidate covers tried before giving up.
    pub max_attempts: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions { max_attempts: 48 }
    }
}

/// A cover whose tree is isomorphic to the input.
#[derive(Clone, Debug)]
pub struct Realization {
    pub cover: Cover,
    pub attempts: usize,
}

/// Antiderivative data for one vertex.
#[derive(Clone, Debug)]
struct Anti {
    /// Part whose poles at child points have exactly the order d_e.
    mult: RatFunc,
    /// Extra p-th power terms β·(x − c)^{−j} at child points c, with j above d_e.
    additive: Vec<(Elem, i64, Elem)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum HostKind {
    Leaf(u64),
    Child(u64),
}

/// Solve M·β = rhs over F_q, preferring pivots in column order; free variables are zero.
fn solve(f: Field, mut m: Vec<Vec<Elem>>, mut rhs: Vec<Elem>, cols: usize) -> Option<Vec<Elem>> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(k) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, k);
        rhs.swap(r, k);
        let inv = f.inv(m[r][c]);
        for j in 0..cols {
            m[r][j] = f.mul(m[r][j], inv);
        }
        rhs[r] = f.mul(rhs[r], inv);
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let s = m[i][c];
                for j in 0..cols {
                    m[i][j] = f.sub(m[i][j], f.mul(s, m[r][j]));
                }
                rhs[i] = f.sub(rhs[i], f.mul(s, rhs[r]));
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if rhs[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut beta = vec![f.zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        beta[c] = rhs[i];
    }
    Some(beta)
}

fn pole_power(f: Field, c: Elem, j: i64) -> RatFunc {
    RatFunc::inverse_product(f, &[(c, j as u64)])
}

/// Antiderivative of ω with its p-divisible principal parts and polynomial part removed.
fn reduced_antiderivative(omega: &RatFunc) -> Option<RatFunc> {
    let f = omega.field();
    let p = f.p() as usize;
    let mut h = is_exact(omega).antiderivative?;
    h = &h - &RatFunc::from_poly(h.poly_part());
    for (pi, e) in h.finite_poles() {
        if pi.deg() != Some(1) {
            continue;
        }
        let a = f.neg(pi.coeff(0));
        let (lo, c) = h.laurent_at(a, e);
        for (i, &ci) in c.iter().enumerate() {
            let k = -(lo + i as i64);
            if k > 0 && k as usize % p == 0 && !ci.is_zero() {
                h = &h - &pole_power(f, a, k).scale(ci);
            }
        }
    }
    Some(h)
}

/// Antiderivatives of ω with ord_∞ = d, one per choice of host ordering and tier.
fn candidates(omega: &RatFunc, d: i64, hosts: &[(Elem, HostKind)]) -> Vec<Anti> {
    let f = omega.field();
    let p = f.p() as i64;
    let Some(h0) = reduced_antiderivative(omega) else { return Vec::new() };
    let targets: Vec<i64> = (1..).map(|i| i * p).take_while(|&j| j < d).collect();
    let mut out: Vec<Anti> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    let n = hosts.len().max(1);
    for tier in 0..2 {
        for rot in 0..n {
            let order: Vec<(Elem, HostKind)> = (0..hosts.len()).map(|i| hosts[(i + rot) % hosts.len()]).collect();
            let mut cols: Vec<(Elem, i64, bool)> = Vec::new();
            for &(c, kind) in &order {
                for &j in &targets {
                    let (ok, additive) = match kind {
                        HostKind::Leaf(h) => (j <= h as i64 || (tier == 1 && j / p < h as i64 - 1), false),
                        HostKind::Child(dw) => {
                            if j < dw as i64 {
                                (true, false)
                            } else {
                                (tier == 1, true)
                            }
                        }
                    };
                    if ok {
                        cols.push((c, j, additive));
                    }
                }
            }
            let (lo, a) = h0.laurent_at_infinity(d as usize + 1);
            let coeff = |series: &(i64, Vec<Elem>), j: i64| {
                let i = j - series.0;
                if i < 0 { f.zero() } else { series.1.get(i as usize).copied().unwrap_or(f.zero()) }
            };
            let rhs: Vec<Elem> = targets.iter().map(|&j| coeff(&(lo, a.clone()), j)).collect();
            let mut m = vec![vec![f.zero(); cols.len()]; targets.len()];
            for (ci, &(c, j, _)) in cols.iter().enumerate() {
                let s = pole_power(f, c, j).laurent_at_infinity(d as usize + 1);
                for (ri, &t) in targets.iter().enumerate() {
                    m[ri][ci] = coeff(&s, t);
                }
            }
            let beta = if targets.is_empty() { Some(Vec::new()) } else { solve(f, m, rhs, cols.len()) };
            let Some(beta) = beta else { continue };
            let mut mult = h0.clone();
            let mut additive = Vec::new();
            for (&(c, j, add), &b) in cols.iter().zip(&beta) {
                if b.is_zero() {
                    continue;
                }
                if add {
                    additive.push((c, j, f.neg(b)));
                } else {
                    mult = &mult - &pole_power(f, c, j).scale(b);
                }
            }
            let mut total = mult.clone();
            for &(c, j, b) in &additive {
                total = &total + &pole_power(f, c, j).scale(b);
            }
            let (k0, lead) = total.laurent_at_infinity(1);
            if k0 != d || lead[0].is_zero() {
                continue;
            }
            let norm = f.inv(lead[0]);
            let anti = Anti { mult: mult.scale(norm), additive: additive.into_iter().map(|(c, j, b)| (c, j, f.mul(b, norm))).collect() };
            let key = format!("{}|{:?}", anti.mult, anti.additive);
            if !seen.contains(&key) {
                seen.push(key);
                out.push(anti);
            }
        }
    }
    out
}

struct Layout {
    n: u32,
    /// s_v·N per vertex.
    e: Vec<usize>,
    /// p·δ_v·N per vertex.
    k: Vec<i64>,
    /// Centre z_v over τ.
    z: Vec<Poly>,
}

fn layout(t: &HurwitzTree) -> Result<Layout, TreeError> {
    let f = t.field();
    let p = Q::from_integer(f.p() as i64);
    let nv = t.vertices.len();
    let mut s = vec![Q::zero(); nv];
    for v in 1..nv {
        s[v] = s[t.vertices[v].parent.expect("non-root")] + p * t.vertices[v].thickness;
    }
    let mut n: i64 = 1;
    for v in 0..nv {
        n = n.lcm(s[v].denom()).lcm((p * t.vertices[v].depth).denom());
    }
    let nq = Q::from_integer(n);
    let e: Vec<usize> = s.iter().map(|x| (x * nq).to_integer() as usize).collect();
    let k: Vec<i64> = t.vertices.iter().map(|v| (p * v.depth * nq).to_integer()).collect();
    let mut z = vec![Poly::zero(f); nv];
    for v in 2..nv {
        let u = t.vertices[v].parent.expect("non-root");
        let c = t.vertices[v].at.unwrap_or(f.zero());
        z[v] = &z[u] + &Poly::monomial(f, c, e[u]);
    }
    Ok(Layout { n: n as u32, e, k, z })
}

fn tau_pow(f: Field, n: u32, k: i64) -> BivRat {
    BivRat::local_lift(&RatFunc::one(f), n, k, &Poly::zero(f), 0)
}

fn assemble(t: &HurwitzTree, lay: &Layout, choice: &[Option<&Anti>], v: usize) -> BivRat {
    let f = t.field();
    let anti = choice[v].expect("non-root vertex");
    let mut r = anti.mult.clone();
    let children = t.children(v);
    for &w in &children {
        let c = t.vertices[w].at.unwrap_or(f.zero());
        let d = t.edge_jump(w).expect("non-root") as u64;
        r = &r * &RatFunc::from_poly(Poly::linear(f, c).pow(d));
    }
    let mut g = BivRat::local_lift(&r, lay.n, -lay.k[v], &lay.z[v], lay.e[v]);
    for &w in &children {
        g = g.mul(&tau_pow(f, lay.n, lay.k[v]).mul(&assemble(t, lay, choice, w)));
    }
    for &(c, j, b) in &anti.additive {
        g = g.add(&BivRat::local_lift(&pole_power(f, c, j).scale(b), lay.n, -lay.k[v], &lay.z[v], lay.e[v]));
    }
    g
}

fn hosts(t: &HurwitzTree, v: usize) -> Vec<(Elem, HostKind)> {
    let f = t.field();
    let mut out: Vec<(Elem, HostKind)> = t
        .leaves_at(v)
        .into_iter()
        .map(|b| (t.leaves[b].at.unwrap_or(f.zero()), HostKind::Leaf(t.leaves[b].conductor)))
        .collect();
    out.extend(
        t.children(v)
            .into_iter()
            .map(|w| (t.vertices[w].at.unwrap_or(f.zero()), HostKind::Child(t.edge_jump(w).expect("non-root") as u64))),
    );
    out.sort_by_key(|h| h.0);
    out
}

/// Search for Y^p − Y = F(X, t) over F_q whose tree is isomorphic to `t`.
pub fn realize_tree(t: &HurwitzTree, opts: &RealizeOptions) -> Result<Realization, TreeError> {
    let f = t.field();
    let report = validate(t);
    if !report.passed() {
        return Err(TreeError::Invalid(report.to_string()));
    }
    if !t.root_depth().is_zero() {
        return Err(TreeError::Invalid("only trees with an étale root (depth 0) are realized".into()));
    }
    if t.vertices.len() == 1 {
        let h = t.leaves[0].conductor as i64;
        let rhs = BivRat::local_lift(&RatFunc::monomial(f, f.one(), 1 - h), 1, 0, &Poly::zero(f), 0);
        let cover = Cover::new(rhs)?;
        return Ok(Realization { cover, attempts: 1 });
    }
    let lay = layout(t)?;
    let nv = t.vertices.len();
    let mut per_vertex: Vec<Vec<Anti>> = vec![Vec::new(); nv];
    for v in 1..nv {
        let omega = t.vertices[v].omega.as_ref().expect("non-root");
        let d = t.edge_jump(v).expect("non-root");
        per_vertex[v] = candidates(omega, d, &hosts(t, v));
        if per_vertex[v].is_empty() {
            return Err(TreeError::RealizationSearchExhausted {
                attempts: 0,
                reason: format!("no antiderivative of ω at vertex {v} has a zero of order {d} at ∞"),
            });
        }
    }
    let mut idx = vec![0usize; nv];
    let mut attempts = 0;
    let mut last;
    loop {
        attempts += 1;
        let choice: Vec<Option<&Anti>> = (0..nv).map(|v| if v == 0 { None } else { Some(&per_vertex[v][idx[v]]) }).collect();
        let rhs = assemble(t, &lay, &choice, 1);
        match Cover::new(rhs).map_err(TreeError::from).and_then(|c| tree_from_cover(&c).map(|tr| (c, tr))) {
            Ok((cover, tree)) if isomorphic(&tree, t) => return Ok(Realization { cover, attempts }),
            Ok(_) => last = "tree of the candidate differs".into(),
            Err(e) => last = e.to_string(),
        }
        if attempts >= opts.max_attempts {
            break;
        }
        let mut v = 1;
        loop {
            if v == nv {
                return Err(TreeError::RealizationSearchExhausted { attempts, reason: last });
            }
            idx[v] += 1;
            if idx[v] < per_vertex[v].len() {
                break;
            }
            idx[v] = 0;
            v += 1;
        }
    }
    Err(TreeError::RealizationSearchExhausted { attempts, reason: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_ratfunc;

    #[test]
    fn realizes_height_one_and_two() {
        let f = Field::prime(5).unwrap();
        let t0 = HurwitzTree::trivial(f, Q::zero(), 6);
        let t1 = t0.extend(0, &[4, 3], &parse_ratfunc("1/(x^4*(x-1)^3)", f).unwrap()).unwrap();
        let r = realize_tree(&t1, &RealizeOptions::default()).unwrap();
        assert!(isomorphic(&tree_from_cover(&r.cover).unwrap(), &t1));

        let t0 = HurwitzTree::trivial(f, Q::zero(), 11);
        let t1 = t0.extend(0, &[5, 7], &parse_ratfunc("1/(x^7*(x-1)^5)", f).unwrap()).unwrap();
        let seven = t1.leaves.iter().position(|l| l.conductor == 7).unwrap();
        let t2 = t1.extend(seven, &[4, 3], &parse_ratfunc("1/(x^4*(x-1)^3)", f).unwrap()).unwrap();
        let r = realize_tree(&t2, &RealizeOptions::default()).unwrap();
        assert!(isomorphic(&tree_from_cover(&r.cover).unwrap(), &t2));
    }
}

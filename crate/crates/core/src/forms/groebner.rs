//! Buchberger's algorithm over F_p for small ideals, degrevlex order.
//!
//! Monomials in at most 7 variables are packed into a u64: byte i holds the exponent
//! of variable i and byte 7 the total degree. XOR with `REV` turns integer comparison
//! into degrevlex when the last variable sits in byte 6.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

const REV: u64 = 0x00FF_FFFF_FFFF_FFFF;
const HIGH: u64 = 0x8080_8080_8080_8080;
pub const MAX_VARS: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mono(u64);

impl Mono {
    pub const ONE: Mono = Mono(0);

    pub fn var(i: usize) -> Mono {
        Mono((1u64 << (8 * i)) | (1u64 << 56))
    }

    fn key(self) -> u64 {
        self.0 ^ REV
    }

    pub fn degree(self) -> u32 {
        (self.0 >> 56) as u32
    }

    pub fn mul(self, o: Mono) -> Mono {
        Mono(self.0 + o.0)
    }

    pub fn divides(self, o: Mono) -> bool {
        ((o.0 | HIGH) - self.0) & HIGH == HIGH
    }

    /// o / self, assuming self divides o.
    pub fn quotient(self, o: Mono) -> Mono {
        Mono(o.0 - self.0)
    }

    pub fn lcm(self, o: Mono) -> Mono {
        let mut r = 0u64;
        let mut deg = 0u64;
        for i in 0..MAX_VARS {
            let e = ((self.0 >> (8 * i)) & 0xFF).max((o.0 >> (8 * i)) & 0xFF);
            r |= e << (8 * i);
            deg += e;
        }
        Mono(r | (deg << 56))
    }

    pub fn coprime(self, o: Mono) -> bool {
        (0..MAX_VARS).all(|i| ((self.0 >> (8 * i)) & 0xFF) == 0 || ((o.0 >> (8 * i)) & 0xFF) == 0)
    }

    pub fn exponent(self, i: usize) -> u32 {
        ((self.0 >> (8 * i)) & 0xFF) as u32
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key().cmp(&o.key())
    }
}

/// Polynomial over F_p with terms in strictly decreasing degrevlex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    pub terms: Vec<(Mono, u32)>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut t, mut nt, mut r, mut nr) = (0i64, 1i64, p as i64, a as i64);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    t.rem_euclid(p as i64) as u32
}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly { terms: Vec::new() }
    }

    pub fn constant(c: u32, p: u32) -> MPoly {
        let c = c % p;
        MPoly { terms: if c == 0 { Vec::new() } else { vec![(Mono::ONE, c)] } }
    }

    pub fn var(i: usize) -> MPoly {
        MPoly { terms: vec![(Mono::var(i), 1)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> Mono {
        self.terms[0].0
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == Mono::ONE
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0.degree()).max().unwrap_or(0)
    }

    /// self + c·m·o.
    pub fn add_scaled(&self, o: &MPoly, c: u32, m: Mono, p: u32) -> MPoly {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let pp = p as u64;
        while i < self.terms.len() || j < o.terms.len() {
            let oj = o.terms.get(j).map(|&(mo, co)| (mo.mul(m), (co as u64 * c as u64 % pp) as u32));
            match (self.terms.get(i), oj) {
                (Some(&(a, ca)), Some((b, cb))) => match a.cmp(&b) {
                    Ordering::Greater => {
                        out.push((a, ca));
                        i += 1;
                    }
                    Ordering::Less => {
                        out.push((b, cb));
                        j += 1;
                    }
                    Ordering::Equal => {
                        let s = (ca + cb) % p;
                        if s != 0 {
                            out.push((a, s));
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (Some(&t), None) => {
                    out.push(t);
                    i += 1;
                }
                (None, Some(t)) => {
                    out.push(t);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        MPoly { terms: out }
    }

    pub fn add(&self, o: &MPoly, p: u32) -> MPoly {
        self.add_scaled(o, 1, Mono::ONE, p)
    }

    pub fn sub(&self, o: &MPoly, p: u32) -> MPoly {
        self.add_scaled(o, p - 1, Mono::ONE, p)
    }

    pub fn mul(&self, o: &MPoly, p: u32) -> MPoly {
        let mut acc = MPoly::zero();
        for &(m, c) in &self.terms {
            acc = acc.add_scaled(o, c, m, p);
        }
        acc
    }

    pub fn scale(&self, c: u32, p: u32) -> MPoly {
        MPoly::zero().add_scaled(self, c % p, Mono::ONE, p)
    }

    fn make_monic(&mut self, p: u32) {
        if let Some(&(_, c)) = self.terms.first() {
            if c != 1 {
                let inv = inv_mod(c, p) as u64;
                for t in &mut self.terms {
                    t.1 = (t.1 as u64 * inv % p as u64) as u32;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The ideal is the whole ring.
    Unit,
    /// The reduced basis is not {1}.
    Proper,
    /// The pair limit was reached first.
    CapReached { pairs: usize, basis: usize },
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Mono,
    sugar: u32,
}

/// Full reduction of f modulo the active basis elements.
fn reduce(f: MPoly, basis: &[MPoly], active: &[bool], p: u32) -> MPoly {
    let pp = p as u64;
    let mut coef: HashMap<Mono, u32> = HashMap::with_capacity(f.terms.len() * 4);
    let mut heap: BinaryHeap<Mono> = BinaryHeap::with_capacity(f.terms.len() * 4);
    for (m, c) in f.terms {
        coef.insert(m, c);
        heap.push(m);
    }
    let mut done: Vec<(Mono, u32)> = Vec::new();
    while let Some(m) = heap.pop() {
        // Duplicates of m may still be queued.
        while heap.peek() == Some(&m) {
            heap.pop();
        }
        let c = match coef.remove(&m) {
            Some(c) if c != 0 => c,
            _ => continue,
        };
        let hit = basis.iter().zip(active).find(|(g, &a)| a && g.lead().divides(m));
        match hit {
            Some((g, _)) => {
                let q = g.lead().quotient(m);
                let k = (p - c) as u64;
                for &(gm, gc) in &g.terms[1..] {
                    let t = gm.mul(q);
                    let e = coef.entry(t).or_insert_with(|| {
                        heap.push(t);
                        0
                    });
                    *e = ((*e as u64 + k * gc as u64) % pp) as u32;
                }
            }
            None => done.push((m, c)),
        }
    }
    MPoly { terms: done }
}

/// Decide whether the ideal generated by `gens` is the unit ideal.
pub fn is_unit_ideal(gens: &[MPoly], p: u32, pair_cap: usize) -> Outcome {
    let mut basis: Vec<MPoly> = Vec::new();
    let mut sugar: Vec<u32> = Vec::new();
    let mut active: Vec<bool> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut processed = 0usize;
    let mut queue: Vec<MPoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    queue.sort_by_key(|g| g.lead());
    for g in queue {
        let s = g.degree();
        let mut r = reduce(g, &basis, &active, p);
        if r.is_zero() {
            continue;
        }
        if r.is_constant() {
            return Outcome::Unit;
        }
        r.make_monic(p);
        insert(&mut basis, &mut sugar, &mut active, &mut pairs, r, s);
    }
    while !pairs.is_empty() {
        let k = (0..pairs.len()).min_by_key(|&k| (pairs[k].sugar, pairs[k].lcm)).expect("nonempty");
        let pr = pairs.swap_remove(k);
        processed += 1;
        if processed > pair_cap {
            return Outcome::CapReached { pairs: processed - 1, basis: basis.len() };
        }
        let (f, g) = (&basis[pr.i], &basis[pr.j]);
        let s = MPoly::zero()
            .add_scaled(f, 1, f.lead().quotient(pr.lcm), p)
            .add_scaled(g, p - 1, g.lead().quotient(pr.lcm), p);
        let mut r = reduce(s, &basis, &active, p);
        if r.is_zero() {
            continue;
        }
        if r.is_constant() {
            return Outcome::Unit;
        }
        r.make_monic(p);
        insert(&mut basis, &mut sugar, &mut active, &mut pairs, r, pr.sugar);
    }
    Outcome::Proper
}

/// Gebauer–Möller update with the new element h.
fn insert(basis: &mut Vec<MPoly>, sugar: &mut Vec<u32>, active: &mut Vec<bool>, pairs: &mut Vec<Pair>, h: MPoly, s: u32) {
    let t = basis.len();
    let lh = h.lead();
    let sh = s.max(h.degree());
    let mut cand: Vec<(usize, Mono, bool)> = (0..t)
        .filter(|&i| active[i])
        .map(|i| (i, basis[i].lead().lcm(lh), basis[i].lead().coprime(lh)))
        .collect();
    // Chain criterion among the new pairs.
    let mut keep = vec![true; cand.len()];
    for a in 0..cand.len() {
        for b in 0..cand.len() {
            if a != b && keep[b] && cand[b].1.divides(cand[a].1) && (cand[b].1 != cand[a].1 || b < a) {
                keep[a] = false;
                break;
            }
        }
    }
    let mut k = 0;
    cand.retain(|_| {
        let r = keep[k];
        k += 1;
        r
    });
    // Drop old pairs whose lcm is strictly divisible by lead(h).
    pairs.retain(|pr| {
        !(lh.divides(pr.lcm) && basis[pr.i].lead().lcm(lh) != pr.lcm && basis[pr.j].lead().lcm(lh) != pr.lcm)
    });
    for (i, l, coprime) in cand {
        if coprime {
            continue;
        }
        let si = sugar[i] + basis[i].lead().quotient(l).degree();
        let sj = sh + lh.quotient(l).degree();
        pairs.push(Pair { i, j: t, lcm: l, sugar: si.max(sj) });
    }
    for i in 0..t {
        if active[i] && lh.divides(basis[i].lead()) {
            active[i] = false;
        }
    }
    basis.push(h);
    sugar.push(sh);
    active.push(true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrevlex_order() {
        let x = Mono::var(0);
        let y = Mono::var(1);
        let z = Mono::var(2);
        assert!(x.mul(z) < y.mul(y));
        assert!(x.mul(y) > x.mul(z));
        assert!(z.mul(z).mul(z) > x.mul(x));
        assert!(x.divides(x.mul(y)));
        assert!(!y.mul(y).divides(x.mul(y)));
    }

    #[test]
    fn unit_and_proper() {
        let p = 5;
        let x = MPoly::var(0);
        let y = MPoly::var(1);
        let one = MPoly::constant(1, p);
        let f = x.mul(&y, p).sub(&one, p);
        assert_eq!(is_unit_ideal(&[f.clone(), x.clone()], p, 1000), Outcome::Unit);
        let g = x.mul(&x, p).sub(&y, p);
        assert_eq!(is_unit_ideal(&[f, g], p, 1000), Outcome::Proper);
    }
}

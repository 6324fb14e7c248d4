//! Finite fields F_{p^m} with table-driven multiplication.
//!
//! Elements are stored as the base-p integer whose digits are the coordinates in
//! the power basis of F_p[a]/(f), where f is the lexicographically first primitive
//! monic polynomial of degree m. For m = 1 the encoding is the residue itself.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

/// Largest field order we are willing to tabulate.
const MAX_ORDER: u64 = 1 << 20;
/// Fields up to this order get a full addition table.
const ADD_TABLE_ORDER: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of order {p}^{m} is too large to tabulate")]
    TooLarge { p: u32, m: u32 },
}

/// An element of some F_{p^m}; meaningful only together with its [`Field`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Elem(pub(crate) u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// The integer encoding (base-p digits of the coordinates).
    pub fn code(self) -> u32 {
        self.0
    }
}

struct Tables {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u16>>,
}

/// Handle to the arithmetic tables of F_{p^m}. Cheap to copy; tables live for the
/// whole process and are shared between all handles with the same (p, m).
#[derive(Clone, Copy)]
pub struct Field(&'static Tables);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.0, other.0)
    }
}
impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.0.p, self.0.m).hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.m == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{}", self.0.p, self.0.m)
        }
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn registry() -> &'static Mutex<HashMap<(u32, u32), &'static Tables>> {
    static REG: OnceLock<Mutex<HashMap<(u32, u32), &'static Tables>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Field {
    /// F_{p^m}. The modulus is chosen deterministically, so equal (p, m) give the same field.
    pub fn new(p: u32, m: u32) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let order = (p as u64).checked_pow(m).filter(|&q| q <= MAX_ORDER);
        if order.is_none() {
            return Err(FieldError::TooLarge { p, m });
        }
        let mut reg = registry().lock().expect("field registry poisoned");
        if let Some(t) = reg.get(&(p, m)) {
            return Ok(Field(t));
        }
        let t: &'static Tables = Box::leak(Box::new(build_tables(p, m)));
        reg.insert((p, m), t);
        Ok(Field(t))
    }

    /// The prime field F_p.
    pub fn prime(p: u32) -> Result<Field, FieldError> {
        Field::new(p, 1)
    }

    pub fn p(self) -> u32 {
        self.0.p
    }
    pub fn m(self) -> u32 {
        self.0.m
    }
    pub fn q(self) -> u32 {
        self.0.q
    }
    /// Coefficients of the defining polynomial, low degree first.
    pub fn modulus(self) -> &'static [u32] {
        &self.0.modulus
    }

    pub fn zero(self) -> Elem {
        Elem(0)
    }
    pub fn one(self) -> Elem {
        Elem(1)
    }

    /// Image of an integer.
    pub fn int(self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.0.p as i64) as u32)
    }

    /// Element with the given encoding; panics if out of range.
    pub fn from_code(self, code: u32) -> Elem {
        assert!(code < self.0.q, "code {code} out of range for {self:?}");
        Elem(code)
    }

    /// The class of the indeterminate `a` generating F_{p^m} over F_p (m > 1),
    /// or a primitive root of F_p when m = 1.
    pub fn generator(self) -> Elem {
        Elem(self.0.exp[1 % self.0.exp.len()])
    }

    /// Residue in 0..p when the element lies in the prime field.
    pub fn to_prime(self, a: Elem) -> Option<u32> {
        (a.0 < self.0.p).then_some(a.0)
    }

    pub fn elements(self) -> impl Iterator<Item = Elem> {
        (0..self.0.q).map(Elem)
    }

    pub fn add(self, a: Elem, b: Elem) -> Elem {
        let t = self.0;
        if t.m == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= t.p { s - t.p } else { s });
        }
        if t.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        if let Some(tab) = &t.add {
            return Elem(tab[(a.0 * t.q + b.0) as usize] as u32);
        }
        add_digits(t.p, t.m, a.0, b.0)
    }

    pub fn neg(self, a: Elem) -> Elem {
        let t = self.0;
        if t.p == 2 || a.0 == 0 {
            return a;
        }
        if t.m == 1 {
            return Elem(t.p - a.0);
        }
        let (mut x, mut out, mut pw) = (a.0, 0u32, 1u32);
        for _ in 0..t.m {
            let d = x % t.p;
            x /= t.p;
            out += ((t.p - d) % t.p) * pw;
            pw *= t.p;
        }
        Elem(out)
    }

    pub fn sub(self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem(0);
        }
        let t = self.0;
        if t.m == 1 {
            return Elem(((a.0 as u64 * b.0 as u64) % t.p as u64) as u32);
        }
        let n = t.q - 1;
        let s = t.log[a.0 as usize] + t.log[b.0 as usize];
        Elem(t.exp[(if s >= n { s - n } else { s }) as usize])
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(self, a: Elem) -> Elem {
        assert!(a.0 != 0, "inverse of zero in {self:?}");
        let t = self.0;
        let n = t.q - 1;
        let l = t.log[a.0 as usize];
        Elem(t.exp[((n - l) % n) as usize])
    }

    pub fn div(self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    pub fn pow(self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem(1);
        }
        if a.0 == 0 {
            return Elem(0);
        }
        let t = self.0;
        let n = (t.q - 1) as u64;
        let l = t.log[a.0 as usize] as u64;
        Elem(t.exp[((l * (e % n)) % n) as usize])
    }

    /// Signed power; negative exponents invert.
    pub fn powi(self, a: Elem, e: i64) -> Elem {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.inv(self.pow(a, e.unsigned_abs()))
        }
    }

    /// Frobenius a ↦ a^p.
    pub fn frob(self, a: Elem) -> Elem {
        self.pow(a, self.0.p as u64)
    }

    /// The unique p-th root.
    pub fn pth_root(self, a: Elem) -> Elem {
        let t = self.0;
        self.pow(a, (t.p as u64).pow(t.m - 1))
    }

    /// Absolute trace to F_p.
    pub fn trace(self, a: Elem) -> Elem {
        let mut s = Elem(0);
        let mut x = a;
        for _ in 0..self.0.m {
            s = self.add(s, x);
            x = self.frob(x);
        }
        s
    }

    /// Display form: integers in 0..p for the prime field, otherwise a polynomial in `a`.
    pub fn fmt_elem(self, a: Elem) -> String {
        let t = self.0;
        if a.0 < t.p {
            return a.0.to_string();
        }
        let mut digits = Vec::new();
        let mut x = a.0;
        for _ in 0..t.m {
            digits.push(x % t.p);
            x /= t.p;
        }
        let mut parts = Vec::new();
        for (i, &d) in digits.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            parts.push(match (d, i) {
                (_, 0) => d.to_string(),
                (1, _) => mono,
                _ => format!("{d}*{mono}"),
            });
        }
        parts.join("+")
    }
}

fn add_digits(p: u32, m: u32, a: u32, b: u32) -> Elem {
    let (mut x, mut y, mut out, mut pw) = (a, b, 0u32, 1u32);
    for _ in 0..m {
        let d = (x % p + y % p) % p;
        x /= p;
        y /= p;
        out += d * pw;
        pw *= p;
    }
    Elem(out)
}

/// Multiply an encoded element by the generator, reducing by the monic modulus.
fn times_gen(p: u32, m: u32, modulus: &[u32], v: u32) -> u32 {
    let mut digits = vec![0u32; m as usize + 1];
    let mut x = v;
    for d in digits.iter_mut().skip(1) {
        *d = x % p;
        x /= p;
    }
    let lead = digits[m as usize];
    if lead != 0 {
        for i in 0..m as usize {
            digits[i] = (digits[i] + (p - lead) * modulus[i]) % p;
        }
    }
    let mut out = 0u32;
    for i in (0..m as usize).rev() {
        out = out * p + digits[i];
    }
    out
}

fn build_tables(p: u32, m: u32) -> Tables {
    let q = p.pow(m);
    let n = q - 1;
    let (modulus, exp) = if m == 1 {
        let g = (1..p.max(2))
            .find(|&g| {
                let mut x = 1u64;
                for k in 1..=n {
                    x = x * g as u64 % p as u64;
                    if x == 1 {
                        return k == n;
                    }
                }
                false
            })
            .unwrap_or(1);
        let mut exp = Vec::with_capacity(n as usize);
        let mut x = 1u64;
        for _ in 0..n {
            exp.push(x as u32);
            x = x * g as u64 % p as u64;
        }
        (vec![(p - g) % p, 1], exp)
    } else {
        let mut found = None;
        'cand: for c in 0..q {
            let mut modulus = Vec::with_capacity(m as usize + 1);
            let mut x = c;
            for _ in 0..m {
                modulus.push(x % p);
                x /= p;
            }
            modulus.push(1);
            if modulus[0] == 0 {
                continue;
            }
            let mut exp = Vec::with_capacity(n as usize);
            let mut v = 1u32;
            for k in 0..n {
                if k > 0 && v == 1 {
                    continue 'cand;
                }
                exp.push(v);
                v = times_gen(p, m, &modulus, v);
            }
            if v == 1 {
                found = Some((modulus, exp));
                break;
            }
        }
        found.expect("a primitive polynomial exists for every degree")
    };
    let mut log = vec![0u32; q as usize];
    for (i, &e) in exp.iter().enumerate() {
        log[e as usize] = i as u32;
    }
    let add = (m > 1 && p != 2 && q <= ADD_TABLE_ORDER).then(|| {
        let mut tab = vec![0u16; (q * q) as usize];
        for a in 0..q {
            for b in 0..q {
                tab[(a * q + b) as usize] = add_digits(p, m, a, b).0 as u16;
            }
        }
        tab
    });
    Tables { p, m, q, modulus, exp, log, add }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        for &(p, m) in &[(2, 1), (2, 3), (3, 2), (5, 1), (5, 2), (7, 3)] {
            let f = Field::new(p, m).unwrap();
            let elems: Vec<_> = f.elements().collect();
            assert_eq!(elems.len() as u32, p.pow(m));
            for &a in &elems {
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a)), f.one());
                }
                assert_eq!(f.frob(f.pth_root(a)), a);
            }
            for &a in elems.iter().take(20) {
                for &b in elems.iter().rev().take(20) {
                    for &c in elems.iter().skip(3).take(5) {
                        let lhs = f.mul(a, f.add(b, c));
                        let rhs = f.add(f.mul(a, b), f.mul(a, c));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_bijective() {
        let f = Field::new(3, 3).unwrap();
        let mut seen: Vec<_> = f.elements().map(|a| f.frob(a)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 27);
    }

    #[test]
    fn same_field_same_handle() {
        assert_eq!(Field::new(5, 2).unwrap(), Field::new(5, 2).unwrap());
        assert!(Field::new(4, 1).is_err());
    }
}

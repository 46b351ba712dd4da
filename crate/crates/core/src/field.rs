//! Small Galois fields `F_q`, `q = p^k <= 256`.
//!
//! Elements are identified with their canonical index in `[0, q)`: an
//! element `c_0 + c_1 x + ... + c_{k-1} x^{k-1}` of `F_p[x] / (m(x))` has
//! index `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` (constant term varies fastest).
//! This index is also the serialized form of an element.
//!
//! The modulus `m(x)` for each `(p, k)` is the monic irreducible polynomial of
//! degree `k` with the smallest index when its lower `k` coefficients are
//! read in the same order. This yields, for example:
//!
//! | field | modulus       |
//! |-------|---------------|
//! | F_4   | x^2 + x + 1   |
//! | F_8   | x^3 + x + 1   |
//! | F_9   | x^2 + 1       |
//! | F_16  | x^4 + x + 1   |
//! | F_25  | x^2 + 2       |
//!
//! For prime fields the modulus is `x`, so elements are residues mod `p`.
//!
//! Multiplication uses exp/log tables with respect to the smallest primitive
//! element; addition uses a full `q x q` table.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A finite field `F_{p^k}`. Cheap to clone; equality is by `(p, k)`.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

struct FieldInner {
    p: u32,
    k: u32,
    q: usize,
    /// Coefficients of the monic modulus, constant term first, length `k + 1`.
    modulus: Vec<u32>,
    generator: u8,
    add: Vec<u8>,
    neg: Vec<u8>,
    /// `exp[i] = g^i` for `i in [0, 2(q-1))`.
    exp: Vec<u8>,
    /// `log[x]` for `x != 0`; `log[0]` is unused.
    log: Vec<u16>,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomial over F_p as coefficient vector, constant term first.
fn digits(mut v: usize, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push((v % p as usize) as u32);
        v /= p as usize;
    }
    out
}

fn undigits(c: &[u32], p: u32) -> usize {
    c.iter().rev().fold(0usize, |acc, &d| acc * p as usize + d as usize)
}

/// Remainder of `a` modulo the monic polynomial `m` over F_p.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dm;
            for (i, &mc) in m[..dm].iter().enumerate() {
                let sub = (lead * mc) % p;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
        }
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as usize).pow(d as u32);
        for low in 0..count {
            let mut divisor = digits(low, p, d as u32);
            divisor.push(1);
            if poly_rem(m, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn default_modulus(p: u32, k: u32) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    let count = (p as usize).pow(k);
    for low in 0..count {
        let mut m = digits(low, p, k);
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl Field {
    /// Builds `F_{p^k}` with the documented modulus.
    pub fn new(p: u32, k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::ZeroDegree);
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        if q > 256 {
            return Err(Error::FieldTooLarge { p, k });
        }
        let q = q as usize;
        let modulus = default_modulus(p, k);
        debug_assert!(is_irreducible(&modulus, p));

        let mut add = vec![0u8; q * q];
        let mut neg = vec![0u8; q];
        for a in 0..q {
            let da = digits(a, p, k);
            let n: Vec<u32> = da.iter().map(|&c| (p - c) % p).collect();
            neg[a] = undigits(&n, p) as u8;
            for b in 0..q {
                let db = digits(b, p, k);
                let s: Vec<u32> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&s, p) as u8;
            }
        }

        let slow_mul = |a: usize, b: usize| -> usize {
            let prod = poly_mul(&digits(a, p, k), &digits(b, p, k), p);
            undigits(&poly_rem(&prod, &modulus, p), p)
        };
        let mut generator = 0usize;
        for cand in 1..q {
            let mut x = cand;
            let mut order = 1;
            while x != 1 {
                x = slow_mul(x, cand);
                order += 1;
            }
            if order == q - 1 {
                generator = cand;
                break;
            }
        }
        assert!(generator != 0, "multiplicative group of F_{q} must be cyclic");

        let mut exp = vec![0u8; 2 * (q - 1)];
        let mut log = vec![0u16; q];
        let mut x = 1usize;
        for i in 0..q - 1 {
            exp[i] = x as u8;
            exp[i + q - 1] = x as u8;
            log[x] = i as u16;
            x = slow_mul(x, generator);
        }

        Ok(Field(Arc::new(FieldInner {
            p,
            k,
            q,
            modulus,
            generator: generator as u8,
            add,
            neg,
            exp,
            log,
        })))
    }

    /// Parses `"9"`, `"3^2"` or `"3"` into a field.
    pub fn from_order_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, k)) = s.split_once('^') {
            let p = p.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?;
            let k = k.trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?;
            return Field::new(p, k);
        }
        let q = s.parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?;
        Field::from_order(q)
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn from_order(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::NotPrime(q));
        }
        let mut p = 2;
        while q % p != 0 {
            p += 1;
        }
        let mut k = 0;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        if rest != 1 {
            return Err(Error::NotPrime(q));
        }
        Field::new(p, k)
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn order(&self) -> usize {
        self.0.q
    }

    /// Modulus coefficients, constant term first (monic, degree `k`).
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// The primitive element used for the exp/log tables.
    pub fn generator(&self) -> u8 {
        self.0.generator
    }

    /// Index of the polynomial `x` (the adjoined root). Equals `p` unless `k = 1`.
    pub fn root(&self) -> u8 {
        if self.0.k == 1 {
            0
        } else {
            self.0.p as u8
        }
    }

    pub fn elem(&self, value: u32) -> Result<FieldElem> {
        if value as usize >= self.0.q {
            return Err(Error::ElementOutOfRange { value, q: self.0.q });
        }
        Ok(FieldElem { value: value as u8, field: self.clone() })
    }

    /// Raw element indices `0..q`.
    pub fn values(&self) -> impl Iterator<Item = u8> {
        (0..self.0.q).map(|v| v as u8)
    }

    /// Raw nonzero element indices.
    pub fn nonzero(&self) -> impl Iterator<Item = u8> {
        (1..self.0.q).map(|v| v as u8)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { value: 0, field: self.clone() }
    }

    pub fn one(&self) -> FieldElem {
        FieldElem { value: 1, field: self.clone() }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.0.q).map(move |v| FieldElem { value: v as u8, field: self.clone() })
    }

    /// Canonical embedding of the prime subfield.
    pub fn from_int(&self, v: i64) -> u8 {
        v.rem_euclid(self.0.p as i64) as u8
    }

    /// An `F_p`-basis `1, x, ..., x^{k-1}` as element indices.
    pub fn basis(&self) -> Vec<u8> {
        (0..self.0.k).map(|i| (self.0.p as usize).pow(i) as u8).collect()
    }

    // Raw arithmetic on indices. Callers guarantee the indices are in range.

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.0.add[a as usize * self.0.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        let f = &self.0;
        f.exp[f.log[a as usize] as usize + f.log[b as usize] as usize]
    }

    #[inline]
    pub fn inv(&self, a: u8) -> Result<u8> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let f = &self.0;
        let l = f.log[a as usize] as usize;
        Ok(f.exp[(f.q - 1 - l) % (f.q - 1)])
    }

    pub fn div(&self, a: u8, b: u8) -> Result<u8> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u8, e: u64) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let f = &self.0;
        let l = f.log[a as usize] as u64;
        f.exp[((l * (e % (f.q as u64 - 1))) % (f.q as u64 - 1)) as usize]
    }

    /// `a^(p^i)`, with `i` reduced mod `k`.
    pub fn frobenius(&self, a: u8, i: u32) -> u8 {
        let i = i % self.0.k;
        self.pow(a, (self.0.p as u64).pow(i))
    }

    pub(crate) fn check(&self, v: u8) -> Result<u8> {
        if v as usize >= self.0.q {
            return Err(Error::ElementOutOfRange { value: v as u32, q: self.0.q });
        }
        Ok(v)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.k == other.0.k
    }
}

impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.k.hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.k == 1 {
            write!(f, "F_{}", self.0.p)
        } else {
            write!(f, "F_{}^{}", self.0.p, self.0.k)
        }
    }
}

/// A field element bound to its field; all operations check field identity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u8,
    field: Field,
}

impl FieldElem {
    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn same(&self, other: &FieldElem) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.order(),
                right: other.field.order(),
            });
        }
        Ok(())
    }

    fn wrap(&self, value: u8) -> FieldElem {
        FieldElem { value, field: self.field.clone() }
    }

    pub fn add(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same(other)?;
        Ok(self.wrap(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same(other)?;
        Ok(self.wrap(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &FieldElem) -> Result<FieldElem> {
        self.same(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> FieldElem {
        self.wrap(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElem> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: u64) -> FieldElem {
        self.wrap(self.field.pow(self.value, e))
    }

    pub fn frobenius(&self, i: u32) -> FieldElem {
        self.wrap(self.field.frobenius(self.value, i))
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.value, self.field)
    }
}

//! The unitriangular group `UT(n, F_q)` and the upper-triangular group
//! `T(n, F_q)` that normalizes it.
//!
//! All entry positions are 1-based: `get(i, j)` reads `a_{ij}`.
//! Elements store only the `n(n-1)/2` strictly-upper entries, row-major
//! (`a_12, a_13, ..., a_1n, a_23, ..., a_{n-1,n}`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};

/// Offset of `(i, j)`, `1 <= i < j <= n`, in row-major strictly-upper storage.
#[inline]
pub fn upper_pos(n: usize, i: usize, j: usize) -> usize {
    // Rows 1..i-1 contribute (n-1) + (n-2) + ... + (n-i+1) entries.
    let before = (i - 1) * n - (i - 1) * i / 2;
    before + (j - i - 1)
}

/// Number of strictly-upper entries of an `n x n` matrix.
#[inline]
pub fn upper_len(n: usize) -> usize {
    n * (n - 1) / 2
}

/// An element of `UT(n, F_q)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UTElement {
    n: usize,
    field: Field,
    entries: Vec<u8>,
}

impl UTElement {
    pub fn identity(n: usize, field: &Field) -> Self {
        UTElement { n, field: field.clone(), entries: vec![0; upper_len(n)] }
    }

    pub fn from_entries(n: usize, field: &Field, entries: Vec<u8>) -> Result<Self> {
        if n < 1 {
            return Err(Error::DimensionTooSmall { n, min: 1 });
        }
        if entries.len() != upper_len(n) {
            return Err(Error::WrongLength { expected: upper_len(n), got: entries.len() });
        }
        for &e in &entries {
            field.check(e)?;
        }
        Ok(UTElement { n, field: field.clone(), entries })
    }

    pub(crate) fn from_entries_unchecked(n: usize, field: &Field, entries: Vec<u8>) -> Self {
        debug_assert_eq!(entries.len(), upper_len(n));
        UTElement { n, field: field.clone(), entries }
    }

    /// `t_{ij}(alpha) = e + alpha e_{ij}`.
    pub fn transvection(n: usize, i: usize, j: usize, alpha: &FieldElem) -> Result<Self> {
        Self::transvection_raw(n, alpha.field(), i, j, alpha.value())
    }

    pub fn transvection_raw(n: usize, field: &Field, i: usize, j: usize, alpha: u8) -> Result<Self> {
        if i < 1 || i >= j || j > n {
            return Err(Error::InvalidIndex { i, j, n });
        }
        field.check(alpha)?;
        let mut a = Self::identity(n, field);
        a.entries[upper_pos(n, i, j)] = alpha;
        Ok(a)
    }

    pub(crate) fn t(n: usize, field: &Field, i: usize, j: usize, alpha: u8) -> Self {
        let mut a = Self::identity(n, field);
        a.entries[upper_pos(n, i, j)] = alpha;
        a
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    /// `a_{ij}` as a field index; 1 on the diagonal and 0 below it.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries[upper_pos(self.n, i, j)],
            std::cmp::Ordering::Equal => 1,
            std::cmp::Ordering::Greater => 0,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<FieldElem> {
        if i < 1 || j < 1 || i > self.n || j > self.n {
            return Err(Error::InvalidIndex { i, j, n: self.n });
        }
        self.field.elem(self.get(i, j) as u32)
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: u8) {
        self.entries[upper_pos(self.n, i, j)] = v;
    }

    /// Row `a_{i*}` (length `n`, 1-based `i`).
    pub fn row(&self, i: usize) -> Vec<u8> {
        (1..=self.n).map(|j| self.get(i, j)).collect()
    }

    /// Column `a_{*j}` (length `n`, 1-based `j`).
    pub fn col(&self, j: usize) -> Vec<u8> {
        (1..=self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn compatible(&self, other: &UTElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.order(),
                right: other.field.order(),
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &UTElement) -> Result<UTElement> {
        self.compatible(other)?;
        Ok(self.mul(other))
    }

    /// Product without compatibility checks.
    pub(crate) fn mul(&self, other: &UTElement) -> UTElement {
        let n = self.n;
        let f = &self.field;
        let mut out = vec![0u8; self.entries.len()];
        for i in 1..n {
            for j in i + 1..=n {
                let mut s = f.add(self.get(i, j), other.get(i, j));
                for k in i + 1..j {
                    s = f.add(s, f.mul(self.get(i, k), other.get(k, j)));
                }
                out[upper_pos(n, i, j)] = s;
            }
        }
        UTElement { n, field: f.clone(), entries: out }
    }

    /// Inverse via the Neumann series `sum_{k<n} (e - a)^k`; `e - a` is nilpotent.
    pub fn inverse(&self) -> UTElement {
        let n = self.n;
        let f = &self.field;
        let nil = Dense::identity(n, f).sub(&Dense::from_ut(self));
        let mut acc = Dense::identity(n, f);
        let mut power = Dense::identity(n, f);
        for _ in 1..n {
            power = power.mul(&nil);
            acc = acc.add(&power);
        }
        acc.to_ut().expect("Neumann series of a unitriangular matrix is unitriangular")
    }

    pub fn inverse_view(&self) -> InverseView {
        InverseView::new(self)
    }

    /// `[a, b] = a b a^{-1} b^{-1}`.
    pub fn commutator(&self, other: &UTElement) -> Result<UTElement> {
        self.compatible(other)?;
        Ok(self.comm(other))
    }

    pub(crate) fn comm(&self, other: &UTElement) -> UTElement {
        self.mul(other).mul(&self.inverse()).mul(&other.inverse())
    }

    /// `g a g^{-1}`.
    pub fn conjugate_by(&self, g: &UTElement) -> Result<UTElement> {
        self.compatible(g)?;
        Ok(g.mul(self).mul(&g.inverse()))
    }

    /// Member of the derived subgroup: first superdiagonal vanishes.
    pub fn in_derived(&self) -> bool {
        (1..self.n).all(|i| self.get(i, i + 1) == 0)
    }

    /// First and second superdiagonals vanish (the double-commutator shape).
    pub fn in_second_derived_shape(&self) -> bool {
        self.in_derived() && (1..self.n.saturating_sub(1)).all(|i| self.get(i, i + 2) == 0)
    }

    /// `a = b` modulo the center `{t_{1n}(alpha)}`.
    pub fn center_congruent(&self, other: &UTElement) -> Result<bool> {
        self.compatible(other)?;
        let n = self.n;
        Ok(self.differs_only_at(other, |i, j| i == 1 && j == n))
    }

    /// `a = b` modulo the second center: entries may differ only at
    /// `(1, n-1)`, `(1, n)` and `(2, n)`.
    pub fn second_center_congruent(&self, other: &UTElement) -> Result<bool> {
        self.compatible(other)?;
        let n = self.n;
        Ok(self.differs_only_at(other, |i, j| {
            (i == 1 && j == n - 1) || (i == 1 && j == n) || (i == 2 && j == n)
        }))
    }

    fn differs_only_at(&self, other: &UTElement, allowed: impl Fn(usize, usize) -> bool) -> bool {
        for i in 1..self.n {
            for j in i + 1..=self.n {
                if !allowed(i, j) && self.get(i, j) != other.get(i, j) {
                    return false;
                }
            }
        }
        true
    }

    /// Member of the `m`-th center `C_m`: `a_{ij} = 0` whenever `j - i <= n - 1 - m`.
    ///
    /// The positional form is cross-checked against the recursive quotient
    /// definition in the test suite.
    pub fn higher_center_member(&self, m: usize) -> Result<bool> {
        if m < 1 {
            return Err(Error::Precondition("center level m must be at least 1".into()));
        }
        let n = self.n;
        for i in 1..n {
            for j in i + 1..=n {
                if j - i + m <= n - 1 && self.get(i, j) != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Member of `UP_k`, the block form `(e_k *; 0 e)`: the only nonzero
    /// off-diagonal entries sit in rows `<= k` and columns `> k`.
    pub fn in_up_k(&self, k: usize) -> Result<bool> {
        if k < 1 || k >= self.n {
            return Err(Error::Precondition(format!("UP_k needs 1 <= k < n, got k = {k}")));
        }
        Ok((1..self.n).all(|i| (i + 1..=self.n).all(|j| (i <= k && j > k) || self.get(i, j) == 0)))
    }

    /// Member of `UT_{n-1}`: the last column is the identity column.
    pub fn in_ut_last_col_trivial(&self) -> bool {
        (1..self.n).all(|i| self.get(i, self.n) == 0)
    }

    /// Pads with identity rows and columns to dimension `n2`.
    pub fn embed(&self, n2: usize) -> Result<UTElement> {
        if n2 < self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: n2 });
        }
        let mut out = UTElement::identity(n2, &self.field);
        for i in 1..self.n {
            for j in i + 1..=self.n {
                out.set(i, j, self.get(i, j));
            }
        }
        Ok(out)
    }

    /// Largest index touched by a nonzero off-diagonal entry (0 for the identity).
    pub fn support_dim(&self) -> usize {
        let mut m = 0;
        for i in 1..self.n {
            for j in i + 1..=self.n {
                if self.get(i, j) != 0 {
                    m = m.max(j);
                }
            }
        }
        m
    }

    /// Applies `f` to every strictly-upper entry.
    pub fn map_entries(&self, f: impl Fn(u8) -> u8) -> UTElement {
        UTElement {
            n: self.n,
            field: self.field.clone(),
            entries: self.entries.iter().map(|&e| f(e)).collect(),
        }
    }

    /// Iterates over all of `UT(n, F_q)` in canonical (lexicographic) order.
    pub fn all(n: usize, field: &Field) -> impl Iterator<Item = UTElement> + '_ {
        let len = upper_len(n);
        let q = field.order();
        let total = (q as u128).saturating_pow(len as u32);
        (0..total).map(move |idx| {
            let mut entries = vec![0u8; len];
            let mut rest = idx;
            for slot in entries.iter_mut().rev() {
                *slot = (rest % q as u128) as u8;
                rest /= q as u128;
            }
            UTElement { n, field: field.clone(), entries }
        })
    }

    /// `|UT(n, F_q)| = q^{n(n-1)/2}`, saturating.
    pub fn group_order(n: usize, field: &Field) -> u128 {
        (field.order() as u128).saturating_pow(upper_len(n) as u32)
    }
}

impl fmt::Debug for UTElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UT({}, {:?}){:?}", self.n, self.field, self.entries)
    }
}

/// Entries `a'_{ij}` of `a^{-1}`.
#[derive(Clone, Debug)]
pub struct InverseView {
    source: UTElement,
    inverse: UTElement,
}

impl InverseView {
    pub fn new(source: &UTElement) -> Self {
        let inverse = source.inverse();
        assert!(source.mul(&inverse).is_identity(), "a * a^-1 must be the identity");
        InverseView { source: source.clone(), inverse }
    }

    pub fn source(&self) -> &UTElement {
        &self.source
    }

    pub fn matrix(&self) -> &UTElement {
        &self.inverse
    }

    /// `a'_{ij}`.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.inverse.get(i, j)
    }

    /// `a'_{i*}`.
    pub fn row(&self, i: usize) -> Vec<u8> {
        self.inverse.row(i)
    }

    /// `a'_{*j}`.
    pub fn col(&self, j: usize) -> Vec<u8> {
        self.inverse.col(j)
    }
}

/// An invertible upper-triangular matrix `d * u`, `d` diagonal, `u` unitriangular.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TriangularInvertible {
    diag: Vec<u8>,
    unipotent: UTElement,
}

impl TriangularInvertible {
    pub fn new(diag: Vec<u8>, unipotent: UTElement) -> Result<Self> {
        if diag.len() != unipotent.n() {
            return Err(Error::WrongLength { expected: unipotent.n(), got: diag.len() });
        }
        for &d in &diag {
            unipotent.field().check(d)?;
            if d == 0 {
                return Err(Error::Precondition("diagonal entries must be nonzero".into()));
            }
        }
        Ok(TriangularInvertible { diag, unipotent })
    }

    pub fn identity(n: usize, field: &Field) -> Self {
        TriangularInvertible { diag: vec![1; n], unipotent: UTElement::identity(n, field) }
    }

    pub fn diagonal(diag: Vec<u8>, field: &Field) -> Result<Self> {
        let n = diag.len();
        Self::new(diag, UTElement::identity(n, field))
    }

    pub fn from_unipotent(u: UTElement) -> Self {
        TriangularInvertible { diag: vec![1; u.n()], unipotent: u }
    }

    pub fn n(&self) -> usize {
        self.unipotent.n()
    }

    pub fn field(&self) -> &Field {
        self.unipotent.field()
    }

    pub fn diag(&self) -> &[u8] {
        &self.diag
    }

    pub fn unipotent(&self) -> &UTElement {
        &self.unipotent
    }

    /// `d m d^{-1}`: scales entry `(i, j)` by `d_i / d_j`.
    fn conj_diag(diag: &[u8], m: &UTElement) -> UTElement {
        let f = m.field().clone();
        let n = m.n();
        let mut out = m.clone();
        for i in 1..n {
            for j in i + 1..=n {
                let s = f.mul(diag[i - 1], f.inv(diag[j - 1]).expect("nonzero diagonal"));
                out.set(i, j, f.mul(s, m.get(i, j)));
            }
        }
        out
    }

    /// `t a t^{-1}`.
    pub fn conjugate(&self, a: &UTElement) -> Result<UTElement> {
        self.unipotent.compatible(a)?;
        Ok(self.conj(a))
    }

    pub(crate) fn conj(&self, a: &UTElement) -> UTElement {
        let inner = self.unipotent.mul(a).mul(&self.unipotent.inverse());
        Self::conj_diag(&self.diag, &inner)
    }

    /// `(d u)^{-1} = d^{-1} (d u^{-1} d^{-1})`.
    pub fn inverse(&self) -> TriangularInvertible {
        let f = self.field().clone();
        let inv_diag: Vec<u8> = self.diag.iter().map(|&d| f.inv(d).expect("nonzero")).collect();
        let u = Self::conj_diag(&self.diag, &self.unipotent.inverse());
        TriangularInvertible { diag: inv_diag, unipotent: u }
    }

    /// `(d1 u1)(d2 u2) = (d1 d2)(d2^{-1} u1 d2) u2`.
    pub fn compose(&self, other: &TriangularInvertible) -> Result<TriangularInvertible> {
        self.unipotent.compatible(&other.unipotent)?;
        let f = self.field().clone();
        let diag: Vec<u8> = self.diag.iter().zip(&other.diag).map(|(&a, &b)| f.mul(a, b)).collect();
        let inv2: Vec<u8> = other.diag.iter().map(|&d| f.inv(d).expect("nonzero")).collect();
        let u = Self::conj_diag(&inv2, &self.unipotent).mul(&other.unipotent);
        Ok(TriangularInvertible { diag, unipotent: u })
    }
}

/// A dense `n x n` matrix over `F_q`, used for intermediate expressions such
/// as rank-one updates `e + x y` that appear in commutator identities.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dense {
    n: usize,
    field: Field,
    data: Vec<u8>,
}

impl Dense {
    pub fn zero(n: usize, field: &Field) -> Self {
        Dense { n, field: field.clone(), data: vec![0; n * n] }
    }

    pub fn identity(n: usize, field: &Field) -> Self {
        let mut d = Self::zero(n, field);
        for i in 0..n {
            d.data[i * n + i] = 1;
        }
        d
    }

    pub fn from_ut(a: &UTElement) -> Self {
        let n = a.n();
        let mut d = Self::zero(n, a.field());
        for i in 1..=n {
            for j in 1..=n {
                d.data[(i - 1) * n + (j - 1)] = a.get(i, j);
            }
        }
        d
    }

    /// Column vector `x` times row vector `y` (both length `n`).
    pub fn outer(x: &[u8], y: &[u8], field: &Field) -> Self {
        let n = x.len();
        let mut d = Self::zero(n, field);
        for i in 0..n {
            for j in 0..n {
                d.data[i * n + j] = field.mul(x[i], y[j]);
            }
        }
        d
    }

    /// 1-based access.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[(i - 1) * self.n + (j - 1)]
    }

    pub fn add(&self, other: &Dense) -> Dense {
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Dense { n: self.n, field: f.clone(), data }
    }

    pub fn sub(&self, other: &Dense) -> Dense {
        let f = &self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Dense { n: self.n, field: f.clone(), data }
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let f = &self.field;
        let mut out = Self::zero(n, f);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let idx = i * n + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.data[k * n + j]));
                }
            }
        }
        out
    }

    /// Converts back to `UT(n)` if the matrix is unitriangular.
    pub fn to_ut(&self) -> Option<UTElement> {
        let n = self.n;
        let mut out = UTElement::identity(n, &self.field);
        for i in 1..=n {
            for j in 1..=n {
                let v = self.get(i, j);
                match i.cmp(&j) {
                    std::cmp::Ordering::Greater if v != 0 => return None,
                    std::cmp::Ordering::Equal if v != 1 => return None,
                    std::cmp::Ordering::Less => out.set(i, j, v),
                    _ => {}
                }
            }
        }
        Some(out)
    }
}

/// Canonical JSON form of an element: header `(n, p, k)` plus row-major entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub n: usize,
    pub p: u32,
    pub k: u32,
    pub entries: Vec<u8>,
}

impl From<&UTElement> for ElementJson {
    fn from(a: &UTElement) -> Self {
        ElementJson { n: a.n, p: a.field.p(), k: a.field.k(), entries: a.entries.clone() }
    }
}

impl ElementJson {
    pub fn to_element(&self) -> Result<UTElement> {
        let f = Field::new(self.p, self.k)?;
        UTElement::from_entries(self.n, &f, self.entries.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::new(3, 1).unwrap()
    }

    #[test]
    fn storage_positions() {
        assert_eq!(upper_pos(4, 1, 2), 0);
        assert_eq!(upper_pos(4, 1, 4), 2);
        assert_eq!(upper_pos(4, 2, 3), 3);
        assert_eq!(upper_pos(4, 3, 4), 5);
    }

    #[test]
    fn transvection_basics() {
        let f = f3();
        let t = UTElement::transvection_raw(3, &f, 1, 2, 2).unwrap();
        assert_eq!(t.entries(), &[2, 0, 0]);
        assert!(UTElement::transvection_raw(5, &f, 2, 4, 0).unwrap().is_identity());
        assert!(UTElement::transvection_raw(3, &f, 2, 2, 1).is_err());
        assert!(UTElement::transvection_raw(3, &f, 1, 4, 1).is_err());
        let a = UTElement::t(4, &f, 1, 2, 1);
        let b = UTElement::t(4, &f, 1, 2, 2);
        assert!(a.mul(&b).is_identity());
    }

    #[test]
    fn product_of_adjacent_transvections() {
        let f = f3();
        let p = UTElement::t(3, &f, 1, 2, 1).mul(&UTElement::t(3, &f, 2, 3, 1));
        assert_eq!((p.get(1, 2), p.get(1, 3), p.get(2, 3)), (1, 1, 1));
        let inv = p.inverse();
        assert_eq!(inv.get(1, 3), 0);
        assert!(p.mul(&inv).is_identity());
    }

    #[test]
    fn commutator_examples() {
        let f = Field::new(5, 1).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                let c = UTElement::t(4, &f, 1, 2, a).comm(&UTElement::t(4, &f, 2, 3, b));
                assert_eq!(c, UTElement::t(4, &f, 1, 3, f.mul(a, b)));
                let d = UTElement::t(4, &f, 1, 2, a).comm(&UTElement::t(4, &f, 3, 4, b));
                assert!(d.is_identity());
            }
        }
    }

    #[test]
    fn mismatches_rejected() {
        let a = UTElement::identity(3, &f3());
        let b = UTElement::identity(4, &f3());
        let c = UTElement::identity(3, &Field::new(2, 1).unwrap());
        assert!(a.multiply(&b).is_err());
        assert!(a.multiply(&c).is_err());
        assert!(a.commutator(&c).is_err());
        assert!(UTElement::from_entries(3, &f3(), vec![0, 3, 0]).is_err());
    }

    #[test]
    fn subgroup_predicates() {
        let f = f3();
        let n = 4;
        assert!(UTElement::identity(n, &f).in_derived());
        assert!(!UTElement::t(n, &f, 1, 2, 1).in_derived());
        assert!(UTElement::t(n, &f, 1, 3, 2).in_derived());
        assert!(UTElement::t(n, &f, 1, 4, 2).in_second_derived_shape());
        assert!(!UTElement::t(n, &f, 1, 3, 1).in_second_derived_shape());

        let a = UTElement::t(n, &f, 2, 3, 1).mul(&UTElement::t(n, &f, 1, 2, 2));
        let az = a.mul(&UTElement::t(n, &f, 1, 4, 1));
        assert!(a.center_congruent(&az).unwrap());
        let aw = a.mul(&UTElement::t(n, &f, 2, 4, 1));
        assert!(a.second_center_congruent(&aw).unwrap());
        assert!(!a.center_congruent(&aw).unwrap());
        assert!(!UTElement::identity(3, &f)
            .center_congruent(&UTElement::t(3, &f, 1, 2, 1))
            .unwrap());

        assert!(UTElement::t(n, &f, 1, 4, 1).higher_center_member(1).unwrap());
        assert!(!UTElement::t(n, &f, 1, 2, 1).higher_center_member(1).unwrap());
        assert!(UTElement::higher_center_member(&UTElement::identity(n, &f), 0).is_err());
        for a in UTElement::all(3, &f) {
            assert!(a.higher_center_member(2).unwrap());
        }

        assert!(UTElement::t(n, &f, 1, 4, 1).in_up_k(1).unwrap());
        assert!(!UTElement::t(n, &f, 2, 3, 1).in_up_k(1).unwrap());
        assert!(UTElement::t(n, &f, 2, 3, 1).in_up_k(2).unwrap());
        assert!(!UTElement::t(n, &f, 1, 2, 1).in_up_k(2).unwrap());
        assert!(UTElement::t(n, &f, 2, 3, 1).in_ut_last_col_trivial());
        assert!(!UTElement::t(n, &f, 2, 4, 1).in_ut_last_col_trivial());
    }

    #[test]
    fn embedding() {
        let f = f3();
        assert_eq!(UTElement::identity(3, &f).embed(5).unwrap(), UTElement::identity(5, &f));
        assert_eq!(
            UTElement::t(2, &f, 1, 2, 2).embed(4).unwrap(),
            UTElement::t(4, &f, 1, 2, 2)
        );
        assert!(UTElement::identity(4, &f).embed(3).is_err());
    }

    #[test]
    fn triangular_conjugation_by_diagonal() {
        let f = Field::new(5, 1).unwrap();
        let t = TriangularInvertible::diagonal(vec![2, 3, 4], &f).unwrap();
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            for a in 0..5 {
                let img = t.conj(&UTElement::t(3, &f, i, j, a));
                let s = f.mul(t.diag()[i - 1], f.inv(t.diag()[j - 1]).unwrap());
                assert_eq!(img, UTElement::t(3, &f, i, j, f.mul(s, a)));
            }
        }
        assert!(TriangularInvertible::diagonal(vec![1, 0, 1], &f).is_err());
    }

    #[test]
    fn triangular_inverse_and_compose() {
        let f = Field::new(5, 1).unwrap();
        let u = UTElement::from_entries(3, &f, vec![1, 2, 3]).unwrap();
        let t = TriangularInvertible::new(vec![2, 3, 4], u).unwrap();
        let s = TriangularInvertible::new(vec![1, 4, 2], UTElement::t(3, &f, 2, 3, 1)).unwrap();
        let ts = t.compose(&s).unwrap();
        for a in UTElement::all(3, &f).step_by(7) {
            assert_eq!(t.inverse().conj(&t.conj(&a)), a);
            assert_eq!(ts.conj(&a), t.conj(&s.conj(&a)));
        }
    }
}

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{upper_len, upper_pos, UTElement};

/// Default cap on `|UT(n, F_q)|` for table-based work.
pub const DEFAULT_BOUND: usize = 4096;

/// Element indices into a [`GroupTable`].
pub type Ix = u16;

/// Cayley, inverse and commutator tables of a finite `UT(n, F_q)`.
///
/// Elements are ordered lexicographically by their serialized entries
/// (`a_12` most significant), so the index of an element is its entry vector
/// read as a base-`q` numeral. Index 0 is the identity.
pub struct GroupTable {
    n: usize,
    field: Field,
    order: usize,
    elements: Vec<UTElement>,
    mul: Vec<Ix>,
    inv: Vec<Ix>,
    comm: Vec<Ix>,
    transvections: Vec<Ix>,
    generators: Vec<Ix>,
}

impl GroupTable {
    pub fn build(n: usize, field: &Field) -> Result<Self> {
        Self::build_bounded(n, field, DEFAULT_BOUND)
    }

    pub fn build_bounded(n: usize, field: &Field, bound: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        let order128 = UTElement::group_order(n, field);
        if order128 > bound as u128 || order128 > Ix::MAX as u128 + 1 {
            return Err(Error::OverBound { order: order128, bound });
        }
        let order = order128 as usize;
        let elements: Vec<UTElement> = UTElement::all(n, field).collect();
        debug_assert_eq!(elements.len(), order);

        let q = field.order();
        let encode = |a: &UTElement| -> Ix {
            a.entries().iter().fold(0usize, |acc, &e| acc * q + e as usize) as Ix
        };

        let mut mul = vec![0 as Ix; order * order];
        for (x, a) in elements.iter().enumerate() {
            for (y, b) in elements.iter().enumerate() {
                mul[x * order + y] = encode(&a.mul(b));
            }
        }
        let mut inv = vec![0 as Ix; order];
        for x in 0..order {
            let row = &mul[x * order..(x + 1) * order];
            let y = row.iter().position(|&z| z == 0).expect("every element has an inverse");
            inv[x] = y as Ix;
        }
        let mut comm = vec![0 as Ix; order * order];
        for x in 0..order {
            for y in 0..order {
                let xy = mul[x * order + y] as usize;
                let xiyi = mul[inv[x] as usize * order + inv[y] as usize] as usize;
                comm[x * order + y] = mul[xy * order + xiyi];
            }
        }

        let mut transvections = Vec::new();
        let mut generators = Vec::new();
        for i in 1..n {
            for j in i + 1..=n {
                for alpha in field.nonzero() {
                    let t = UTElement::t(n, field, i, j, alpha);
                    transvections.push(encode(&t));
                }
            }
        }
        for i in 1..n {
            for &b in &field.basis() {
                generators.push(encode(&UTElement::t(n, field, i, i + 1, b)));
            }
        }
        transvections.sort_unstable();

        Ok(GroupTable {
            n,
            field: field.clone(),
            order,
            elements,
            mul,
            inv,
            comm,
            transvections,
            generators,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> &[UTElement] {
        &self.elements
    }

    pub fn element(&self, x: Ix) -> &UTElement {
        &self.elements[x as usize]
    }

    /// Index of `a`; `a` must belong to this group.
    pub fn index_of(&self, a: &UTElement) -> Result<Ix> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: a.n() });
        }
        if a.field() != &self.field {
            return Err(Error::FieldMismatch { left: self.field.order(), right: a.field().order() });
        }
        Ok(self.encode(a.entries()))
    }

    pub(crate) fn encode(&self, entries: &[u8]) -> Ix {
        let q = self.field.order();
        entries.iter().fold(0usize, |acc, &e| acc * q + e as usize) as Ix
    }

    /// Index of `t_{ij}(alpha)`.
    pub fn transvection_index(&self, i: usize, j: usize, alpha: u8) -> Ix {
        let mut e = vec![0u8; upper_len(self.n)];
        e[upper_pos(self.n, i, j)] = alpha;
        self.encode(&e)
    }

    #[inline]
    pub fn mul(&self, x: Ix, y: Ix) -> Ix {
        self.mul[x as usize * self.order + y as usize]
    }

    #[inline]
    pub fn inv(&self, x: Ix) -> Ix {
        self.inv[x as usize]
    }

    #[inline]
    pub fn comm(&self, x: Ix, y: Ix) -> Ix {
        self.comm[x as usize * self.order + y as usize]
    }

    pub fn comm_row(&self, x: Ix) -> &[Ix] {
        &self.comm[x as usize * self.order..(x as usize + 1) * self.order]
    }

    /// Indices of all `t_{ij}(alpha)`, `alpha != 0`, sorted.
    pub fn transvection_indices(&self) -> &[Ix] {
        &self.transvections
    }

    /// `t_{i,i+1}(b)` for `b` in the `F_p`-basis of `F_q`; these generate the group.
    pub fn generator_indices(&self) -> &[Ix] {
        &self.generators
    }

    pub fn identity(&self) -> Ix {
        0
    }

    /// Index of the central element `t_{1n}(gamma)` times `x`.
    pub fn shift_central(&self, x: Ix, gamma: u8) -> Ix {
        let z = self.transvection_index(1, self.n, gamma);
        self.mul(x, z)
    }

    /// Representative of the center coset of `x` (entry `(1, n)` cleared).
    pub fn center_rep(&self, x: Ix) -> Ix {
        let mut e = self.element(x).entries().to_vec();
        e[upper_pos(self.n, 1, self.n)] = 0;
        self.encode(&e)
    }

    /// The `(1, n)` entry of `x`.
    pub fn central_coord(&self, x: Ix) -> u8 {
        self.element(x).get(1, self.n)
    }

    /// Canonical key of the second-center coset of `x`.
    pub fn second_center_rep(&self, x: Ix) -> Ix {
        let n = self.n;
        let mut e = self.element(x).entries().to_vec();
        if n >= 3 {
            e[upper_pos(n, 1, n - 1)] = 0;
            e[upper_pos(n, 2, n)] = 0;
        }
        e[upper_pos(n, 1, n)] = 0;
        self.encode(&e)
    }
}

impl std::fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupTable(UT({}, {:?}), order {})", self.n, self.field, self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        let f2 = Field::new(2, 1).unwrap();
        let f3 = Field::new(3, 1).unwrap();
        assert_eq!(GroupTable::build(3, &f2).unwrap().order(), 8);
        assert_eq!(GroupTable::build(3, &f3).unwrap().order(), 27);
        assert_eq!(GroupTable::build(4, &f2).unwrap().order(), 64);
        assert!(matches!(
            GroupTable::build(5, &f3),
            Err(Error::OverBound { order: 59049, bound: 4096 })
        ));
    }

    #[test]
    fn table_is_a_group() {
        let f = Field::new(3, 1).unwrap();
        let g = GroupTable::build(3, &f).unwrap();
        let n = g.order() as Ix;
        for x in 0..n {
            assert_eq!(g.mul(x, 0), x);
            assert_eq!(g.mul(0, x), x);
            assert_eq!(g.mul(x, g.inv(x)), 0);
            assert_eq!(g.index_of(g.element(x)).unwrap(), x);
            for y in 0..n {
                let c = g.element(x).comm(g.element(y));
                assert_eq!(g.element(g.comm(x, y)), &c);
                for z in 0..n {
                    assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
                }
            }
        }
        assert_eq!(g.transvection_indices().len(), 3 * 2);
        assert_eq!(g.generator_indices().len(), 2);
    }
}

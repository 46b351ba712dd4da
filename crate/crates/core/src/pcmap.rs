//! Commutator-preserving bijections (PC-maps) of `UT(n, F_q)`.
//!
//! A [`PCMap`] is either one of the standard families (quasi-inner, field,
//! graph, central, standard subcentral, permutable), a composition of maps,
//! or an explicit permutation of a [`GroupTable`]. Maps keep their family
//! provenance so compositions stay readable in reports.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::enumerate::table::{GroupTable, Ix, DEFAULT_BOUND};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::matrix::{upper_len, TriangularInvertible, UTElement};

/// Seed used by sampled checks when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0;
/// Pairs drawn by sampled checks by default.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Largest group that whole-group predicates will walk element by element.
pub const WALK_LIMIT: u128 = 1 << 20;

/// `f : UT(n, F) -> F` defining the central map `a -> a t_{1n}(f(a))`.
#[derive(Clone)]
pub enum CentralFunction {
    Zero,
    /// `f(a) = sum_i c_i a_{i,i+1}`.
    Superdiagonal(Vec<u8>),
    /// One value per element of the table, in table order.
    Table { table: Arc<GroupTable>, values: Vec<u8> },
}

impl CentralFunction {
    /// Builds a tabulated central function, rejecting invalid tables.
    pub fn from_table(table: Arc<GroupTable>, values: Vec<u8>) -> Result<Self> {
        if values.len() != table.order() {
            return Err(Error::WrongLength { expected: table.order(), got: values.len() });
        }
        for &v in &values {
            table.field().check(v)?;
        }
        let f = CentralFunction::Table { table, values };
        let (n, field) = match &f {
            CentralFunction::Table { table, .. } => (table.n(), table.field().clone()),
            _ => unreachable!(),
        };
        f.validate(n, &field)?;
        Ok(f)
    }

    pub fn eval(&self, a: &UTElement) -> u8 {
        match self {
            CentralFunction::Zero => 0,
            CentralFunction::Superdiagonal(c) => {
                let f = a.field();
                c.iter()
                    .enumerate()
                    .fold(0, |acc, (i, &ci)| f.add(acc, f.mul(ci, a.get(i + 1, i + 2))))
            }
            CentralFunction::Table { table, values } => {
                values[table.encode(a.entries()) as usize]
            }
        }
    }

    /// Vanishing on the derived subgroup and bijectivity on every center coset.
    pub fn validate(&self, n: usize, field: &Field) -> Result<()> {
        match self {
            CentralFunction::Zero => Ok(()),
            CentralFunction::Superdiagonal(c) => {
                if c.len() != n - 1 {
                    return Err(Error::WrongLength { expected: n - 1, got: c.len() });
                }
                for &v in c {
                    field.check(v)?;
                }
                // For n = 2 the shift gamma -> (1 + c_1) gamma must be invertible.
                if n == 2 && field.add(1, c[0]) == 0 {
                    return Err(Error::InvalidCentralFunction(
                        "gamma -> gamma + f(a t_12(gamma)) is not a bijection".into(),
                    ));
                }
                Ok(())
            }
            CentralFunction::Table { table, values } => {
                if table.n() != n || table.field() != field {
                    return Err(Error::DimensionMismatch { left: table.n(), right: n });
                }
                let q = field.order();
                for (x, a) in table.elements().iter().enumerate() {
                    if a.in_derived() && values[x] != 0 {
                        return Err(Error::InvalidCentralFunction(format!(
                            "f is nonzero on the derived-subgroup element {:?}",
                            a.entries()
                        )));
                    }
                }
                for x in 0..table.order() as Ix {
                    if table.central_coord(x) != 0 {
                        continue;
                    }
                    let mut seen = vec![false; q];
                    for gamma in field.values() {
                        let y = table.shift_central(x, gamma);
                        let img = field.add(gamma, values[y as usize]);
                        if std::mem::replace(&mut seen[img as usize], true) {
                            return Err(Error::InvalidCentralFunction(format!(
                                "the induced map is not injective on the center coset of {:?}",
                                table.element(x).entries()
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn params(&self) -> Vec<u8> {
        match self {
            CentralFunction::Zero => vec![],
            CentralFunction::Superdiagonal(c) => c.clone(),
            CentralFunction::Table { values, .. } => values.clone(),
        }
    }
}

impl std::fmt::Debug for CentralFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CentralFunction::Zero => write!(f, "Zero"),
            CentralFunction::Superdiagonal(c) => write!(f, "Superdiagonal({c:?})"),
            CentralFunction::Table { values, .. } => write!(f, "Table(len {})", values.len()),
        }
    }
}

/// The closed-form map families.
#[derive(Clone, Debug)]
pub enum Family {
    Identity,
    /// Conjugation `a -> t a t^{-1}` by an invertible upper-triangular `t`.
    QuasiInner(TriangularInvertible),
    /// Entrywise Frobenius `x -> x^(p^power)`.
    FieldAut { power: u32 },
    /// `a -> w (a^{-1})^T w`, `w` the side-diagonal permutation matrix.
    Graph,
    /// `a -> a t_{1n}(f(a))`.
    Central(CentralFunction),
    /// `a -> t_{2n}(alpha a_12) a t_{1,n-1}(beta a_{n-1,n})`, `n >= 4`.
    StandardSubcentral { alpha: u8, beta: u8 },
    /// The `n = 3` family acting linearly on `(a_12, a_23)`.
    Permutable { alpha: u8, beta: u8, gamma: u8, delta: u8 },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::QuasiInner(_) => "quasi_inner",
            Family::FieldAut { .. } => "field",
            Family::Graph => "graph",
            Family::Central(_) => "central",
            Family::StandardSubcentral { .. } => "standard_subcentral",
            Family::Permutable { .. } => "permutable",
        }
    }

    fn params(&self) -> Vec<u8> {
        match self {
            Family::Identity | Family::Graph => vec![],
            Family::QuasiInner(t) => {
                let mut v = t.diag().to_vec();
                v.extend_from_slice(t.unipotent().entries());
                v
            }
            Family::FieldAut { power } => vec![*power as u8],
            Family::Central(f) => f.params(),
            Family::StandardSubcentral { alpha, beta } => vec![*alpha, *beta],
            Family::Permutable { alpha, beta, gamma, delta } => vec![*alpha, *beta, *gamma, *delta],
        }
    }
}

/// An explicit bijection of a group table.
#[derive(Clone)]
pub struct MapTable {
    table: Arc<GroupTable>,
    perm: Vec<Ix>,
}

impl MapTable {
    pub fn table(&self) -> &Arc<GroupTable> {
        &self.table
    }

    pub fn perm(&self) -> &[Ix] {
        &self.perm
    }
}

#[derive(Clone)]
enum Backing {
    Family(Family),
    /// `outer . inner`.
    Composite(Box<PCMap>, Box<PCMap>),
    Table(MapTable),
}

/// A total map on `UT(n, F_q)`.
#[derive(Clone)]
pub struct PCMap {
    n: usize,
    field: Field,
    backing: Backing,
}

/// How [`PCMap::is_pc_map`] covers the pair space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PcCheckMode {
    /// Every pair; requires `|G| <= bound`.
    Exhaustive { bound: usize },
    /// `count` random pairs drawn with `seed`.
    Sampled { count: usize, seed: u64 },
}

impl PcCheckMode {
    pub fn exhaustive() -> Self {
        PcCheckMode::Exhaustive { bound: DEFAULT_BOUND }
    }

    pub fn sampled() -> Self {
        PcCheckMode::Sampled { count: DEFAULT_SAMPLES, seed: DEFAULT_SEED }
    }
}

/// Why a map failed the PC test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PcWitness {
    NotInjective { a: Vec<u8>, b: Vec<u8>, image: Vec<u8> },
    CommutatorMismatch { x: Vec<u8>, y: Vec<u8>, image_of_commutator: Vec<u8>, commutator_of_images: Vec<u8> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcCheck {
    pub holds: bool,
    pub pairs_checked: u64,
    pub witness: Option<PcWitness>,
}

impl PCMap {
    fn family(n: usize, field: &Field, fam: Family) -> Self {
        PCMap { n, field: field.clone(), backing: Backing::Family(fam) }
    }

    pub fn identity(n: usize, field: &Field) -> Self {
        Self::family(n, field, Family::Identity)
    }

    pub fn quasi_inner(t: TriangularInvertible) -> Self {
        let (n, field) = (t.n(), t.field().clone());
        Self::family(n, &field, Family::QuasiInner(t))
    }

    pub fn field_aut(n: usize, field: &Field, power: u32) -> Self {
        Self::family(n, field, Family::FieldAut { power: power % field.k() })
    }

    pub fn graph_aut(n: usize, field: &Field) -> Self {
        Self::family(n, field, Family::Graph)
    }

    pub fn central_map(n: usize, field: &Field, f: CentralFunction) -> Result<Self> {
        f.validate(n, field)?;
        Ok(Self::family(n, field, Family::Central(f)))
    }

    pub fn standard_subcentral(n: usize, alpha: &FieldElem, beta: &FieldElem) -> Result<Self> {
        if n < 4 {
            return Err(Error::DimensionTooSmall { n, min: 4 });
        }
        if alpha.field() != beta.field() {
            return Err(Error::FieldMismatch {
                left: alpha.field().order(),
                right: beta.field().order(),
            });
        }
        Ok(Self::family(
            n,
            alpha.field(),
            Family::StandardSubcentral { alpha: alpha.value(), beta: beta.value() },
        ))
    }

    pub fn permutable(
        n: usize,
        alpha: &FieldElem,
        beta: &FieldElem,
        gamma: &FieldElem,
        delta: &FieldElem,
    ) -> Result<Self> {
        if n != 3 {
            return Err(Error::Precondition(format!("permutable maps need n = 3, got n = {n}")));
        }
        let det = alpha.mul(delta)?.sub(&beta.mul(gamma)?)?;
        if det.is_zero() {
            return Err(Error::Precondition("alpha delta - beta gamma must be nonzero".into()));
        }
        Ok(Self::family(
            3,
            alpha.field(),
            Family::Permutable {
                alpha: alpha.value(),
                beta: beta.value(),
                gamma: gamma.value(),
                delta: delta.value(),
            },
        ))
    }

    /// Wraps an explicit permutation of `table`'s element indices.
    pub fn from_table(table: Arc<GroupTable>, perm: Vec<Ix>) -> Result<Self> {
        if perm.len() != table.order() {
            return Err(Error::WrongLength { expected: table.order(), got: perm.len() });
        }
        let mut seen = vec![false; table.order()];
        for &p in &perm {
            if p as usize >= table.order() || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::Precondition("table is not a permutation".into()));
            }
        }
        let (n, field) = (table.n(), table.field().clone());
        Ok(PCMap { n, field, backing: Backing::Table(MapTable { table, perm }) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn as_family(&self) -> Option<&Family> {
        match &self.backing {
            Backing::Family(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_table(&self) -> Option<&MapTable> {
        match &self.backing {
            Backing::Table(t) => Some(t),
            _ => None,
        }
    }

    /// Family tags from outermost to innermost.
    pub fn provenance(&self) -> Vec<String> {
        match &self.backing {
            Backing::Family(f) => vec![f.tag().to_string()],
            Backing::Composite(a, b) => {
                let mut v = a.provenance();
                v.extend(b.provenance());
                v
            }
            Backing::Table(_) => vec!["table".to_string()],
        }
    }

    fn same_domain(&self, other: &PCMap) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch { left: self.field.order(), right: other.field.order() });
        }
        Ok(())
    }

    /// `self . other`, i.e. apply `other` first.
    pub fn compose(&self, other: &PCMap) -> Result<PCMap> {
        self.same_domain(other)?;
        Ok(PCMap {
            n: self.n,
            field: self.field.clone(),
            backing: Backing::Composite(Box::new(self.clone()), Box::new(other.clone())),
        })
    }

    pub fn invert(&self) -> Result<PCMap> {
        let f = &self.field;
        let n = self.n;
        Ok(match &self.backing {
            Backing::Table(t) => {
                let mut inv = vec![0 as Ix; t.perm.len()];
                for (x, &y) in t.perm.iter().enumerate() {
                    inv[y as usize] = x as Ix;
                }
                PCMap::from_table(t.table.clone(), inv)?
            }
            Backing::Composite(a, b) => b.invert()?.compose(&a.invert()?)?,
            Backing::Family(fam) => match fam {
                Family::Identity | Family::Graph => self.clone(),
                Family::QuasiInner(t) => PCMap::quasi_inner(t.inverse()),
                Family::FieldAut { power } => {
                    PCMap::field_aut(n, f, (f.k() - power % f.k()) % f.k())
                }
                Family::StandardSubcentral { alpha, beta } => Self::family(
                    n,
                    f,
                    Family::StandardSubcentral { alpha: f.neg(*alpha), beta: f.neg(*beta) },
                ),
                Family::Permutable { alpha, beta, gamma, delta } => {
                    let det = f.sub(f.mul(*alpha, *delta), f.mul(*beta, *gamma));
                    let di = f.inv(det)?;
                    Self::family(
                        3,
                        f,
                        Family::Permutable {
                            alpha: f.mul(*delta, di),
                            beta: f.mul(f.neg(*beta), di),
                            gamma: f.mul(f.neg(*gamma), di),
                            delta: f.mul(*alpha, di),
                        },
                    )
                }
                Family::Central(cf) => match cf {
                    CentralFunction::Zero => self.clone(),
                    CentralFunction::Superdiagonal(c) if n >= 3 => Self::family(
                        n,
                        f,
                        Family::Central(CentralFunction::Superdiagonal(
                            c.iter().map(|&v| f.neg(v)).collect(),
                        )),
                    ),
                    _ => {
                        // Invert the coset permutation gamma -> gamma + f(x t(gamma)).
                        let table = match cf {
                            CentralFunction::Table { table, .. } => table.clone(),
                            _ => Arc::new(GroupTable::build(n, f)?),
                        };
                        let mut values = vec![0u8; table.order()];
                        for x in 0..table.order() as Ix {
                            if table.central_coord(x) != 0 {
                                continue;
                            }
                            for gamma in f.values() {
                                let y = table.shift_central(x, gamma);
                                let img = f.add(gamma, cf.eval(table.element(y)));
                                let target = table.shift_central(x, img);
                                values[target as usize] = f.sub(gamma, img);
                            }
                        }
                        PCMap::central_map(n, f, CentralFunction::from_table(table, values)?)?
                    }
                },
            },
        })
    }

    /// Image of `a`.
    pub fn apply(&self, a: &UTElement) -> Result<UTElement> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: a.n() });
        }
        if a.field() != &self.field {
            return Err(Error::FieldMismatch { left: self.field.order(), right: a.field().order() });
        }
        Ok(self.apply_unchecked(a))
    }

    pub(crate) fn apply_unchecked(&self, a: &UTElement) -> UTElement {
        let n = self.n;
        let f = &self.field;
        match &self.backing {
            Backing::Table(t) => {
                let x = t.table.encode(a.entries());
                t.table.element(t.perm[x as usize]).clone()
            }
            Backing::Composite(outer, inner) => outer.apply_unchecked(&inner.apply_unchecked(a)),
            Backing::Family(fam) => match fam {
                Family::Identity => a.clone(),
                Family::QuasiInner(t) => t.conj(a),
                Family::FieldAut { power } => a.map_entries(|e| f.frobenius(e, *power)),
                Family::Graph => graph_image(a),
                Family::Central(cf) => {
                    let v = cf.eval(a);
                    let mut out = a.clone();
                    out.set(1, n, f.add(a.get(1, n), v));
                    out
                }
                Family::StandardSubcentral { alpha, beta } => {
                    let left = UTElement::t(n, f, 2, n, f.mul(*alpha, a.get(1, 2)));
                    let right = UTElement::t(n, f, 1, n - 1, f.mul(*beta, a.get(n - 1, n)));
                    left.mul(a).mul(&right)
                }
                Family::Permutable { alpha, beta, gamma, delta } => {
                    let (x, y, z) = (a.get(1, 2), a.get(2, 3), a.get(1, 3));
                    let det = f.sub(f.mul(*alpha, *delta), f.mul(*beta, *gamma));
                    UTElement::from_entries_unchecked(
                        3,
                        f,
                        vec![
                            f.add(f.mul(*alpha, x), f.mul(*beta, y)),
                            f.mul(det, z),
                            f.add(f.mul(*gamma, x), f.mul(*delta, y)),
                        ],
                    )
                }
            },
        }
    }

    /// Image indices of every element of `table`.
    pub fn images(&self, table: &GroupTable) -> Result<Vec<Ix>> {
        if table.n() != self.n || table.field() != &self.field {
            return Err(Error::DimensionMismatch { left: self.n, right: table.n() });
        }
        if let Backing::Table(t) = &self.backing {
            if t.table.order() == table.order() {
                return Ok(t.perm.clone());
            }
        }
        Ok(table
            .elements()
            .par_iter()
            .map(|a| table.encode(self.apply_unchecked(a).entries()))
            .collect())
    }

    /// Tabulates this map over `table`.
    pub fn to_table(&self, table: Arc<GroupTable>) -> Result<PCMap> {
        let perm = self.images(&table)?;
        PCMap::from_table(table, perm)
    }

    /// Tests bijectivity and `phi([x, y]) = [phi(x), phi(y)]`.
    pub fn is_pc_map(&self, mode: PcCheckMode) -> Result<PcCheck> {
        match mode {
            PcCheckMode::Exhaustive { bound } => {
                let table = match &self.backing {
                    Backing::Table(t) => t.table.clone(),
                    _ => Arc::new(GroupTable::build_bounded(self.n, &self.field, bound)?),
                };
                if table.order() > bound {
                    return Err(Error::OverBound { order: table.order() as u128, bound });
                }
                let img = self.images(&table)?;
                Ok(check_table_pc(&table, &img))
            }
            PcCheckMode::Sampled { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut seen = std::collections::HashMap::new();
                for done in 0..count {
                    let x = random_element(self.n, &self.field, &mut rng);
                    let y = random_element(self.n, &self.field, &mut rng);
                    let (px, py) = (self.apply_unchecked(&x), self.apply_unchecked(&y));
                    for (a, pa) in [(&x, &px), (&y, &py)] {
                        if let Some(prev) = seen.insert(pa.clone(), a.clone()) {
                            if &prev != a {
                                return Ok(PcCheck {
                                    holds: false,
                                    pairs_checked: done as u64,
                                    witness: Some(PcWitness::NotInjective {
                                        a: prev.entries().to_vec(),
                                        b: a.entries().to_vec(),
                                        image: pa.entries().to_vec(),
                                    }),
                                });
                            }
                        }
                    }
                    let lhs = self.apply_unchecked(&x.comm(&y));
                    let rhs = px.comm(&py);
                    if lhs != rhs {
                        return Ok(PcCheck {
                            holds: false,
                            pairs_checked: done as u64 + 1,
                            witness: Some(PcWitness::CommutatorMismatch {
                                x: x.entries().to_vec(),
                                y: y.entries().to_vec(),
                                image_of_commutator: lhs.entries().to_vec(),
                                commutator_of_images: rhs.entries().to_vec(),
                            }),
                        });
                    }
                }
                Ok(PcCheck { holds: true, pairs_checked: count as u64, witness: None })
            }
        }
    }

    /// Fixes every transvection `t_{ij}(alpha)`.
    pub fn is_almost_identity(&self) -> bool {
        for i in 1..self.n {
            for j in i + 1..=self.n {
                for alpha in self.field.nonzero() {
                    let t = UTElement::t(self.n, &self.field, i, j, alpha);
                    if self.apply_unchecked(&t) != t {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `phi(a) = a` modulo the center for every `a`.
    pub fn is_central_map(&self) -> Result<bool> {
        self.all_elements_satisfy(|a, b| a.center_congruent(b).unwrap_or(false))
    }

    /// `phi(a) = a` modulo the second center for every `a`.
    pub fn is_subcentral_map(&self) -> Result<bool> {
        self.all_elements_satisfy(|a, b| a.second_center_congruent(b).unwrap_or(false))
    }

    fn all_elements_satisfy(&self, pred: impl Fn(&UTElement, &UTElement) -> bool + Sync) -> Result<bool> {
        let order = UTElement::group_order(self.n, &self.field);
        if order > WALK_LIMIT {
            return Err(Error::OverBound { order, bound: WALK_LIMIT as usize });
        }
        let elems: Vec<UTElement> = UTElement::all(self.n, &self.field).collect();
        Ok(elems.par_iter().all(|a| pred(a, &self.apply_unchecked(a))))
    }

    /// JSON form: tables as `{group, perm}`, families as `{family, params}`,
    /// compositions as `{compose: [outer, inner]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let group = json!({"n": self.n, "p": self.field.p(), "k": self.field.k()});
        match &self.backing {
            Backing::Table(t) => json!({"group": group, "perm": t.perm}),
            Backing::Family(f) => json!({"group": group, "family": f.tag(), "params": f.params()}),
            Backing::Composite(a, b) => json!({"group": group, "compose": [a.to_json(), b.to_json()]}),
        }
    }
}

impl std::fmt::Debug for PCMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PCMap(UT({}, {:?}), {:?})", self.n, self.field, self.provenance())
    }
}

/// Graph automorphism image: `phi(a)_{ij} = a'_{n+1-j, n+1-i}`.
fn graph_image(a: &UTElement) -> UTElement {
    let n = a.n();
    let inv = a.inverse();
    let mut out = UTElement::identity(n, a.field());
    for i in 1..n {
        for j in i + 1..=n {
            out.set(i, j, inv.get(n + 1 - j, n + 1 - i));
        }
    }
    out
}

/// Commutator test for a map family defined in every dimension. Each pair is
/// embedded into the smallest `UT(m, F)` holding both supports plus two spare
/// indices, and `build(m)` supplies the map there.
pub fn is_pc_map_dimension_free(
    build: impl Fn(usize) -> Result<PCMap>,
    pairs: &[(UTElement, UTElement)],
) -> Result<PcCheck> {
    for (done, (x, y)) in pairs.iter().enumerate() {
        let m = x.support_dim().max(y.support_dim()).max(1) + 2;
        let phi = build(m)?;
        let (x, y) = (resize(x, m), resize(y, m));
        let lhs = phi.apply(&x.commutator(&y)?)?;
        let rhs = phi.apply(&x)?.commutator(&phi.apply(&y)?)?;
        if lhs != rhs {
            return Ok(PcCheck {
                holds: false,
                pairs_checked: done as u64 + 1,
                witness: Some(PcWitness::CommutatorMismatch {
                    x: x.entries().to_vec(),
                    y: y.entries().to_vec(),
                    image_of_commutator: lhs.entries().to_vec(),
                    commutator_of_images: rhs.entries().to_vec(),
                }),
            });
        }
    }
    Ok(PcCheck { holds: true, pairs_checked: pairs.len() as u64, witness: None })
}

/// Copy of `a` in `UT(m, F)`; entries outside the leading `m x m` block must be zero.
fn resize(a: &UTElement, m: usize) -> UTElement {
    let mut out = UTElement::identity(m, a.field());
    for i in 1..m.min(a.n()) {
        for j in i + 1..=m.min(a.n()) {
            out.set(i, j, a.get(i, j));
        }
    }
    out
}

pub(crate) fn random_element<R: Rng>(n: usize, field: &Field, rng: &mut R) -> UTElement {
    let q = field.order();
    let entries = (0..upper_len(n)).map(|_| rng.gen_range(0..q) as u8).collect();
    UTElement::from_entries_unchecked(n, field, entries)
}

/// Exhaustive PC test of an image table.
pub fn check_table_pc(table: &GroupTable, img: &[Ix]) -> PcCheck {
    let order = table.order();
    let mut first = vec![Ix::MAX; order];
    for (x, &y) in img.iter().enumerate() {
        if first[y as usize] != Ix::MAX {
            return PcCheck {
                holds: false,
                pairs_checked: 0,
                witness: Some(PcWitness::NotInjective {
                    a: table.element(first[y as usize]).entries().to_vec(),
                    b: table.element(x as Ix).entries().to_vec(),
                    image: table.element(y).entries().to_vec(),
                }),
            };
        }
        first[y as usize] = x as Ix;
    }
    let bad = (0..order).into_par_iter().find_map_first(|x| {
        (0..order).find_map(|y| {
            let lhs = img[table.comm(x as Ix, y as Ix) as usize];
            let rhs = table.comm(img[x], img[y]);
            (lhs != rhs).then_some((x as Ix, y as Ix, lhs, rhs))
        })
    });
    match bad {
        None => PcCheck { holds: true, pairs_checked: (order * order) as u64, witness: None },
        Some((x, y, lhs, rhs)) => PcCheck {
            holds: false,
            pairs_checked: x as u64 * order as u64 + y as u64 + 1,
            witness: Some(PcWitness::CommutatorMismatch {
                x: table.element(x).entries().to_vec(),
                y: table.element(y).entries().to_vec(),
                image_of_commutator: table.element(lhs).entries().to_vec(),
                commutator_of_images: table.element(rhs).entries().to_vec(),
            }),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_free_check() {
        let f = field(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pairs: Vec<_> = (0..40)
            .map(|_| {
                let x = random_element(4, &f, &mut rng).embed(9).unwrap();
                (x, random_element(6, &f, &mut rng))
            })
            .collect();
        let frob = is_pc_map_dimension_free(|m| Ok(PCMap::field_aut(m, &f, 1)), &pairs).unwrap();
        assert!(frob.holds);
        // Swapping t_13(1) and t_14(1) breaks [t_12(1), t_23(1)] = t_13(1).
        let f2 = field(2, 1);
        let bad = |m: usize| {
            let t = Arc::new(GroupTable::build(m, &f2)?);
            let mut perm: Vec<Ix> = (0..t.order() as Ix).collect();
            perm.swap(t.transvection_index(1, 3, 1) as usize, t.transvection_index(1, 4, 1) as usize);
            PCMap::from_table(t, perm)
        };
        let small = vec![(UTElement::t(3, &f2, 1, 2, 1), UTElement::t(3, &f2, 2, 3, 1))];
        assert!(!is_pc_map_dimension_free(bad, &small).unwrap().holds);
    }

    fn field(p: u32, k: u32) -> Field {
        Field::new(p, k).unwrap()
    }

    fn small_domains() -> Vec<(usize, Field)> {
        vec![(3, field(2, 1)), (3, field(3, 1)), (4, field(2, 1))]
    }

    fn assert_pc(phi: &PCMap) {
        let r = phi.is_pc_map(PcCheckMode::exhaustive()).unwrap();
        assert!(r.holds, "{phi:?}: {:?}", r.witness);
    }

    #[test]
    fn identity_is_pc() {
        for (n, f) in small_domains() {
            assert_pc(&PCMap::identity(n, &f));
            assert!(PCMap::identity(n, &f).is_almost_identity());
            assert!(PCMap::identity(n, &f).is_central_map().unwrap());
            assert!(PCMap::identity(n, &f).is_subcentral_map().unwrap());
        }
    }

    #[test]
    fn quasi_inner_family() {
        let f = field(3, 1);
        let id = PCMap::quasi_inner(TriangularInvertible::identity(3, &f));
        for a in UTElement::all(3, &f) {
            assert_eq!(id.apply(&a).unwrap(), a);
        }
        let d = PCMap::quasi_inner(TriangularInvertible::diagonal(vec![1, 2, 1], &f).unwrap());
        assert!(!d.is_almost_identity());
        assert_pc(&d);
        let u = UTElement::from_entries(3, &f, vec![1, 2, 1]).unwrap();
        let inner = PCMap::quasi_inner(TriangularInvertible::from_unipotent(u));
        assert_pc(&inner);
        assert!(inner.is_central_map().unwrap());
        let t = TriangularInvertible::new(vec![2, 1, 2, 1], UTElement::t(4, &field(3, 1), 1, 3, 1)).unwrap();
        let qi = PCMap::quasi_inner(t.clone());
        let back = qi.invert().unwrap().compose(&qi).unwrap();
        for a in UTElement::all(4, &field(3, 1)).step_by(11) {
            assert_eq!(back.apply(&a).unwrap(), a);
        }
    }

    #[test]
    fn field_family() {
        let f4 = field(2, 2);
        let phi = PCMap::field_aut(3, &f4, 1);
        let g = f4.root();
        let t = UTElement::t(3, &f4, 1, 2, g);
        assert_eq!(phi.apply(&t).unwrap(), UTElement::t(3, &f4, 1, 2, f4.add(g, 1)));
        assert_pc(&phi);
        let prime = PCMap::field_aut(3, &field(3, 1), 1);
        for a in UTElement::all(3, &field(3, 1)) {
            assert_eq!(prime.apply(&a).unwrap(), a);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f9 = field(3, 2);
        let phi9 = PCMap::field_aut(4, &f9, 1);
        for _ in 0..200 {
            let a = random_element(4, &f9, &mut rng);
            let b = random_element(4, &f9, &mut rng);
            assert_eq!(phi9.apply(&a.mul(&b)).unwrap(), phi9.apply(&a).unwrap().mul(&phi9.apply(&b).unwrap()));
        }
    }

    #[test]
    fn graph_family() {
        for (n, f) in small_domains() {
            let g = PCMap::graph_aut(n, &f);
            assert_pc(&g);
            assert!(g.apply(&UTElement::identity(n, &f)).unwrap().is_identity());
            let gg = g.compose(&g).unwrap();
            for a in UTElement::all(n, &f) {
                assert_eq!(gg.apply(&a).unwrap(), a);
            }
            for i in 1..n {
                for j in i + 1..=n {
                    for alpha in f.nonzero() {
                        let t = UTElement::t(n, &f, i, j, alpha);
                        let expect = UTElement::t(n, &f, n + 1 - j, n + 1 - i, f.neg(alpha));
                        assert_eq!(g.apply(&t).unwrap(), expect);
                    }
                }
            }
        }
        let f2 = field(2, 1);
        let g4 = PCMap::graph_aut(4, &f2);
        assert!(!g4.is_central_map().unwrap());
        assert!(!g4.is_subcentral_map().unwrap());
    }

    #[test]
    fn central_family() {
        let f = field(3, 1);
        let zero = PCMap::central_map(4, &f, CentralFunction::Zero).unwrap();
        for a in UTElement::all(4, &f).step_by(13) {
            assert_eq!(zero.apply(&a).unwrap(), a);
        }
        // f(a) = a_12 on UT(4, F_3).
        let c = PCMap::central_map(4, &f, CentralFunction::Superdiagonal(vec![1, 0, 0])).unwrap();
        assert_pc(&c);
        assert!(c.is_central_map().unwrap());
        assert!(!c.is_almost_identity());

        let table = Arc::new(GroupTable::build(3, &f).unwrap());
        let mut values = vec![0u8; table.order()];
        let z = table.transvection_index(1, 3, 1);
        values[z as usize] = 1;
        assert!(matches!(
            CentralFunction::from_table(table.clone(), values),
            Err(Error::InvalidCentralFunction(_))
        ));
        // Constant shift 1 on one non-derived coset, zero elsewhere: valid, and
        // fixes every transvection only if the coset avoids them.
        let x = table.transvection_index(1, 2, 1);
        let x = table.mul(x, table.transvection_index(2, 3, 1));
        let mut values = vec![0u8; table.order()];
        for g in 0..3 {
            values[table.shift_central(x, g) as usize] = 1;
        }
        let cf = CentralFunction::from_table(table.clone(), values).unwrap();
        let phi = PCMap::central_map(3, &f, cf).unwrap();
        assert_pc(&phi);
        assert!(phi.is_almost_identity());
        assert!(phi.is_central_map().unwrap());
        let inv = phi.invert().unwrap();
        for a in table.elements() {
            assert_eq!(&inv.apply(&phi.apply(a).unwrap()).unwrap(), a);
        }
        // Non-injective on a coset.
        let mut values = vec![0u8; table.order()];
        values[table.shift_central(x, 0) as usize] = 1;
        assert!(CentralFunction::from_table(table, values).is_err());
        assert!(PCMap::central_map(2, &f, CentralFunction::Superdiagonal(vec![2])).is_err());
    }

    #[test]
    fn central_maps_close_under_composition() {
        let f = field(3, 1);
        let a = PCMap::central_map(4, &f, CentralFunction::Superdiagonal(vec![1, 2, 0])).unwrap();
        let b = PCMap::central_map(4, &f, CentralFunction::Superdiagonal(vec![0, 1, 1])).unwrap();
        let ab = a.compose(&b).unwrap();
        assert!(ab.is_central_map().unwrap());
        assert_pc(&ab);
        assert!(a.invert().unwrap().is_central_map().unwrap());
    }

    #[test]
    fn standard_subcentral_family() {
        let f = field(3, 1);
        let (zero, one, two) = (f.zero(), f.one(), f.elem(2).unwrap());
        assert!(PCMap::standard_subcentral(3, &one, &one).is_err());
        let id = PCMap::standard_subcentral(4, &zero, &zero).unwrap();
        for a in UTElement::all(4, &f).step_by(17) {
            assert_eq!(id.apply(&a).unwrap(), a);
        }
        let phi = PCMap::standard_subcentral(4, &one, &two).unwrap();
        assert_pc(&phi);
        assert!(phi.is_subcentral_map().unwrap());
        let n = 4;
        for i in 1..n {
            for j in i + 1..=n {
                if (i, j) == (1, 2) || (i, j) == (n - 1, n) {
                    continue;
                }
                let t = UTElement::t(n, &f, i, j, 2);
                assert_eq!(phi.apply(&t).unwrap(), t);
            }
        }
        let only_alpha = PCMap::standard_subcentral(4, &one, &zero).unwrap();
        assert!(only_alpha.is_subcentral_map().unwrap());
        assert!(!only_alpha.is_central_map().unwrap());
        let inv = phi.invert().unwrap().compose(&phi).unwrap();
        for a in UTElement::all(4, &f).step_by(5) {
            assert_eq!(inv.apply(&a).unwrap(), a);
        }
        let f2 = field(2, 1);
        let s2 = PCMap::standard_subcentral(4, &f2.one(), &f2.one()).unwrap();
        assert_pc(&s2);
    }

    #[test]
    fn permutable_family() {
        let f = field(3, 1);
        let e = |v| f.elem(v).unwrap();
        let id = PCMap::permutable(3, &e(1), &e(0), &e(0), &e(1)).unwrap();
        for a in UTElement::all(3, &f) {
            assert_eq!(id.apply(&a).unwrap(), a);
        }
        let swap = PCMap::permutable(3, &e(0), &e(1), &e(1), &e(0)).unwrap();
        let a = UTElement::from_entries(3, &f, vec![1, 1, 2]).unwrap();
        // (a12, a13, a23) = (1, 1, 2) -> (2, -1, 1).
        assert_eq!(swap.apply(&a).unwrap().entries(), &[2, 2, 1]);
        assert_pc(&swap);
        assert!(PCMap::permutable(3, &e(1), &e(1), &e(1), &e(1)).is_err());
        assert!(PCMap::permutable(4, &e(1), &e(0), &e(0), &e(1)).is_err());
        let p = PCMap::permutable(3, &e(2), &e(1), &e(1), &e(1)).unwrap();
        assert_pc(&p);
        let back = p.invert().unwrap().compose(&p).unwrap();
        for a in UTElement::all(3, &f) {
            assert_eq!(back.apply(&a).unwrap(), a);
        }
        let f2 = field(2, 1);
        let p2 = PCMap::permutable(3, &f2.one(), &f2.one(), &f2.zero(), &f2.one()).unwrap();
        assert_pc(&p2);
    }

    #[test]
    fn homomorphism_families_on_all_pairs() {
        for (n, f) in small_domains() {
            let table = GroupTable::build(n, &f).unwrap();
            let d: Vec<u8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { (f.order() - 1) as u8 }).collect();
            let u = table.element(table.order() as Ix - 1).clone();
            let maps = [
                PCMap::quasi_inner(TriangularInvertible::new(d, u).unwrap()),
                PCMap::field_aut(n, &f, 1),
                PCMap::graph_aut(n, &f),
            ];
            for phi in &maps {
                let img = phi.images(&table).unwrap();
                for x in 0..table.order() as Ix {
                    for y in 0..table.order() as Ix {
                        assert_eq!(img[table.mul(x, y) as usize], table.mul(img[x as usize], img[y as usize]));
                    }
                }
            }
        }
    }

    #[test]
    fn non_pc_swap_yields_witness() {
        let f = field(3, 1);
        let table = Arc::new(GroupTable::build(3, &f).unwrap());
        let x = table.transvection_index(1, 2, 1);
        let mut perm: Vec<Ix> = (0..table.order() as Ix).collect();
        perm.swap(0, x as usize);
        let phi = PCMap::from_table(table.clone(), perm).unwrap();
        let r = phi.is_pc_map(PcCheckMode::exhaustive()).unwrap();
        assert!(!r.holds);
        assert!(matches!(r.witness, Some(PcWitness::CommutatorMismatch { .. })));
        let s = phi.is_pc_map(PcCheckMode::Sampled { count: 2000, seed: 1 }).unwrap();
        assert!(!s.holds);
        assert!(PCMap::from_table(table, vec![0; 27]).is_err());
    }

    #[test]
    fn exhaustive_mode_respects_bound() {
        let f = field(3, 1);
        let r = PCMap::identity(4, &f).is_pc_map(PcCheckMode::Exhaustive { bound: 100 });
        assert!(matches!(r, Err(Error::OverBound { .. })));
    }

    #[test]
    fn json_forms() {
        let f = field(3, 1);
        let phi = PCMap::standard_subcentral(4, &f.one(), &f.zero()).unwrap();
        let v = phi.to_json();
        assert_eq!(v["family"], "standard_subcentral");
        assert_eq!(v["params"], json!([1, 0]));
        let table = Arc::new(GroupTable::build(3, &f).unwrap());
        let t = PCMap::identity(3, &f).to_table(table).unwrap();
        assert_eq!(t.to_json()["perm"].as_array().unwrap().len(), 27);
    }
}

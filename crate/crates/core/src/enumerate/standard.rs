//! The standard PC-maps of a finite `UT(n, F_q)` as factored sets.
//!
//! Every standard map is an automorphism-like part `M` followed by a central
//! map. For `n >= 4` the part is `graph^g . subcentral(alpha, beta) . quasi_inner . frobenius^i`,
//! for `n = 3` it is `permutable . frobenius^i`, and for `n = 2` it is trivial.
//! Parts that agree modulo the center give the same set `M . Central`, so parts
//! are deduplicated by their images modulo the center.

use std::collections::HashSet;
use std::sync::Arc;

use itertools::Itertools;
use serde::Serialize;

use super::mapset::{MapSet, MapSetBuilder, NodeId};
use super::table::{GroupTable, Ix};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{TriangularInvertible, UTElement};
use crate::pcmap::PCMap;

/// Default cap on the number of automorphism-part parameter tuples.
pub const DEFAULT_PARAM_BUDGET: usize = 2_000_000;

/// Parameters of the non-central part of a standard map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutPart {
    pub graph: bool,
    /// `(alpha, beta)` of the standard subcentral map (`n >= 4`).
    pub subcentral: (u8, u8),
    /// Diagonal of the quasi-inner conjugator, normalized to `d_n = 1`.
    pub diag: Vec<u8>,
    /// Unipotent factor of the quasi-inner conjugator.
    pub unipotent: Vec<u8>,
    pub field_power: u32,
    /// `(alpha, beta, gamma, delta)` of the permutable map (`n = 3`).
    pub permutable: Option<[u8; 4]>,
}

impl AutPart {
    pub fn identity(n: usize, field: &Field) -> Self {
        AutPart {
            graph: false,
            subcentral: (0, 0),
            diag: vec![1; n],
            unipotent: UTElement::identity(n, field).entries().to_vec(),
            field_power: 0,
            permutable: (n == 3).then_some([1, 0, 0, 1]),
        }
    }

    /// The composed map, outermost family first.
    pub fn to_map(&self, n: usize, field: &Field) -> Result<PCMap> {
        let fr = PCMap::field_aut(n, field, self.field_power);
        if n == 2 {
            return Ok(fr);
        }
        if n == 3 {
            let [a, b, c, d] = self.permutable.unwrap_or([1, 0, 0, 1]);
            let e = |v: u8| field.elem(v as u32);
            return PCMap::permutable(3, &e(a)?, &e(b)?, &e(c)?, &e(d)?)?.compose(&fr);
        }
        let u = UTElement::from_entries(n, field, self.unipotent.clone())?;
        let q = PCMap::quasi_inner(TriangularInvertible::new(self.diag.clone(), u)?);
        let s = PCMap::standard_subcentral(
            n,
            &field.elem(self.subcentral.0 as u32)?,
            &field.elem(self.subcentral.1 as u32)?,
        )?;
        let mut m = s.compose(&q)?.compose(&fr)?;
        if self.graph {
            m = PCMap::graph_aut(n, field).compose(&m)?;
        }
        Ok(m)
    }
}

/// Image tables of the building blocks over one group table.
pub(crate) struct FamilyPerms<'a> {
    table: &'a GroupTable,
    frob: Vec<Vec<Ix>>,
    graph: Vec<Ix>,
    x12: Vec<u8>,
    xlast: Vec<u8>,
}

impl<'a> FamilyPerms<'a> {
    pub(crate) fn new(table: &'a GroupTable) -> Result<Self> {
        let (n, f) = (table.n(), table.field());
        let frob = (0..f.k())
            .map(|i| PCMap::field_aut(n, f, i).images(table))
            .collect::<Result<Vec<_>>>()?;
        let graph = PCMap::graph_aut(n, f).images(table)?;
        let x12 = table.elements().iter().map(|a| a.get(1, 2)).collect();
        let xlast = table.elements().iter().map(|a| a.get(n - 1, n)).collect();
        Ok(FamilyPerms { table, frob, graph, x12, xlast })
    }

    pub(crate) fn frob(&self, i: u32) -> &[Ix] {
        &self.frob[i as usize]
    }

    pub(crate) fn graph(&self) -> &[Ix] {
        &self.graph
    }

    pub(crate) fn diag(&self, d: &[u8]) -> Result<Vec<Ix>> {
        let f = self.table.field();
        PCMap::quasi_inner(TriangularInvertible::diagonal(d.to_vec(), f)?).images(self.table)
    }

    pub(crate) fn inner(&self, u: Ix) -> Vec<Ix> {
        let t = self.table;
        let ui = t.inv(u);
        (0..t.order() as Ix).map(|x| t.mul(t.mul(u, x), ui)).collect()
    }

    pub(crate) fn subcentral(&self, alpha: u8, beta: u8) -> Vec<Ix> {
        let t = self.table;
        let (n, f) = (t.n(), t.field());
        (0..t.order() as Ix)
            .map(|x| {
                let l = t.transvection_index(2, n, f.mul(alpha, self.x12[x as usize]));
                let r = t.transvection_index(1, n - 1, f.mul(beta, self.xlast[x as usize]));
                t.mul(t.mul(l, x), r)
            })
            .collect()
    }
}

/// Every automorphism-part parameter tuple, in a fixed order, with its image table.
pub(crate) fn aut_parts(table: &GroupTable, budget: usize) -> Result<Vec<(AutPart, Vec<Ix>)>> {
    let (n, f) = (table.n(), table.field());
    let fp = FamilyPerms::new(table)?;
    let mut out = Vec::new();
    match n {
        2 => {
            for i in 0..f.k() {
                let mut part = AutPart::identity(n, f);
                part.field_power = i;
                out.push((part, fp.frob(i).to_vec()));
            }
        }
        3 => {
            let units: Vec<[u8; 4]> = (0..4)
                .map(|_| f.values().collect::<Vec<_>>())
                .multi_cartesian_product()
                .map(|v| [v[0], v[1], v[2], v[3]])
                .filter(|[a, b, c, d]| f.sub(f.mul(*a, *d), f.mul(*b, *c)) != 0)
                .collect();
            if units.len() * f.k() as usize > budget {
                return Err(Error::Precondition(format!("{} parameter tuples exceed the budget", units.len())));
            }
            for i in 0..f.k() {
                for p in &units {
                    let mut part = AutPart::identity(n, f);
                    part.field_power = i;
                    part.permutable = Some(*p);
                    let m = part.to_map(n, f)?;
                    out.push((part, m.images(table)?));
                }
            }
        }
        _ => {
            let diags: Vec<Vec<u8>> = (0..n - 1)
                .map(|_| f.nonzero().collect::<Vec<_>>())
                .multi_cartesian_product()
                .map(|mut d| {
                    d.push(1);
                    d
                })
                .collect();
            let corner = crate::matrix::upper_pos(n, 1, n);
            let unis: Vec<Ix> = (0..table.order() as Ix)
                .filter(|&x| table.element(x).entries()[corner] == 0)
                .collect();
            let q = f.order();
            let total = 2 * q * q * diags.len() * unis.len() * f.k() as usize;
            if total > budget {
                return Err(Error::Precondition(format!(
                    "{total} parameter tuples exceed the budget of {budget}"
                )));
            }
            let diag_perms: Vec<Vec<Ix>> = diags.iter().map(|d| fp.diag(d)).collect::<Result<_>>()?;
            let inner_perms: Vec<Vec<Ix>> = unis.iter().map(|&u| fp.inner(u)).collect();
            let sub_perms: Vec<((u8, u8), Vec<Ix>)> = f
                .values()
                .cartesian_product(f.values().collect::<Vec<_>>())
                .map(|(a, b)| ((a, b), fp.subcentral(a, b)))
                .collect();
            for graph in [false, true] {
                for ((a, b), sp) in &sub_perms {
                    for (d, dp) in diags.iter().zip(&diag_perms) {
                        for (&u, ip) in unis.iter().zip(&inner_perms) {
                            for i in 0..f.k() {
                                let fr = fp.frob(i);
                                let img: Vec<Ix> = (0..table.order())
                                    .map(|x| {
                                        let y = sp[dp[ip[fr[x] as usize] as usize] as usize];
                                        if graph {
                                            fp.graph()[y as usize]
                                        } else {
                                            y
                                        }
                                    })
                                    .collect();
                                let part = AutPart {
                                    graph,
                                    subcentral: (*a, *b),
                                    diag: d.clone(),
                                    unipotent: table.element(u).entries().to_vec(),
                                    field_power: i,
                                    permutable: None,
                                };
                                out.push((part, img));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Center-coset representatives (entry `(1, n)` zero), in index order.
pub(crate) fn coset_reps(table: &GroupTable) -> Vec<Ix> {
    (0..table.order() as Ix).filter(|&x| table.central_coord(x) == 0).collect()
}

/// `M . Central` for one part `m`, with the central part trivial on `extra_fixed`.
///
/// Within the center coset of `r` the central map acts as `r t(gamma) -> r t(pi(gamma))`
/// for a permutation `pi` of `F` fixing every `gamma` with `r t(gamma)` derived.
fn central_product(
    table: &GroupTable,
    m: &[Ix],
    extra_fixed: &dyn Fn(Ix) -> bool,
    b: &mut MapSetBuilder,
) -> NodeId {
    let f = table.field();
    let mut kids = Vec::new();
    for r in coset_reps(table) {
        let members: Vec<Ix> = f.values().map(|g| table.shift_central(r, g)).collect();
        let pinned: Vec<bool> = members
            .iter()
            .map(|&x| table.element(x).in_derived() || extra_fixed(x))
            .collect();
        let free: Vec<u8> = f.values().filter(|&g| !pinned[g as usize]).collect();
        let mut leaves = Vec::new();
        for perm in free.iter().copied().permutations(free.len()) {
            let mut pi: Vec<u8> = f.values().collect();
            for (&g, &h) in free.iter().zip(&perm) {
                pi[g as usize] = h;
            }
            let pairs: Vec<(Ix, Ix)> =
                members.iter().zip(&pi).map(|(&x, &h)| (x, m[members[h as usize] as usize])).collect();
            leaves.push(b.leaf(pairs));
        }
        kids.push(b.union(leaves));
    }
    b.product(kids)
}

/// Every valid central map; with `fix_transvections` only those fixing every transvection.
pub fn central_set(table: Arc<GroupTable>, fix_transvections: bool) -> MapSet {
    let mut b = MapSetBuilder::new();
    let id: Vec<Ix> = (0..table.order() as Ix).collect();
    let trans: HashSet<Ix> = table.transvection_indices().iter().copied().collect();
    let fixed = move |x: Ix| fix_transvections && trans.contains(&x);
    let root = central_product(&table, &id, &fixed, &mut b);
    b.finish(table, root)
}

/// Summary of a standard-set construction.
#[derive(Clone, Debug)]
pub struct StandardSet {
    pub set: MapSet,
    /// Parameter tuples tried.
    pub parameters: usize,
    /// Distinct parts modulo the center, with a representative tuple each.
    pub classes: Vec<AutPart>,
}

/// The set of all compositions of standard families with a central map.
pub fn generate_standard_set(table: Arc<GroupTable>, budget: usize) -> Result<StandardSet> {
    let parts = aut_parts(&table, budget)?;
    let reps = coset_reps(&table);
    let mut seen: HashSet<Vec<Ix>> = HashSet::new();
    let mut b = MapSetBuilder::new();
    let mut classes = Vec::new();
    let mut kids = Vec::new();
    let never = |_: Ix| false;
    for (part, img) in &parts {
        let key: Vec<Ix> = reps.iter().map(|&r| table.center_rep(img[r as usize])).collect();
        if !seen.insert(key) {
            continue;
        }
        kids.push(central_product(&table, img, &never, &mut b));
        classes.push(part.clone());
    }
    let root = b.union(kids);
    let root = if classes.is_empty() { b.empty() } else { root };
    Ok(StandardSet { set: b.finish(table, root), parameters: parts.len(), classes })
}

/// An inner automorphism `c` and a standard subcentral map `s` such that
/// `c . s . c^{-1}` is not a standard subcentral map.
///
/// The conjugate always agrees with `s` modulo the center, so the witness
/// compares exact tables.
#[derive(Clone, Debug, Serialize)]
pub struct NonNormalityWitness {
    pub conjugator: Vec<u8>,
    pub subcentral: (u8, u8),
}

/// Searches for a witness that standard subcentral maps are not normalized by inner automorphisms.
pub fn find_subcentral_non_normality_witness(table: &GroupTable) -> Result<Option<NonNormalityWitness>> {
    let n = table.n();
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    let f = table.field();
    let fp = FamilyPerms::new(table)?;
    let subs: Vec<((u8, u8), Vec<Ix>)> = f
        .values()
        .cartesian_product(f.values().collect::<Vec<_>>())
        .map(|(a, b)| ((a, b), fp.subcentral(a, b)))
        .collect();
    let tables: HashSet<&Vec<Ix>> = subs.iter().map(|(_, p)| p).collect();
    for u in 0..table.order() as Ix {
        let inn = fp.inner(u);
        let inn_inv = fp.inner(table.inv(u));
        for ((a, b), sp) in &subs {
            let conj: Vec<Ix> = (0..table.order()).map(|x| inn[sp[inn_inv[x] as usize] as usize]).collect();
            if !tables.contains(&conj) {
                return Ok(Some(NonNormalityWitness {
                    conjugator: table.element(u).entries().to_vec(),
                    subcentral: (*a, *b),
                }));
            }
        }
    }
    Ok(None)
}

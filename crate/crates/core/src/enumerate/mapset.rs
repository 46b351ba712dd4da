//! Factored sets of maps on a group table.
//!
//! A [`MapSet`] is a tree of nodes over the element indices of a
//! [`GroupTable`]. A `Leaf` fixes a few images, a `Product` combines children
//! over disjoint variables, and a `Union` combines disjoint children over the
//! same variables. Sets with astronomically many members (every central map of
//! `UT(4, F_3)`, say) stay small this way and can still be counted exactly,
//! compared, sampled and expanded.

use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use rand::Rng;

use super::table::{GroupTable, Ix};

pub type NodeId = u32;

/// `2^61 - 1`.
const P61: u64 = (1 << 61) - 1;

#[derive(Clone, Debug)]
pub enum Node {
    Leaf(Vec<(Ix, Ix)>),
    Product(Vec<NodeId>),
    Union(Vec<NodeId>),
}

#[derive(Clone)]
pub struct MapSet {
    table: Arc<GroupTable>,
    nodes: Vec<Node>,
    root: NodeId,
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P61 as u128) as u64
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pseudo-random weight of the assignment `x -> v`, in `[1, P61)`.
fn weight(seed: u64, x: Ix, v: Ix) -> u64 {
    let h = splitmix(seed ^ splitmix(((x as u64) << 20) | v as u64));
    h % (P61 - 1) + 1
}

/// Builds [`MapSet`] trees node by node.
pub struct MapSetBuilder {
    nodes: Vec<Node>,
}

impl Default for MapSetBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl MapSetBuilder {
    pub fn new() -> Self {
        MapSetBuilder { nodes: Vec::new() }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        (self.nodes.len() - 1) as NodeId
    }

    pub fn leaf(&mut self, mut pairs: Vec<(Ix, Ix)>) -> NodeId {
        pairs.sort_unstable();
        self.push(Node::Leaf(pairs))
    }

    pub fn product(&mut self, children: Vec<NodeId>) -> NodeId {
        if children.len() == 1 {
            return children[0];
        }
        self.push(Node::Product(children))
    }

    /// Children must be pairwise disjoint and cover the same variables.
    pub fn union(&mut self, children: Vec<NodeId>) -> NodeId {
        if children.len() == 1 {
            return children[0];
        }
        self.push(Node::Union(children))
    }

    pub fn empty(&mut self) -> NodeId {
        self.push(Node::Union(Vec::new()))
    }

    pub fn finish(self, table: Arc<GroupTable>, root: NodeId) -> MapSet {
        MapSet { table, nodes: self.nodes, root }
    }
}

impl MapSet {
    /// The set holding exactly the given tables.
    pub fn from_tables(table: Arc<GroupTable>, tables: &[Vec<Ix>]) -> MapSet {
        let mut b = MapSetBuilder::new();
        let mut sorted: Vec<&Vec<Ix>> = tables.iter().collect();
        sorted.sort();
        sorted.dedup();
        let leaves = sorted
            .into_iter()
            .map(|t| b.leaf(t.iter().enumerate().map(|(x, &v)| (x as Ix, v)).collect()))
            .collect();
        let root = b.push(Node::Union(leaves));
        b.finish(table, root)
    }

    pub fn table(&self) -> &Arc<GroupTable> {
        &self.table
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn post_order(&self) -> Vec<NodeId> {
        // Children are always created before their parents.
        (0..=self.root).collect()
    }

    fn counts(&self) -> Vec<BigUint> {
        let mut c: Vec<BigUint> = Vec::with_capacity(self.nodes.len());
        for id in self.post_order() {
            let v = match &self.nodes[id as usize] {
                Node::Leaf(_) => BigUint::from(1u32),
                Node::Product(ch) => ch.iter().fold(BigUint::from(1u32), |acc, &k| acc * &c[k as usize]),
                Node::Union(ch) => ch.iter().fold(BigUint::from(0u32), |acc, &k| acc + &c[k as usize]),
            };
            c.push(v);
        }
        c
    }

    /// Exact number of maps in the set.
    pub fn count(&self) -> BigUint {
        self.counts()[self.root as usize].clone()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == BigUint::from(0u32)
    }

    /// `sum over maps s of prod_x w(x, s(x))` modulo `2^61 - 1`.
    ///
    /// Equal sets give equal fingerprints for every seed; distinct sets collide
    /// for a random seed with probability at most `|G| / 2^61`.
    pub fn fingerprint(&self, seed: u64) -> u64 {
        let mut f: Vec<u64> = Vec::with_capacity(self.nodes.len());
        for id in self.post_order() {
            let v = match &self.nodes[id as usize] {
                Node::Leaf(pairs) => pairs.iter().fold(1, |acc, &(x, v)| mulmod(acc, weight(seed, x, v))),
                Node::Product(ch) => ch.iter().fold(1, |acc, &k| mulmod(acc, f[k as usize])),
                Node::Union(ch) => ch.iter().fold(0, |acc, &k| addmod(acc, f[k as usize])),
            };
            f.push(v);
        }
        f[self.root as usize]
    }

    /// Membership of a full image table.
    pub fn contains(&self, perm: &[Ix]) -> bool {
        perm.len() == self.table.order() && self.contains_node(self.root, perm)
    }

    fn contains_node(&self, id: NodeId, perm: &[Ix]) -> bool {
        match &self.nodes[id as usize] {
            Node::Leaf(pairs) => pairs.iter().all(|&(x, v)| perm[x as usize] == v),
            Node::Product(ch) => ch.iter().all(|&k| self.contains_node(k, perm)),
            Node::Union(ch) => ch.iter().any(|&k| self.contains_node(k, perm)),
        }
    }

    /// A uniformly random member, or `None` for the empty set.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<Vec<Ix>> {
        let counts = self.counts();
        if counts[self.root as usize] == BigUint::from(0u32) {
            return None;
        }
        let mut out = vec![Ix::MAX; self.table.order()];
        self.sample_node(self.root, &counts, rng, &mut out);
        Some(out)
    }

    fn sample_node<R: Rng>(&self, id: NodeId, counts: &[BigUint], rng: &mut R, out: &mut [Ix]) {
        match &self.nodes[id as usize] {
            Node::Leaf(pairs) => {
                for &(x, v) in pairs {
                    out[x as usize] = v;
                }
            }
            Node::Product(ch) => {
                for &k in ch {
                    self.sample_node(k, counts, rng, out);
                }
            }
            Node::Union(ch) => {
                let total = &counts[id as usize];
                let mut r = rng.gen_biguint_below(total);
                for &k in ch {
                    let c = &counts[k as usize];
                    if &r < c {
                        return self.sample_node(k, counts, rng, out);
                    }
                    r -= c;
                }
                unreachable!("union counts are consistent");
            }
        }
    }

    /// Up to `limit` members in structural order.
    pub fn expand(&self, limit: usize) -> Vec<Vec<Ix>> {
        let order = self.table.order();
        self.expand_node(self.root, limit)
            .into_iter()
            .map(|pairs| {
                let mut t = vec![Ix::MAX; order];
                for (x, v) in pairs {
                    t[x as usize] = v;
                }
                t
            })
            .collect()
    }

    fn expand_node(&self, id: NodeId, limit: usize) -> Vec<Vec<(Ix, Ix)>> {
        if limit == 0 {
            return Vec::new();
        }
        match &self.nodes[id as usize] {
            Node::Leaf(pairs) => vec![pairs.clone()],
            Node::Product(ch) => {
                let mut acc: Vec<Vec<(Ix, Ix)>> = vec![Vec::new()];
                for &k in ch {
                    let part = self.expand_node(k, limit);
                    let mut next = Vec::new();
                    'outer: for a in &acc {
                        for b in &part {
                            if next.len() == limit {
                                break 'outer;
                            }
                            let mut m = a.clone();
                            m.extend_from_slice(b);
                            next.push(m);
                        }
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            Node::Union(ch) => {
                let mut out = Vec::new();
                for &k in ch {
                    if out.len() == limit {
                        break;
                    }
                    out.extend(self.expand_node(k, limit - out.len()));
                }
                out
            }
        }
    }

    /// Every member, sorted; only sensible for small sets.
    pub fn to_sorted_tables(&self) -> Vec<Vec<Ix>> {
        let mut t = self.expand(usize::MAX);
        t.sort_unstable();
        t
    }

    /// Keeps the members with `keep(x, phi(x))` for every `x`.
    pub fn restrict(&self, keep: impl Fn(Ix, Ix) -> bool) -> MapSet {
        let mut b = MapSetBuilder::new();
        let mut map: Vec<Option<NodeId>> = Vec::with_capacity(self.nodes.len());
        for id in self.post_order() {
            let new = match &self.nodes[id as usize] {
                Node::Leaf(pairs) => {
                    if pairs.iter().all(|&(x, v)| keep(x, v)) {
                        Some(b.push(Node::Leaf(pairs.clone())))
                    } else {
                        None
                    }
                }
                Node::Product(ch) => {
                    let kids: Option<Vec<NodeId>> = ch.iter().map(|&k| map[k as usize]).collect();
                    kids.map(|k| b.push(Node::Product(k)))
                }
                Node::Union(ch) => {
                    let kids: Vec<NodeId> = ch.iter().filter_map(|&k| map[k as usize]).collect();
                    (!kids.is_empty()).then(|| b.push(Node::Union(kids)))
                }
            };
            map.push(new);
        }
        let root = match map[self.root as usize] {
            Some(r) => r,
            None => b.empty(),
        };
        b.finish(self.table.clone(), root)
    }

    /// The images `v` that some member assigns to `x`, for every `x`.
    pub fn support(&self) -> Vec<Vec<Ix>> {
        let pruned = self.restrict(|_, _| true);
        let mut sup = vec![Vec::new(); self.table.order()];
        if pruned.is_empty() {
            return sup;
        }
        let mut stack = vec![pruned.root];
        let mut seen = vec![false; pruned.nodes.len()];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id as usize], true) {
                continue;
            }
            match &pruned.nodes[id as usize] {
                Node::Leaf(pairs) => {
                    for &(x, v) in pairs {
                        sup[x as usize].push(v);
                    }
                }
                Node::Product(ch) | Node::Union(ch) => stack.extend(ch),
            }
        }
        for s in &mut sup {
            s.sort_unstable();
            s.dedup();
        }
        sup
    }
}

impl std::fmt::Debug for MapSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MapSet({:?}, {} nodes, count {})", self.table, self.nodes.len(), self.count())
    }
}

//! Exhaustive search for PC-maps of a finite group table.
//!
//! Variables are the images `phi(x)`, one per element. Domains start from a
//! color refinement of the structure `(G, [., .])` and shrink by propagation of
//! `phi([x, y]) = [phi(x), phi(y)]` and bijectivity. After each branch the
//! unassigned variables are split into independent components; each component is
//! searched on its own and the results are combined as a [`MapSet`] product, so
//! the output stays factored even when the solution count is astronomical.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::mapset::{MapSet, MapSetBuilder, NodeId};
use super::table::{GroupTable, Ix};
use crate::error::{Error, Result};

/// Default limit on branching nodes.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Optional pre-assignment applied before the search starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    None,
    /// Every transvection is fixed.
    AlmostIdentity,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Branching nodes explored.
    pub nodes: u64,
    /// Color classes after the root refinement.
    pub colors: usize,
    /// Independent components at the root.
    pub root_components: usize,
    /// Variables assigned by root propagation alone.
    pub root_assigned: usize,
}

/// Result of a completed search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub set: MapSet,
    pub stats: SearchStats,
}

/// Enumerates every PC-map of `table`, optionally fixing all transvections.
///
/// Returns [`Error::BudgetExceeded`] rather than a partial set when the search
/// needs more than `budget` branching nodes.
pub fn enumerate_pc_maps(table: Arc<GroupTable>, constraint: Constraint, budget: u64) -> Result<SearchOutcome> {
    let mut search = Search::new(&table, budget);
    let mut fixed = vec![table.identity()];
    if constraint == Constraint::AlmostIdentity {
        fixed.extend_from_slice(table.transvection_indices());
    }
    let colors = refine_colors(&table, &fixed);
    let ncolors = colors.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut builder = MapSetBuilder::new();

    let mut state = State::new(table.order());
    let mut by_color: HashMap<u32, Vec<u64>> = HashMap::new();
    for (s, &c) in colors.iter().enumerate() {
        let words = by_color.entry(c).or_insert_with(|| vec![0u64; state.w]);
        words[s / 64] |= 1 << (s % 64);
    }
    for (x, c) in colors.iter().enumerate() {
        state.dom_mut(x as Ix).copy_from_slice(&by_color[c]);
        state.size[x] = by_color[c].iter().map(|w| w.count_ones()).sum::<u32>() as u16;
    }
    let mut queue = VecDeque::new();
    for x in 0..table.order() {
        if state.size[x] == 1 {
            queue.push_back(x as Ix);
        }
    }
    let root = if search.propagate(&mut state, queue) {
        let assigned: Vec<(Ix, Ix)> = (0..table.order() as Ix)
            .filter(|&x| state.value(x).is_some())
            .map(|x| (x, state.value(x).unwrap()))
            .collect();
        search.stats.root_assigned = assigned.len();
        let rest: Vec<Ix> = (0..table.order() as Ix).filter(|&x| state.value(x).is_none()).collect();
        let comps = search.components(&state, &rest);
        search.stats.root_components = comps.len();
        let mut kids = vec![builder.leaf(assigned)];
        let mut ok = true;
        for comp in comps {
            match search.solve(&state, &comp, &mut builder)? {
                Some(id) => kids.push(id),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            builder.product(kids)
        } else {
            builder.empty()
        }
    } else {
        builder.empty()
    };
    search.stats.colors = ncolors;
    Ok(SearchOutcome { set: builder.finish(table.clone(), root), stats: search.stats })
}

/// Stable coloring of the elements under the ternary relation `z = [x, y]`,
/// with the elements of `fixed` individualized.
///
/// Every PC-map fixing `fixed` pointwise preserves the resulting colors, so
/// `phi(x)` may be restricted to the color class of `x`.
pub fn refine_colors(table: &GroupTable, fixed: &[Ix]) -> Vec<u32> {
    let n = table.order();
    let mut colors = vec![0u32; n];
    let mut sorted_fixed = fixed.to_vec();
    sorted_fixed.sort_unstable();
    sorted_fixed.dedup();
    for (i, &x) in sorted_fixed.iter().enumerate() {
        colors[x as usize] = i as u32 + 1;
    }
    let mut count = renumber(&mut colors);
    loop {
        let c = &colors;
        let h = |a: u32, b: u32, tag: u64| mix(tag ^ ((a as u64) << 32 | b as u64));
        let rows: Vec<(u64, u64)> = (0..n)
            .into_par_iter()
            .map(|x| {
                let row = table.comm_row(x as Ix);
                let mut r = 0u64;
                let mut col = 0u64;
                for y in 0..n {
                    r = r.wrapping_add(h(c[y], c[row[y] as usize], 1));
                    col = col.wrapping_add(h(c[y], c[table.comm(y as Ix, x as Ix) as usize], 2));
                }
                (r, col)
            })
            .collect();
        let outs: Vec<u64> = (0..n)
            .into_par_iter()
            .fold(
                || vec![0u64; n],
                |mut acc, x| {
                    let row = table.comm_row(x as Ix);
                    for y in 0..n {
                        let z = row[y] as usize;
                        acc[z] = acc[z].wrapping_add(h(c[x], c[y], 3));
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    for (u, v) in a.iter_mut().zip(b) {
                        *u = u.wrapping_add(v);
                    }
                    a
                },
            );
        let sig: Vec<(u32, u64, u64, u64)> = (0..n).map(|x| (c[x], rows[x].0, rows[x].1, outs[x])).collect();
        let mut keys = sig.clone();
        keys.sort_unstable();
        keys.dedup();
        let next: Vec<u32> = sig.iter().map(|s| keys.binary_search(s).unwrap() as u32).collect();
        let new_count = keys.len();
        colors = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    colors
}

fn renumber(colors: &mut [u32]) -> usize {
    let mut keys = colors.to_vec();
    keys.sort_unstable();
    keys.dedup();
    for c in colors.iter_mut() {
        *c = keys.binary_search(c).unwrap() as u32;
    }
    keys.len()
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const UNSET: Ix = Ix::MAX;

#[derive(Clone)]
struct State {
    w: usize,
    dom: Vec<u64>,
    size: Vec<u16>,
    val: Vec<Ix>,
    /// Assigned variables in assignment order.
    assigned: Vec<Ix>,
}

impl State {
    fn new(n: usize) -> Self {
        let w = n.div_ceil(64);
        State { w, dom: vec![0; n * w], size: vec![0; n], val: vec![UNSET; n], assigned: Vec::new() }
    }

    fn dom(&self, x: Ix) -> &[u64] {
        &self.dom[x as usize * self.w..(x as usize + 1) * self.w]
    }

    fn dom_mut(&mut self, x: Ix) -> &mut [u64] {
        let w = self.w;
        &mut self.dom[x as usize * w..(x as usize + 1) * w]
    }

    fn value(&self, x: Ix) -> Option<Ix> {
        (self.val[x as usize] != UNSET).then_some(self.val[x as usize])
    }

    fn has(&self, x: Ix, v: Ix) -> bool {
        self.dom(x)[v as usize / 64] >> (v % 64) & 1 == 1
    }

    fn values(&self, x: Ix) -> Vec<Ix> {
        bits(self.dom(x)).collect()
    }

    fn single(&self, x: Ix) -> Ix {
        bits(self.dom(x)).next().expect("nonempty domain")
    }
}

fn bits(words: &[u64]) -> impl Iterator<Item = Ix> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros();
            w &= w - 1;
            Some((i * 64 + b as usize) as Ix)
        })
    })
}

struct Search<'a> {
    table: &'a GroupTable,
    n: usize,
    budget: u64,
    stats: SearchStats,
    /// Per `y`: the `x` sorted by `[x, y]`, with offsets by commutator value.
    preimages: Vec<OnceLock<(Vec<u32>, Vec<Ix>)>>,
    generators: Vec<Ix>,
}

impl<'a> Search<'a> {
    fn new(table: &'a GroupTable, budget: u64) -> Self {
        let n = table.order();
        Search {
            table,
            n,
            budget,
            stats: SearchStats::default(),
            preimages: (0..n).map(|_| OnceLock::new()).collect(),
            generators: table.generator_indices().to_vec(),
        }
    }

    /// `x` with `[x, y] = c`.
    fn pre(&self, y: Ix, c: Ix) -> &[Ix] {
        let (off, xs) = self.preimages[y as usize].get_or_init(|| {
            let n = self.n;
            let mut off = vec![0u32; n + 1];
            for x in 0..n {
                off[self.table.comm(x as Ix, y) as usize + 1] += 1;
            }
            for i in 0..n {
                off[i + 1] += off[i];
            }
            let mut pos = off.clone();
            let mut xs = vec![0 as Ix; n];
            for x in 0..n {
                let c = self.table.comm(x as Ix, y) as usize;
                xs[pos[c] as usize] = x as Ix;
                pos[c] += 1;
            }
            (off, xs)
        });
        &xs[off[c as usize] as usize..off[c as usize + 1] as usize]
    }

    /// Intersects `D(x)` with `mask`. Returns false on a wipe-out.
    fn restrict(&self, s: &mut State, x: Ix, mask: &[u64], queue: &mut VecDeque<Ix>) -> bool {
        let d = s.dom_mut(x);
        let mut changed = false;
        let mut size = 0u32;
        for (a, &m) in d.iter_mut().zip(mask) {
            let b = *a & m;
            changed |= b != *a;
            *a = b;
            size += b.count_ones();
        }
        if changed {
            s.size[x as usize] = size as u16;
            if size == 0 {
                return false;
            }
            queue.push_back(x);
        }
        true
    }

    fn remove(&self, s: &mut State, x: Ix, v: Ix, queue: &mut VecDeque<Ix>) -> bool {
        if !s.has(x, v) {
            return true;
        }
        s.dom_mut(x)[v as usize / 64] &= !(1u64 << (v % 64));
        s.size[x as usize] -= 1;
        if s.size[x as usize] == 0 {
            return false;
        }
        queue.push_back(x);
        true
    }

    /// Runs propagation to a fixpoint. Returns false on contradiction.
    fn propagate(&self, s: &mut State, mut queue: VecDeque<Ix>) -> bool {
        let w = s.w;
        let mut buf = vec![0u64; w];
        loop {
            while let Some(v) = queue.pop_front() {
                if s.size[v as usize] == 0 {
                    return false;
                }
                if s.size[v as usize] == 1 && s.val[v as usize] == UNSET {
                    let u = s.single(v);
                    s.val[v as usize] = u;
                    s.assigned.push(v);
                    // Bijectivity.
                    for x in 0..self.n as Ix {
                        if x != v && !self.remove(s, x, u, &mut queue) {
                            return false;
                        }
                    }
                    // Pairs (x, v) with v assigned.
                    for x in 0..self.n as Ix {
                        if !self.revise_pair(s, x, v, &mut buf, &mut queue) {
                            return false;
                        }
                    }
                    continue;
                }
                // v changed: revisit its constraints against assigned variables.
                let assigned = s.assigned.clone();
                for &y in &assigned {
                    if !self.revise_pair(s, v, y, &mut buf, &mut queue) {
                        return false;
                    }
                    let wy = s.val[y as usize];
                    // v as output of [x, y] = v.
                    for &x in self.pre(y, v) {
                        buf.iter_mut().for_each(|b| *b = 0);
                        for t in bits(s.dom(v)).collect::<Vec<_>>() {
                            for &sx in self.pre(wy, t) {
                                buf[sx as usize / 64] |= 1 << (sx % 64);
                            }
                        }
                        let mask = buf.clone();
                        if !self.restrict(s, x, &mask, &mut queue) {
                            return false;
                        }
                    }
                    // v as output of [y, x] = v, i.e. [x, y] = v^{-1}.
                    let vi = self.table.inv(v);
                    for &x in self.pre(y, vi) {
                        buf.iter_mut().for_each(|b| *b = 0);
                        for t in bits(s.dom(v)).collect::<Vec<_>>() {
                            for &sx in self.pre(wy, self.table.inv(t)) {
                                buf[sx as usize / 64] |= 1 << (sx % 64);
                            }
                        }
                        let mask = buf.clone();
                        if !self.restrict(s, x, &mask, &mut queue) {
                            return false;
                        }
                    }
                }
            }
            // Every value must be used by some variable.
            let mut count = vec![0u32; self.n];
            let mut owner = vec![0 as Ix; self.n];
            for x in 0..self.n as Ix {
                for v in bits(s.dom(x)) {
                    count[v as usize] += 1;
                    owner[v as usize] = x;
                }
            }
            for v in 0..self.n {
                if count[v] == 0 {
                    return false;
                }
                let x = owner[v];
                if count[v] == 1 && s.size[x as usize] > 1 {
                    buf.iter_mut().for_each(|b| *b = 0);
                    buf[v / 64] |= 1 << (v % 64);
                    let mask = buf.clone();
                    if !self.restrict(s, x, &mask, &mut queue) {
                        return false;
                    }
                }
            }
            if queue.is_empty() {
                return true;
            }
        }
    }

    /// Arc consistency of `c = [x, y]` and `c' = [y, x]` against `x` for assigned `y`.
    fn revise_pair(&self, s: &mut State, x: Ix, y: Ix, buf: &mut [u64], queue: &mut VecDeque<Ix>) -> bool {
        let wy = s.val[y as usize];
        let t = self.table;
        for orient in 0..2 {
            let c = if orient == 0 { t.comm(x, y) } else { t.comm(y, x) };
            let f = |sx: Ix| if orient == 0 { t.comm(sx, wy) } else { t.comm(wy, sx) };
            // D(c) within the image of D(x).
            buf.iter_mut().for_each(|b| *b = 0);
            let xs: Vec<Ix> = s.values(x);
            for &sx in &xs {
                let z = f(sx);
                buf[z as usize / 64] |= 1 << (z % 64);
            }
            let mask = buf.to_vec();
            if !self.restrict(s, c, &mask, queue) {
                return false;
            }
            // D(x) within the preimage of D(c).
            buf.iter_mut().for_each(|b| *b = 0);
            for &sx in &xs {
                if s.has(c, f(sx)) {
                    buf[sx as usize / 64] |= 1 << (sx % 64);
                }
            }
            let mask = buf.to_vec();
            if !self.restrict(s, x, &mask, queue) {
                return false;
            }
        }
        true
    }

    /// Splits `vars` (all unassigned) into independent groups.
    fn components(&self, s: &State, vars: &[Ix]) -> Vec<Vec<Ix>> {
        let mut parent: HashMap<Ix, Ix> = vars.iter().map(|&v| (v, v)).collect();
        fn find(p: &mut HashMap<Ix, Ix>, x: Ix) -> Ix {
            let mut r = x;
            while p[&r] != r {
                r = p[&r];
            }
            let mut y = x;
            while p[&y] != r {
                let next = p[&y];
                p.insert(y, r);
                y = next;
            }
            r
        }
        let link = |p: &mut HashMap<Ix, Ix>, a: Ix, b: Ix| {
            if p.contains_key(&a) && p.contains_key(&b) {
                let (ra, rb) = (find(p, a), find(p, b));
                if ra != rb {
                    p.insert(ra.max(rb), ra.min(rb));
                }
            }
        };
        // Shared values.
        let mut holder: HashMap<Ix, Ix> = HashMap::new();
        for &x in vars {
            for v in bits(s.dom(x)) {
                if let Some(&y) = holder.get(&v) {
                    link(&mut parent, x, y);
                } else {
                    holder.insert(v, x);
                }
            }
        }
        let t = self.table;
        // Constraints with one assigned input.
        for &y in &s.assigned {
            for &x in vars {
                link(&mut parent, x, t.comm(x, y));
                link(&mut parent, x, t.comm(y, x));
            }
        }
        // Constraints with both inputs unassigned.
        for (i, &x) in vars.iter().enumerate() {
            let dx = s.values(x);
            for &y in &vars[i..] {
                let dy = s.values(y);
                for (c, flip) in [(t.comm(x, y), false), (t.comm(y, x), true)] {
                    let entailed = match s.value(c) {
                        None => false,
                        Some(u) => dx.iter().all(|&a| {
                            dy.iter().all(|&b| if flip { t.comm(b, a) == u } else { t.comm(a, b) == u })
                        }),
                    };
                    if !entailed {
                        link(&mut parent, x, y);
                        link(&mut parent, x, c);
                    }
                }
            }
        }
        let mut groups: HashMap<Ix, Vec<Ix>> = HashMap::new();
        for &x in vars {
            let r = find(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        let mut out: Vec<Vec<Ix>> = groups.into_values().collect();
        for g in &mut out {
            g.sort_unstable();
        }
        out.sort_unstable();
        out
    }

    fn pick(&self, s: &State, comp: &[Ix]) -> Ix {
        if let Some(&g) = self.generators.iter().find(|g| comp.binary_search(g).is_ok()) {
            return g;
        }
        *comp.iter().min_by_key(|&&x| (s.size[x as usize], x)).expect("nonempty component")
    }

    fn solve(&mut self, s: &State, comp: &[Ix], b: &mut MapSetBuilder) -> Result<Option<NodeId>> {
        let x = self.pick(s, comp);
        let mut branches = Vec::new();
        for v in s.values(x) {
            self.stats.nodes += 1;
            if self.stats.nodes > self.budget {
                return Err(Error::BudgetExceeded { budget: self.budget, explored: self.stats.nodes - 1 });
            }
            let mut st = s.clone();
            let mask: Vec<u64> = {
                let mut m = vec![0u64; st.w];
                m[v as usize / 64] |= 1 << (v % 64);
                m
            };
            let mut queue = VecDeque::new();
            if !self.restrict(&mut st, x, &mask, &mut queue) {
                continue;
            }
            if queue.is_empty() {
                queue.push_back(x);
            }
            if !self.propagate(&mut st, queue) {
                continue;
            }
            let newly: Vec<(Ix, Ix)> = comp.iter().filter_map(|&y| st.value(y).map(|u| (y, u))).collect();
            let rest: Vec<Ix> = comp.iter().copied().filter(|&y| st.value(y).is_none()).collect();
            let mut kids = vec![b.leaf(newly)];
            let mut ok = true;
            for sub in self.components(&st, &rest) {
                match self.solve(&st, &sub, b)? {
                    Some(id) => kids.push(id),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                branches.push(b.product(kids));
            }
        }
        Ok(if branches.is_empty() { None } else { Some(b.union(branches)) })
    }
}

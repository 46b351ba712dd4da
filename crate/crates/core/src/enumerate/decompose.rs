//! Splitting a PC-map table into standard families.

use std::sync::Arc;

use serde_json::json;

use super::standard::{aut_parts, AutPart, FamilyPerms, DEFAULT_PARAM_BUDGET};
use super::table::{GroupTable, Ix};
use crate::error::{Error, Result};
use crate::matrix::{upper_pos, TriangularInvertible, UTElement};
use crate::pcmap::{check_table_pc, CentralFunction, PCMap};

/// `phi = graph^g . subcentral . quasi_inner . frobenius^i . central` for `n >= 4`,
/// `phi = permutable . frobenius^i . central` for `n = 3`, and `phi = central` for `n = 2`.
#[derive(Clone)]
pub struct Decomposition {
    pub part: AutPart,
    /// `f(x)` for every element in table order.
    pub central: Vec<u8>,
    table: Arc<GroupTable>,
}

impl Decomposition {
    pub fn graph(&self) -> bool {
        self.part.graph
    }

    pub fn subcentral(&self) -> (u8, u8) {
        self.part.subcentral
    }

    pub fn field_power(&self) -> u32 {
        self.part.field_power
    }

    pub fn quasi_inner(&self) -> Result<TriangularInvertible> {
        let n = self.table.n();
        let u = UTElement::from_entries(n, self.table.field(), self.part.unipotent.clone())?;
        TriangularInvertible::new(self.part.diag.clone(), u)
    }

    pub fn central_function(&self) -> Result<CentralFunction> {
        CentralFunction::from_table(self.table.clone(), self.central.clone())
    }

    /// The composed map.
    pub fn to_map(&self) -> Result<PCMap> {
        let (n, f) = (self.table.n(), self.table.field());
        let c = PCMap::central_map(n, f, self.central_function()?)?;
        self.part.to_map(n, f)?.compose(&c)
    }

    /// Image table of the composed map.
    pub fn recompose(&self) -> Result<Vec<Ix>> {
        self.to_map()?.images(&self.table)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "group": {"n": self.table.n(), "p": self.table.field().p(), "k": self.table.field().k()},
            "graph": self.part.graph,
            "subcentral": [self.part.subcentral.0, self.part.subcentral.1],
            "quasi_inner": {"diag": self.part.diag, "unipotent": self.part.unipotent},
            "permutable": self.part.permutable,
            "field_power": self.part.field_power,
            "central": self.central,
        })
    }
}

impl std::fmt::Debug for Decomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Decomposition").field("part", &self.part).finish_non_exhaustive()
    }
}

/// Recovers the standard factors of `phi`.
///
/// The result always recomposes to `phi` exactly; otherwise an error is returned.
pub fn decompose_pc_map(table: Arc<GroupTable>, phi: &[Ix]) -> Result<Decomposition> {
    if phi.len() != table.order() {
        return Err(Error::WrongLength { expected: table.order(), got: phi.len() });
    }
    let check = check_table_pc(&table, phi);
    if !check.holds {
        return Err(Error::Precondition(format!("not a PC-map: {:?}", check.witness)));
    }
    let n = table.n();
    let found = if n >= 4 { find_part_general(&table, phi)? } else { find_part_small(&table, phi)? };
    let (part, m) = found.ok_or_else(|| {
        Error::NoDecomposition("no standard part agrees with the map modulo the center".into())
    })?;
    let mut m_inv = vec![0 as Ix; m.len()];
    for (x, &y) in m.iter().enumerate() {
        m_inv[y as usize] = x as Ix;
    }
    let f = table.field();
    let central: Vec<u8> = (0..table.order())
        .map(|x| {
            let c = m_inv[phi[x] as usize];
            f.sub(table.central_coord(c), table.central_coord(x as Ix))
        })
        .collect();
    let d = Decomposition { part, central, table: table.clone() };
    d.central_function()
        .map_err(|e| Error::NoDecomposition(format!("residual is not a central map: {e}")))?;
    if d.recompose()? != phi {
        return Err(Error::NoDecomposition("recomposition differs from the input".into()));
    }
    Ok(d)
}

fn agrees_mod_center(table: &GroupTable, m: impl Fn(Ix) -> Ix, phi: &[Ix]) -> bool {
    let gens = table.generator_indices();
    gens.iter()
        .chain(table.transvection_indices())
        .all(|&x| table.center_rep(m(x)) == table.center_rep(phi[x as usize]))
        && (0..table.order() as Ix).all(|x| table.center_rep(m(x)) == table.center_rep(phi[x as usize]))
}

fn find_part_small(table: &GroupTable, phi: &[Ix]) -> Result<Option<(AutPart, Vec<Ix>)>> {
    for (part, img) in aut_parts(table, DEFAULT_PARAM_BUDGET)? {
        if agrees_mod_center(table, |x| img[x as usize], phi) {
            return Ok(Some((part, img)));
        }
    }
    Ok(None)
}

fn find_part_general(table: &GroupTable, phi: &[Ix]) -> Result<Option<(AutPart, Vec<Ix>)>> {
    let n = table.n();
    let f = table.field();
    let fp = FamilyPerms::new(table)?;
    let superdiag = |x: Ix| -> Vec<u8> { (1..n).map(|i| table.element(x).get(i, i + 1)).collect() };

    let s = superdiag(phi[table.transvection_index(1, 2, 1) as usize]);
    let support: Vec<usize> = (0..n - 1).filter(|&i| s[i] != 0).collect();
    let graph = match support.as_slice() {
        [0] => false,
        [i] if *i == n - 2 => true,
        _ => return Ok(None),
    };
    let phi1: Vec<Ix> = if graph { phi.iter().map(|&y| fp.graph()[y as usize]).collect() } else { phi.to_vec() };

    // Superdiagonal action: x_i -> (d_i / d_{i+1}) x_i^(p^e).
    let lambda = |i: usize, a: u8| superdiag(phi1[table.transvection_index(i, i + 1, a) as usize])[i - 1];
    let l1 = lambda(1, 1);
    let Some(power) =
        (0..f.k()).find(|&e| f.values().all(|a| lambda(1, a) == f.mul(l1, f.frobenius(a, e))))
    else {
        return Ok(None);
    };
    let mut diag = vec![1u8; n];
    for i in (1..n).rev() {
        let r = lambda(i, 1);
        if r == 0 {
            return Ok(None);
        }
        diag[i - 1] = f.mul(r, diag[i]);
    }
    let dp = fp.diag(&diag)?;
    let fr = fp.frob(power);
    let corner = upper_pos(n, 1, n);
    let mut subs: Vec<(u8, u8)> = Vec::new();
    for a in f.values() {
        for b in f.values() {
            subs.push((a, b));
        }
    }
    for (a, b) in subs {
        let sp = fp.subcentral(a, b);
        for u in (0..table.order() as Ix).filter(|&u| table.element(u).entries()[corner] == 0) {
            let ip = fp.inner(u);
            let m = |x: Ix| sp[dp[ip[fr[x as usize] as usize] as usize] as usize];
            if agrees_mod_center(table, m, &phi1) {
                let img: Vec<Ix> = (0..table.order() as Ix)
                    .map(|x| if graph { fp.graph()[m(x) as usize] } else { m(x) })
                    .collect();
                let part = AutPart {
                    graph,
                    subcentral: (a, b),
                    diag: diag.clone(),
                    unipotent: table.element(u).entries().to_vec(),
                    field_power: power,
                    permutable: None,
                };
                return Ok(Some((part, img)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn table(n: usize, p: u32, k: u32) -> Arc<GroupTable> {
        Arc::new(GroupTable::build(n, &Field::new(p, k).unwrap()).unwrap())
    }

    #[test]
    fn identity_is_trivial() {
        for t in [table(2, 3, 1), table(3, 3, 1), table(4, 3, 1)] {
            let id: Vec<Ix> = (0..t.order() as Ix).collect();
            let d = decompose_pc_map(t.clone(), &id).unwrap();
            assert!(!d.graph());
            assert_eq!(d.subcentral(), (0, 0));
            assert_eq!(d.field_power(), 0);
            assert!(d.central.iter().all(|&v| v == 0));
            assert_eq!(d.recompose().unwrap(), id);
        }
    }

    #[test]
    fn quasi_inner_is_recovered() {
        let t = table(4, 3, 1);
        let f = t.field().clone();
        let u = UTElement::from_entries(4, &f, vec![1, 2, 0, 1, 1, 2]).unwrap();
        let q = TriangularInvertible::new(vec![2, 1, 2, 1], u).unwrap();
        let phi = PCMap::quasi_inner(q.clone()).images(&t).unwrap();
        let d = decompose_pc_map(t.clone(), &phi).unwrap();
        assert!(!d.graph());
        assert_eq!(d.subcentral(), (0, 0));
        // Equal modulo the centralizer: the two conjugations agree modulo the center.
        let rec = PCMap::quasi_inner(d.quasi_inner().unwrap()).images(&t).unwrap();
        for x in 0..t.order() {
            assert_eq!(t.center_rep(rec[x]), t.center_rep(phi[x]));
        }
        assert_eq!(d.recompose().unwrap(), phi);
    }

    #[test]
    fn graph_subcentral_composition() {
        let t = table(4, 3, 1);
        let f = t.field().clone();
        let s = PCMap::standard_subcentral(4, &f.one(), &f.elem(2).unwrap()).unwrap();
        let phi = PCMap::graph_aut(4, &f).compose(&s).unwrap();
        let c = PCMap::central_map(4, &f, CentralFunction::Superdiagonal(vec![1, 0, 2])).unwrap();
        let phi = phi.compose(&c).unwrap().images(&t).unwrap();
        let d = decompose_pc_map(t.clone(), &phi).unwrap();
        assert!(d.graph());
        assert_eq!(d.recompose().unwrap(), phi);
    }

    #[test]
    fn small_n() {
        let t = table(3, 2, 2);
        let f = t.field().clone();
        let e = |v| f.elem(v).unwrap();
        let p = PCMap::permutable(3, &e(2), &e(1), &e(0), &e(3)).unwrap();
        let phi = p.compose(&PCMap::field_aut(3, &f, 1)).unwrap().images(&t).unwrap();
        let d = decompose_pc_map(t.clone(), &phi).unwrap();
        assert_eq!(d.recompose().unwrap(), phi);
        assert_eq!(d.field_power(), 1);
    }

    #[test]
    fn rejects_non_pc() {
        let t = table(3, 3, 1);
        let mut perm: Vec<Ix> = (0..27).collect();
        perm.swap(0, 5);
        assert!(matches!(decompose_pc_map(t, &perm), Err(Error::Precondition(_))));
    }
}

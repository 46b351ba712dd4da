//! Automorphisms of a finite group table.

use std::collections::VecDeque;

use itertools::Itertools;

use super::table::{GroupTable, Ix};
use crate::error::{Error, Result};

/// Default cap on generator-image tuples tried.
pub const DEFAULT_AUT_BUDGET: u128 = 20_000_000;

/// Extends generator images to a homomorphism along the Cayley graph.
fn extend(table: &GroupTable, gens: &[Ix], images: &[Ix]) -> Option<Vec<Ix>> {
    let n = table.order();
    let mut img = vec![Ix::MAX; n];
    img[0] = 0;
    let mut queue = VecDeque::from([0 as Ix]);
    while let Some(x) = queue.pop_front() {
        for (&g, &h) in gens.iter().zip(images) {
            let y = table.mul(x, g);
            let v = table.mul(img[x as usize], h);
            match img[y as usize] {
                Ix::MAX => {
                    img[y as usize] = v;
                    queue.push_back(y);
                }
                w if w != v => return None,
                _ => {}
            }
        }
    }
    // Bijective?
    let mut seen = vec![false; n];
    for &v in &img {
        if v == Ix::MAX || std::mem::replace(&mut seen[v as usize], true) {
            return None;
        }
    }
    Some(img)
}

/// Every automorphism of the group as an image table, in lexicographic order of
/// generator images.
pub fn enumerate_automorphisms(table: &GroupTable, budget: u128) -> Result<Vec<Vec<Ix>>> {
    let gens = table.generator_indices();
    let tuples = (table.order() as u128).saturating_pow(gens.len() as u32);
    if tuples > budget {
        return Err(Error::BudgetExceeded { budget: budget as u64, explored: 0 });
    }
    // Generators lie outside the derived subgroup, and automorphisms preserve it.
    let candidates: Vec<Ix> = (0..table.order() as Ix).filter(|&x| !table.element(x).in_derived()).collect();
    let mut out = Vec::new();
    for images in (0..gens.len()).map(|_| candidates.iter().copied()).multi_cartesian_product() {
        if let Some(img) = extend(table, gens, &images) {
            out.push(img);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::pcmap::check_table_pc;

    #[test]
    fn ut3_f3_has_432_automorphisms() {
        // (F_3)^2 semidirect GL(2, 3).
        let t = GroupTable::build(3, &Field::new(3, 1).unwrap()).unwrap();
        let auts = enumerate_automorphisms(&t, DEFAULT_AUT_BUDGET).unwrap();
        assert_eq!(auts.len(), 432);
        for a in auts.iter().step_by(17) {
            assert!(check_table_pc(&t, a).holds);
            for x in 0..27 {
                for y in 0..27 {
                    assert_eq!(a[t.mul(x, y) as usize], t.mul(a[x as usize], a[y as usize]));
                }
            }
        }
    }

    #[test]
    fn dihedral_of_order_8() {
        let t = GroupTable::build(3, &Field::new(2, 1).unwrap()).unwrap();
        assert_eq!(enumerate_automorphisms(&t, DEFAULT_AUT_BUDGET).unwrap().len(), 8);
    }
}

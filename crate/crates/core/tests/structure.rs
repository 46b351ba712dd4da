use std::collections::HashSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use utpc::enumerate::{central_set, enumerate_pc_maps, Constraint, GroupTable, Ix, DEFAULT_BUDGET};
use utpc::pcmap::check_table_pc;
use utpc::{Field, UTElement};

fn table(n: usize, q: u32) -> Arc<GroupTable> {
    Arc::new(GroupTable::build(n, &Field::from_order(q).unwrap()).unwrap())
}

#[test]
fn group_axioms_exhaustive() {
    for t in [table(3, 2), table(3, 3)] {
        let m = t.order() as Ix;
        for x in 0..m {
            assert_eq!(t.mul(x, t.inv(x)), 0);
            for y in 0..m {
                for z in 0..m {
                    assert_eq!(t.mul(t.mul(x, y), z), t.mul(x, t.mul(y, z)));
                }
            }
        }
    }
}

/// `C_1 = Z(G)`, `C_m = {g : [g, x] in C_{m-1} for all x}`.
fn upper_central_series(t: &GroupTable, levels: usize) -> Vec<Vec<bool>> {
    let m = t.order() as Ix;
    let mut prev = vec![false; t.order()];
    prev[0] = true;
    let mut out = Vec::new();
    for _ in 0..levels {
        let next: Vec<bool> = (0..m).map(|g| (0..m).all(|x| prev[t.comm(g, x) as usize])).collect();
        out.push(next.clone());
        prev = next;
    }
    out
}

#[test]
fn higher_centers_match_the_recursive_definition() {
    for n in 2..=5 {
        let t = table(n, 2);
        for (level, members) in upper_central_series(&t, n).iter().enumerate() {
            for x in 0..t.order() as Ix {
                assert_eq!(t.element(x).higher_center_member(level + 1).unwrap(), members[x as usize], "n={n} m={}", level + 1);
            }
        }
    }
}

#[test]
fn single_commutators_of_ut4_f2_are_the_derived_subgroup() {
    let t = table(4, 2);
    let hit: HashSet<Ix> = (0..t.order() as Ix).flat_map(|x| t.comm_row(x).to_vec()).collect();
    let derived: HashSet<Ix> = (0..t.order() as Ix).filter(|&x| t.element(x).in_derived()).collect();
    assert_eq!(hit, derived);
}

#[test]
fn up_k_is_normal() {
    let f = Field::from_order(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let all: Vec<UTElement> = UTElement::all(4, &f).collect();
    for k in 1..4 {
        for a in all.iter().filter(|a| a.in_up_k(k).unwrap()) {
            for _ in 0..5 {
                let g = &all[rand::Rng::gen_range(&mut rng, 0..all.len())];
                assert!(a.conjugate_by(g).unwrap().in_up_k(k).unwrap());
            }
        }
    }
}

fn compose(outer: &[Ix], inner: &[Ix]) -> Vec<Ix> {
    inner.iter().map(|&x| outer[x as usize]).collect()
}

fn invert(p: &[Ix]) -> Vec<Ix> {
    let mut out = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        out[y as usize] = x as Ix;
    }
    out
}

#[test]
fn central_maps_form_a_normal_subgroup_of_pc_maps() {
    let t = table(3, 3);
    let central = central_set(t.clone(), false);
    let pc = enumerate_pc_maps(t.clone(), Constraint::None, DEFAULT_BUDGET).unwrap().set;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (c1, c2) = (central.sample(&mut rng).unwrap(), central.sample(&mut rng).unwrap());
        assert!(central.contains(&compose(&c1, &c2)));
        assert!(central.contains(&invert(&c1)));
        let phi = pc.sample(&mut rng).unwrap();
        let conj = compose(&phi, &compose(&c1, &invert(&phi)));
        assert!(central.contains(&conj));
        assert!(check_table_pc(&t, &conj).holds);
    }
}

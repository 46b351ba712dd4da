//! Explicit commutator factorizations.

use crate::error::{Error, Result};
use crate::matrix::UTElement;

/// `e + sum_i e_{i,i+1}`.
fn superdiagonal_ones(a: &UTElement) -> UTElement {
    let n = a.n();
    let mut b = UTElement::identity(n, a.field());
    for i in 1..n {
        b.set(i, i + 1, 1);
    }
    b
}

/// Solves `[b, c] = a` for `c`, `b = e + S`, one diagonal of `c` at a time.
///
/// `[b, c] = a` is `b c = a c b`. At offset `d` the entries of diagonal `d - 1`
/// of `c` enter only as `c_{i+1,j} - c_{i,j-1}` (the `a_{i,i+1}` term vanishes on
/// the derived subgroup), so with `c_{1,d} = 0` the diagonal is fixed by a
/// running sum of the residual.
fn solve_fixed_b(a: &UTElement, b: &UTElement) -> UTElement {
    let n = a.n();
    let f = a.field();
    let mut c = UTElement::identity(n, f);
    for d in 2..=n {
        let lhs = b.mul(&c);
        let rhs = a.mul(&c).mul(b);
        let mut x = 0u8;
        for i in 1..=n - d {
            let j = i + d;
            let resid = f.sub(lhs.get(i, j), rhs.get(i, j));
            // resid + x_{i+1} - x_i = 0
            x = f.sub(x, resid);
            c.set(i + 1, j, x);
        }
    }
    c
}

/// Returns `(b, c)` with `[b, c] = a` for any `a` in the derived subgroup.
pub fn factor_commutator(a: &UTElement) -> Result<(UTElement, UTElement)> {
    if !a.in_derived() {
        return Err(Error::Precondition("a has a nonzero superdiagonal entry".into()));
    }
    let e = UTElement::identity(a.n(), a.field());
    if a.is_identity() {
        return Ok((e.clone(), e));
    }
    let b = superdiagonal_ones(a);
    let c = solve_fixed_b(a, &b);
    if b.comm(&c) != *a {
        return Err(Error::Precondition(format!(
            "fixed-b elimination did not reproduce {:?}",
            a.entries()
        )));
    }
    Ok((b, c))
}

/// Returns `(x, y, z)` with `[x, [y, z]] = a` whenever `a_{i,i+1} = a_{i,i+2} = 0`.
pub fn factor_double_commutator(a: &UTElement) -> Result<(UTElement, UTElement, UTElement)> {
    if !a.in_second_derived_shape() {
        return Err(Error::Precondition(
            "a has a nonzero entry on the first or second superdiagonal".into(),
        ));
    }
    let n = a.n();
    let f = a.field();
    let e = UTElement::identity(n, f);
    if a.is_identity() {
        return Ok((e.clone(), e.clone(), e));
    }
    if let Some(t) = row_one_pattern(a) {
        return Ok(t);
    }
    // Same elimination as for single commutators; the zero second
    // superdiagonal of a forces the first superdiagonal of w to vanish.
    let x = superdiagonal_ones(a);
    let w = solve_fixed_b(a, &x);
    if x.comm(&w) != *a {
        return Err(Error::Precondition(format!(
            "fixed-b elimination did not reproduce {:?}",
            a.entries()
        )));
    }
    let (y, z) = factor_commutator(&w)?;
    Ok((x, y, z))
}

/// `a = [t_12(1), [t_23(1), prod_{i >= 4} t_{3i}(a_{1i})]]` for `a` supported in row 1.
fn row_one_pattern(a: &UTElement) -> Option<(UTElement, UTElement, UTElement)> {
    let n = a.n();
    if n < 4 {
        return None;
    }
    for i in 2..n {
        for j in i + 1..=n {
            if a.get(i, j) != 0 {
                return None;
            }
        }
    }
    let f = a.field();
    let mut z = UTElement::identity(n, f);
    for i in 4..=n {
        z.set(3, i, a.get(1, i));
    }
    let x = UTElement::t(n, f, 1, 2, 1);
    let y = UTElement::t(n, f, 2, 3, 1);
    (x.comm(&y.comm(&z)) == *a).then_some((x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::pcmap::random_element;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn derived_part(a: &UTElement) -> UTElement {
        let mut a = a.clone();
        for i in 1..a.n() {
            a.set(i, i + 1, 0);
        }
        a
    }

    #[test]
    fn identity_factors_trivially() {
        let f = Field::new(3, 1).unwrap();
        let e = UTElement::identity(4, &f);
        assert_eq!(factor_commutator(&e).unwrap(), (e.clone(), e.clone()));
        assert_eq!(factor_double_commutator(&e).unwrap(), (e.clone(), e.clone(), e));
    }

    #[test]
    fn rejects_non_derived() {
        let f = Field::new(3, 1).unwrap();
        let t = UTElement::t(3, &f, 1, 2, 1);
        assert!(factor_commutator(&t).is_err());
        let t = UTElement::t(4, &f, 1, 3, 1);
        assert!(factor_commutator(&t).is_ok());
        assert!(factor_double_commutator(&t).is_err());
    }

    #[test]
    fn t13_in_ut3_f3() {
        let f = Field::new(3, 1).unwrap();
        let a = UTElement::t(3, &f, 1, 3, 1);
        // Brute-force oracle: some pair exists.
        let all: Vec<_> = UTElement::all(3, &f).collect();
        assert!(all.iter().any(|b| all.iter().any(|c| b.comm(c) == a)));
        let (b, c) = factor_commutator(&a).unwrap();
        assert_eq!(b.comm(&c), a);
    }

    #[test]
    fn exhaustive_small_round_trips() {
        for (n, p, k) in [(3, 2, 1), (4, 2, 1), (5, 2, 1), (3, 3, 1), (4, 3, 1), (5, 3, 1), (4, 2, 2)] {
            let f = Field::new(p, k).unwrap();
            for a in UTElement::all(n, &f).filter(|a| a.in_derived()) {
                let (b, c) = factor_commutator(&a).unwrap();
                assert_eq!(b.comm(&c), a);
            }
        }
    }

    #[test]
    fn random_larger_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (p, k) in [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (7, 1)] {
            let f = Field::new(p, k).unwrap();
            for n in 2..=10 {
                for _ in 0..12 {
                    let a = derived_part(&random_element(n, &f, &mut rng));
                    let (b, c) = factor_commutator(&a).unwrap();
                    assert_eq!(b.comm(&c), a);
                }
            }
        }
    }

    #[test]
    fn double_commutator_row_pattern() {
        let f = Field::new(5, 1).unwrap();
        let a = UTElement::t(4, &f, 1, 4, 3);
        let (x, y, z) = factor_double_commutator(&a).unwrap();
        assert_eq!(x, UTElement::t(4, &f, 1, 2, 1));
        assert_eq!(y, UTElement::t(4, &f, 2, 3, 1));
        assert_eq!(z, UTElement::t(4, &f, 3, 4, 3));
    }

    #[test]
    fn double_commutator_ut5_f2_exhaustive() {
        let f = Field::new(2, 1).unwrap();
        let shapes: Vec<_> = UTElement::all(5, &f).filter(|a| a.in_second_derived_shape()).collect();
        assert_eq!(shapes.len(), 8);
        for a in shapes {
            let (x, y, z) = factor_double_commutator(&a).unwrap();
            assert_eq!(x.comm(&y.comm(&z)), a);
        }
    }

    #[test]
    fn double_commutator_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, k) in [(2, 1), (3, 1), (3, 2), (5, 1)] {
            let f = Field::new(p, k).unwrap();
            for n in 3..=9 {
                for _ in 0..10 {
                    let mut a = random_element(n, &f, &mut rng);
                    for i in 1..n {
                        a.set(i, i + 1, 0);
                        if i + 2 <= n {
                            a.set(i, i + 2, 0);
                        }
                    }
                    let (x, y, z) = factor_double_commutator(&a).unwrap();
                    assert_eq!(x.comm(&y.comm(&z)), a);
                }
            }
        }
    }
}

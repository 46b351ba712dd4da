//! Machine checks of the matrix identities behind the transvection-extraction
//! arguments, with exhaustive and seeded random sweeps.
//!
//! Every check is an exact matrix equality. A check returns `Ok(false)` when the
//! identity fails and `Err` when its arguments are out of range.
//!
//! Two reading conventions are fixed here:
//! - `a'_{ij}` in the collapsed extraction formulas is the strictly-upper entry of
//!   `a^{-1}` (taken as 0 when `j <= i`); likewise `a_{ij}` in the last-row form.
//! - "conjugation by `t`" in the subcentral note is `b -> t^{-1} b t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{Dense, UTElement};
use crate::pcmap::random_element;

/// Upper bound on `|UT(n, F_q)|` for an exhaustive sweep.
pub const EXHAUSTIVE_BOUND: u128 = 1 << 16;

/// Largest dimension used by the embedding checks.
pub const MAX_EMBED_DIM: usize = 12;

fn t(n: usize, f: &Field, i: usize, j: usize, alpha: u8) -> UTElement {
    UTElement::t(n, f, i, j, alpha)
}

fn product(n: usize, f: &Field, factors: impl IntoIterator<Item = UTElement>) -> UTElement {
    factors.into_iter().fold(UTElement::identity(n, f), |acc, x| acc.mul(&x))
}

fn range_err(what: &str) -> Error {
    Error::Precondition(what.to_string())
}

fn check_index_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if n < 3 || !(2..n).contains(&i) || !(2..n).contains(&j) {
        return Err(range_err(&format!("need 2 <= i, j <= n-1, got i = {i}, j = {j}, n = {n}")));
    }
    Ok(())
}

/// `a'_{ij}` for `i < j`, else 0.
fn strict(a: &UTElement, i: usize, j: usize) -> u8 {
    if i < j { a.get(i, j) } else { 0 }
}

/// `[t_{1i}(-1), a] = t_{1i}(-1)(e + a_{*1} a'_{i*})` and
/// `[[t_{1i}(-1), a], t_{j,j+1}(1)] = t_{1,j+1}(a'_{ij})`.
pub fn check_extraction_first_col(a: &UTElement, i: usize, j: usize) -> Result<bool> {
    let (n, f) = (a.n(), a.field());
    check_index_pair(n, i, j)?;
    let inv = a.inverse();
    let ti = t(n, f, 1, i, f.neg(1));
    let c = ti.comm(a);
    let rank_one = Dense::identity(n, f).add(&Dense::outer(&a.col(1), &inv.row(i), f));
    let first = Dense::from_ut(&ti).mul(&rank_one).to_ut().as_ref() == Some(&c);
    let second = c.comm(&t(n, f, j, j + 1, 1)) == t(n, f, 1, j + 1, strict(&inv, i, j));
    Ok(first && second)
}

/// `[t_{jn}(-1), a] = t_{jn}(-1)(e + a_{*j} a'_{n*})` and
/// `[t_{i-1,i}(1), [t_{jn}(-1), a]] = t_{i-1,n}(a_{ij})`.
pub fn check_extraction_last_row(a: &UTElement, i: usize, j: usize) -> Result<bool> {
    let (n, f) = (a.n(), a.field());
    check_index_pair(n, i, j)?;
    let inv = a.inverse();
    let tj = t(n, f, j, n, f.neg(1));
    let c = tj.comm(a);
    let rank_one = Dense::identity(n, f).add(&Dense::outer(&a.col(j), &inv.row(n), f));
    let first = Dense::from_ut(&tj).mul(&rank_one).to_ut().as_ref() == Some(&c);
    let second = t(n, f, i - 1, i, 1).comm(&c) == t(n, f, i - 1, n, strict(a, i, j));
    Ok(first && second)
}

/// `y = t_{k+1,k+2}(beta) prod_{i<k} t_{ik}(alpha_i)`.
fn y_element(n: usize, f: &Field, k: usize, beta: u8, alphas: &[u8]) -> UTElement {
    let mut y = t(n, f, k + 1, k + 2, beta);
    for (i, &a) in alphas.iter().enumerate() {
        y = y.mul(&t(n, f, i + 1, k, a));
    }
    y
}

fn check_field_values(f: &Field, vals: &[u8]) -> Result<()> {
    for &v in vals {
        f.check(v)?;
    }
    Ok(())
}

/// `[t_{j,j+1}(-1), y]` is `t_{k+1,k+3}(beta)` for `j = k+2` and `e` for every
/// other `j > k`.
pub fn check_y_identity(n: usize, f: &Field, k: usize, beta: u8, alphas: &[u8], j: usize) -> Result<bool> {
    if k < 1 || k + 3 > n || j <= k || j >= n {
        return Err(range_err(&format!("need 1 <= k <= n-3 and k < j <= n-1, got k = {k}, j = {j}, n = {n}")));
    }
    if alphas.len() != k - 1 {
        return Err(Error::WrongLength { expected: k - 1, got: alphas.len() });
    }
    check_field_values(f, &[beta])?;
    check_field_values(f, alphas)?;
    let y = y_element(n, f, k, beta, alphas);
    let b = t(n, f, j, j + 1, f.neg(1)).comm(&y);
    let expected = if j == k + 2 { t(n, f, k + 1, k + 3, beta) } else { UTElement::identity(n, f) };
    Ok(b == expected)
}

fn check_yz_range(n: usize, k: usize) -> Result<()> {
    if k < 2 || k + 3 > n {
        return Err(range_err(&format!("need 2 <= k <= n-3, got k = {k}, n = {n}")));
    }
    Ok(())
}

/// `[y, t_{k,k+1}(-1)] = prod_i (t_{i,k+1}(-alpha_i) t_{i,k+2}(alpha_i beta)) t_{k,k+2}(beta)`
/// and `[[y, t_{k,k+1}(-1)], t_{k+2,k+3}(1)] = prod_i t_{i,k+3}(alpha_i beta) t_{k,k+3}(beta)`.
pub fn check_yz_identity(n: usize, f: &Field, k: usize, beta: u8, alphas: &[u8]) -> Result<bool> {
    check_yz_range(n, k)?;
    if alphas.len() != k - 1 {
        return Err(Error::WrongLength { expected: k - 1, got: alphas.len() });
    }
    check_field_values(f, &[beta])?;
    check_field_values(f, alphas)?;
    let y = y_element(n, f, k, beta, alphas);
    let c = y.comm(&t(n, f, k, k + 1, f.neg(1)));
    let single = product(
        n,
        f,
        alphas
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| [t(n, f, i + 1, k + 1, f.neg(a)), t(n, f, i + 1, k + 2, f.mul(a, beta))])
            .chain([t(n, f, k, k + 2, beta)]),
    );
    let double = product(
        n,
        f,
        alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| t(n, f, i + 1, k + 3, f.mul(a, beta)))
            .chain([t(n, f, k, k + 3, beta)]),
    );
    Ok(c == single && c.comm(&t(n, f, k + 2, k + 3, 1)) == double)
}

/// With `beta = gamma_k` and `alpha_i = gamma_i / gamma_k`, the double commutator
/// of the previous check equals `z = prod_{i<=k} t_{i,k+3}(gamma_i)`.
pub fn check_yz_substitution(n: usize, f: &Field, k: usize, gammas: &[u8]) -> Result<bool> {
    check_yz_range(n, k)?;
    if gammas.len() != k {
        return Err(Error::WrongLength { expected: k, got: gammas.len() });
    }
    check_field_values(f, gammas)?;
    let gk = gammas[k - 1];
    if gk == 0 {
        return Err(range_err("the substitution needs gamma_k != 0"));
    }
    let alphas: Vec<u8> = gammas[..k - 1].iter().map(|&g| f.div(g, gk)).collect::<Result<_>>()?;
    let y = y_element(n, f, k, gk, &alphas);
    let w = y.comm(&t(n, f, k, k + 1, f.neg(1))).comm(&t(n, f, k + 2, k + 3, 1));
    let z = product(n, f, gammas.iter().enumerate().map(|(i, &g)| t(n, f, i + 1, k + 3, g)));
    Ok(check_yz_identity(n, f, k, gk, &alphas)? && w == z)
}

/// `[[a, t_{k+1,k+2}(1)], t_{k+2,k+3}(1)] = prod_{i<=k} t_{i,k+3}(a_{i,k+1})`, and
/// `[a, t_{k+1,k+2}(1)] = (e + a_{*,k+1} a'_{k+2,*}) t_{k+1,k+2}(-1)` lies in
/// `prod_{i<=k} t_{i,k+2}(a_{i,k+1}) UP_{k+2}`.
pub fn check_zx_identity(a: &UTElement, k: usize) -> Result<bool> {
    let (n, f) = (a.n(), a.field());
    if k < 1 || k + 3 > n {
        return Err(range_err(&format!("need 1 <= k <= n-3, got k = {k}, n = {n}")));
    }
    let inv = a.inverse();
    let c = a.comm(&t(n, f, k + 1, k + 2, 1));
    let rank_one = Dense::identity(n, f).add(&Dense::outer(&a.col(k + 1), &inv.row(k + 2), f));
    let literal = rank_one.mul(&Dense::from_ut(&t(n, f, k + 1, k + 2, f.neg(1)))).to_ut().as_ref() == Some(&c);
    let head = product(n, f, (1..=k).map(|i| t(n, f, i, k + 2, a.get(i, k + 1))));
    let coset = head.inverse().mul(&c).in_up_k(k + 2)?;
    let double = c.comm(&t(n, f, k + 2, k + 3, 1))
        == product(n, f, (1..=k).map(|i| t(n, f, i, k + 3, a.get(i, k + 1))));
    Ok(literal && coset && double)
}

/// `a = (1 u; 0 e)` with `u` in the first row.
fn first_row(n: usize, f: &Field, u: &[u8]) -> UTElement {
    let mut a = UTElement::identity(n, f);
    for (j, &v) in u.iter().enumerate() {
        a.set(1, j + 2, v);
    }
    a
}

/// `[a, b] = (1 u(e - b~^{-1}); 0 e)` for `a = (1 u; 0 e)`, where `b~` is the
/// lower-right `(n-1)`-block of `b`.
pub fn check_block_commutator(u: &[u8], b: &UTElement) -> Result<bool> {
    let (n, f) = (b.n(), b.field());
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    if u.len() != n - 1 {
        return Err(Error::WrongLength { expected: n - 1, got: u.len() });
    }
    check_field_values(f, u)?;
    let c = first_row(n, f, u).comm(b);
    let b_inv = b.inverse();
    // (u (e - b~^{-1}))_j for block columns j = 2..n.
    let block: Vec<u8> = (2..=n)
        .map(|j| {
            (2..=n).fold(0, |s, i| {
                let e_minus = f.sub(u8::from(i == j), b_inv.get(i, j));
                f.add(s, f.mul(u[i - 2], e_minus))
            })
        })
        .collect();
    Ok(c == first_row(n, f, &block))
}

/// The block form with `b = diag(1, c^{-1})`, `c` having 1 on the diagonal and
/// -1 on the superdiagonal: the first row of `[a, b]` is `(0, u_1, ..., u_{n-2})`.
pub fn check_block_shift(n: usize, f: &Field, u: &[u8]) -> Result<bool> {
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    let mut c_hat = UTElement::identity(n, f);
    for i in 2..n {
        c_hat.set(i, i + 1, f.neg(1));
    }
    let b = c_hat.inverse();
    let mut shifted = vec![0u8; n - 1];
    shifted[1..].copy_from_slice(&u[..n - 2]);
    Ok(check_block_commutator(u, &b)? && first_row(n, f, u).comm(&b) == first_row(n, f, &shifted))
}

/// For `u_1 = u_2 = 0`: `[t_12(1), [t_23(1), prod_{i=4}^n t_{3i}(u_{i-1})]] = (1 u; 0 e)`.
pub fn check_1row_double_commutator(n: usize, f: &Field, u: &[u8]) -> Result<bool> {
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    if u.len() != n - 1 {
        return Err(Error::WrongLength { expected: n - 1, got: u.len() });
    }
    if u[0] != 0 || u[1] != 0 {
        return Err(range_err("the one-row form needs u_1 = u_2 = 0"));
    }
    check_field_values(f, u)?;
    let inner = product(n, f, (4..=n).map(|i| t(n, f, 3, i, u[i - 2])));
    let a = t(n, f, 1, 2, 1).comm(&t(n, f, 2, 3, 1).comm(&inner));
    Ok(a == first_row(n, f, u))
}

/// `b t_{2n}(alpha b_23) t_{1,n-1}(beta b_{n-2,n-1})` is congruent modulo the center
/// to `s^{-1} b s` with `s = t_{3n}(alpha) t_{1,n-2}(-beta)`.
pub fn check_subcentral_inner_note(b: &UTElement, alpha: u8, beta: u8) -> Result<bool> {
    let (n, f) = (b.n(), b.field());
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    check_field_values(f, &[alpha, beta])?;
    let lhs = b
        .mul(&t(n, f, 2, n, f.mul(alpha, b.get(2, 3))))
        .mul(&t(n, f, 1, n - 1, f.mul(beta, b.get(n - 2, n - 1))));
    let s = t(n, f, 3, n, alpha).mul(&t(n, f, 1, n - 2, f.neg(beta)));
    lhs.center_congruent(&s.inverse().mul(b).mul(&s))
}

fn ut3_extraction_holds(a: &UTElement) -> bool {
    let (n, f) = (a.n(), a.field());
    t(n, f, 1, 2, 1).comm(a) == t(n, f, 1, 3, a.get(2, 3))
}

/// `[t_12(1), a] = t_13(a_23)` in `UT(3, F)`.
pub fn check_ut3_extraction(a: &UTElement) -> Result<bool> {
    if a.n() != 3 {
        return Err(Error::DimensionMismatch { left: a.n(), right: 3 });
    }
    Ok(ut3_extraction_holds(a))
}

/// The identities covered by the sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    ExtractionFirstCol,
    ExtractionLastRow,
    Y,
    YZ,
    YZSubstitution,
    ZX,
    BlockCommutator,
    BlockShift,
    OneRowDoubleCommutator,
    SubcentralInnerNote,
    Ut3Extraction,
}

impl Identity {
    pub const ALL: [Identity; 11] = [
        Identity::ExtractionFirstCol,
        Identity::ExtractionLastRow,
        Identity::Y,
        Identity::YZ,
        Identity::YZSubstitution,
        Identity::ZX,
        Identity::BlockCommutator,
        Identity::BlockShift,
        Identity::OneRowDoubleCommutator,
        Identity::SubcentralInnerNote,
        Identity::Ut3Extraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::ExtractionFirstCol => "extraction-first-col",
            Identity::ExtractionLastRow => "extraction-last-row",
            Identity::Y => "y",
            Identity::YZ => "yz",
            Identity::YZSubstitution => "yz-substitution",
            Identity::ZX => "zx",
            Identity::BlockCommutator => "block-commutator",
            Identity::BlockShift => "block-shift",
            Identity::OneRowDoubleCommutator => "one-row-double-commutator",
            Identity::SubcentralInnerNote => "subcentral-inner-note",
            Identity::Ut3Extraction => "ut3-extraction",
        }
    }

    /// Smallest dimension at which the identity has any instance.
    pub fn min_n(self) -> usize {
        match self {
            Identity::ExtractionFirstCol | Identity::ExtractionLastRow | Identity::Ut3Extraction => 3,
            Identity::Y | Identity::ZX => 4,
            Identity::YZ | Identity::YZSubstitution => 5,
            Identity::BlockCommutator
            | Identity::BlockShift
            | Identity::OneRowDoubleCommutator
            | Identity::SubcentralInnerNote => 4,
        }
    }

    pub fn applies(self, n: usize) -> bool {
        n >= self.min_n() && (self != Identity::Ut3Extraction || n == 3)
    }

    fn index(self) -> u64 {
        Identity::ALL.iter().position(|&x| x == self).unwrap() as u64
    }
}

/// One concrete argument tuple for an identity.
#[derive(Clone, Debug)]
pub enum Instance {
    /// Element plus up to two indices (`k` of the ZX check goes in `i`).
    Element { a: UTElement, i: usize, j: usize },
    /// Scalar parameters; `k = 0` marks a first-row vector `u` of length `n - 1`.
    Params { n: usize, field: Field, k: usize, j: usize, scalars: Vec<u8> },
    Block { u: Vec<u8>, b: UTElement },
    Note { b: UTElement, alpha: u8, beta: u8 },
}

impl Instance {
    pub fn to_json(&self) -> Value {
        match self {
            Instance::Element { a, i, j } => {
                json!({"a": crate::matrix::ElementJson::from(a), "i": i, "j": j})
            }
            Instance::Params { n, field, k, j, scalars } => {
                json!({"n": n, "p": field.p(), "k_field": field.k(), "k": k, "j": j, "scalars": scalars})
            }
            Instance::Block { u, b } => json!({"u": u, "b": crate::matrix::ElementJson::from(b)}),
            Instance::Note { b, alpha, beta } => {
                json!({"b": crate::matrix::ElementJson::from(b), "alpha": alpha, "beta": beta})
            }
        }
    }

    /// The same instance inside `UT(n2, F)`: elements are padded with identity
    /// rows and columns, row vectors with zeros.
    pub fn embed(&self, n2: usize) -> Result<Instance> {
        Ok(match self {
            Instance::Element { a, i, j } => Instance::Element { a: a.embed(n2)?, i: *i, j: *j },
            Instance::Params { field, k, j, scalars, .. } => {
                let mut scalars = scalars.clone();
                if *k == 0 {
                    scalars.resize(n2 - 1, 0);
                }
                Instance::Params { n: n2, field: field.clone(), k: *k, j: *j, scalars }
            }
            Instance::Block { u, b } => {
                let mut u2 = u.clone();
                u2.resize(n2 - 1, 0);
                Instance::Block { u: u2, b: b.embed(n2)? }
            }
            Instance::Note { b, alpha, beta } => Instance::Note { b: b.embed(n2)?, alpha: *alpha, beta: *beta },
        })
    }
}

/// Evaluates `id` on `inst`. The UT(3) extraction is evaluated in its
/// dimension-free form so that embedded instances stay meaningful.
pub fn evaluate(id: Identity, inst: &Instance) -> Result<bool> {
    match (id, inst) {
        (Identity::ExtractionFirstCol, Instance::Element { a, i, j }) => check_extraction_first_col(a, *i, *j),
        (Identity::ExtractionLastRow, Instance::Element { a, i, j }) => check_extraction_last_row(a, *i, *j),
        (Identity::ZX, Instance::Element { a, i, .. }) => check_zx_identity(a, *i),
        (Identity::Ut3Extraction, Instance::Element { a, .. }) => Ok(ut3_extraction_holds(a)),
        (Identity::Y, Instance::Params { n, field, k, j, scalars }) => {
            check_y_identity(*n, field, *k, scalars[0], &scalars[1..], *j)
        }
        (Identity::YZ, Instance::Params { n, field, k, scalars, .. }) => {
            check_yz_identity(*n, field, *k, scalars[0], &scalars[1..])
        }
        (Identity::YZSubstitution, Instance::Params { n, field, k, scalars, .. }) => {
            check_yz_substitution(*n, field, *k, scalars)
        }
        (Identity::OneRowDoubleCommutator, Instance::Params { n, field, scalars, .. }) => {
            check_1row_double_commutator(*n, field, scalars)
        }
        (Identity::BlockShift, Instance::Params { n, field, scalars, .. }) => check_block_shift(*n, field, scalars),
        (Identity::BlockCommutator, Instance::Block { u, b }) => check_block_commutator(u, b),
        (Identity::SubcentralInnerNote, Instance::Note { b, alpha, beta }) => {
            check_subcentral_inner_note(b, *alpha, *beta)
        }
        _ => Err(Error::Precondition(format!("instance shape does not fit {}", id.name()))),
    }
}

/// How a sweep chooses its instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

/// Seed of the random sweep for one identity on `UT(n, F_q)`:
/// `seed * 1_000_003 + 10_000 * n + 100 * q + index(identity)` (wrapping).
pub fn sweep_seed(seed: u64, n: usize, q: usize, id: Identity) -> u64 {
    seed.wrapping_mul(1_000_003)
        .wrapping_add(10_000 * n as u64)
        .wrapping_add(100 * q as u64)
        .wrapping_add(id.index())
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: Identity,
    pub n: usize,
    pub q: usize,
    pub mode: &'static str,
    pub instances: u64,
    pub failures: u64,
    pub counterexample: Option<Value>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn tuples(f: &Field, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| f.values().map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn random_values(f: &Field, len: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..f.order()) as u8).collect()
}

fn index_pairs(id: Identity, n: usize) -> Vec<(usize, usize)> {
    match id {
        Identity::ExtractionFirstCol | Identity::ExtractionLastRow => {
            (2..n).flat_map(|i| (2..n).map(move |j| (i, j))).collect()
        }
        Identity::ZX => (1..=n - 3).map(|k| (k, 0)).collect(),
        _ => vec![(0, 0)],
    }
}

/// Every instance of `id` on `UT(n, F)`.
pub fn exhaustive_instances(id: Identity, n: usize, f: &Field) -> Result<Vec<Instance>> {
    if !id.applies(n) {
        return Ok(Vec::new());
    }
    let order = UTElement::group_order(n, f);
    let needs_group = matches!(
        id,
        Identity::ExtractionFirstCol
            | Identity::ExtractionLastRow
            | Identity::ZX
            | Identity::Ut3Extraction
            | Identity::BlockCommutator
            | Identity::SubcentralInnerNote
    );
    if needs_group && order > EXHAUSTIVE_BOUND {
        return Err(Error::OverBound { order, bound: EXHAUSTIVE_BOUND as usize });
    }
    let params = |k: usize, j: usize, scalars: Vec<u8>| Instance::Params { n, field: f.clone(), k, j, scalars };
    Ok(match id {
        Identity::ExtractionFirstCol | Identity::ExtractionLastRow | Identity::ZX | Identity::Ut3Extraction => {
            let pairs = index_pairs(id, n);
            UTElement::all(n, f)
                .flat_map(|a| pairs.iter().map(move |&(i, j)| Instance::Element { a: a.clone(), i, j }))
                .collect()
        }
        Identity::Y => (1..=n - 3)
            .flat_map(|k| (k + 1..n).flat_map(move |j| tuples(f, k).into_iter().map(move |s| (k, j, s))))
            .map(|(k, j, s)| params(k, j, s))
            .collect(),
        Identity::YZ => (2..=n - 3).flat_map(|k| tuples(f, k).into_iter().map(move |s| (k, s))).map(|(k, s)| params(k, 0, s)).collect(),
        Identity::YZSubstitution => (2..=n - 3)
            .flat_map(|k| tuples(f, k).into_iter().filter(|s| s[s.len() - 1] != 0).map(move |s| (k, s)))
            .map(|(k, s)| params(k, 0, s))
            .collect(),
        Identity::OneRowDoubleCommutator => {
            tuples(f, n - 3).into_iter().map(|tail| params(0, 0, [vec![0, 0], tail].concat())).collect()
        }
        Identity::BlockShift => tuples(f, n - 1).into_iter().map(|u| params(0, 0, u)).collect(),
        Identity::BlockCommutator => {
            let us = tuples(f, n - 1);
            UTElement::all(n, f)
                .flat_map(|b| us.iter().map(move |u| Instance::Block { u: u.clone(), b: b.clone() }))
                .collect()
        }
        Identity::SubcentralInnerNote => UTElement::all(n, f)
            .flat_map(|b| {
                f.values().flat_map(move |alpha| {
                    let b = b.clone();
                    f.values().map(move |beta| Instance::Note { b: b.clone(), alpha, beta })
                })
            })
            .collect(),
    })
}

/// `count` random instances of `id` on `UT(n, F)`, reproducible from `seed`.
pub fn random_instances(id: Identity, n: usize, f: &Field, count: usize, seed: u64) -> Vec<Instance> {
    if !id.applies(n) {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rng = &mut rng;
            match id {
                Identity::ExtractionFirstCol | Identity::ExtractionLastRow => Instance::Element {
                    a: random_element(n, f, rng),
                    i: rng.gen_range(2..n),
                    j: rng.gen_range(2..n),
                },
                Identity::ZX => Instance::Element { a: random_element(n, f, rng), i: rng.gen_range(1..=n - 3), j: 0 },
                Identity::Ut3Extraction => Instance::Element { a: random_element(n, f, rng), i: 0, j: 0 },
                Identity::Y => {
                    let k = rng.gen_range(1..=n - 3);
                    let j = rng.gen_range(k + 1..n);
                    Instance::Params { n, field: f.clone(), k, j, scalars: random_values(f, k, rng) }
                }
                Identity::YZ | Identity::YZSubstitution => {
                    let k = rng.gen_range(2..=n - 3);
                    let mut scalars = random_values(f, k, rng);
                    if id == Identity::YZSubstitution {
                        scalars[k - 1] = rng.gen_range(1..f.order()) as u8;
                    }
                    Instance::Params { n, field: f.clone(), k, j: 0, scalars }
                }
                Identity::OneRowDoubleCommutator => {
                    let tail = random_values(f, n - 3, rng);
                    Instance::Params { n, field: f.clone(), k: 0, j: 0, scalars: [vec![0, 0], tail].concat() }
                }
                Identity::BlockShift => {
                    Instance::Params { n, field: f.clone(), k: 0, j: 0, scalars: random_values(f, n - 1, rng) }
                }
                Identity::BlockCommutator => {
                    Instance::Block { u: random_values(f, n - 1, rng), b: random_element(n, f, rng) }
                }
                Identity::SubcentralInnerNote => {
                    let v = random_values(f, 2, rng);
                    Instance::Note { b: random_element(n, f, rng), alpha: v[0], beta: v[1] }
                }
            }
        })
        .collect()
}

fn report(id: Identity, n: usize, q: usize, mode: &'static str, instances: &[Instance], ok: impl Fn(&Instance) -> Result<bool> + Sync) -> Result<IdentityReport> {
    let results: Vec<bool> = instances.par_iter().map(&ok).collect::<Result<_>>()?;
    let failures = results.iter().filter(|&&r| !r).count() as u64;
    let counterexample = results.iter().position(|&r| !r).map(|p| instances[p].to_json());
    Ok(IdentityReport { identity: id, n, q, mode, instances: instances.len() as u64, failures, counterexample })
}

/// Runs every identity on `UT(n, F)`.
pub fn sweep(n: usize, f: &Field, mode: SweepMode) -> Result<Vec<IdentityReport>> {
    Identity::ALL
        .iter()
        .map(|&id| {
            let (label, instances) = match mode {
                SweepMode::Exhaustive => ("exhaustive", exhaustive_instances(id, n, f)?),
                SweepMode::Random { count, seed } => {
                    ("random", random_instances(id, n, f, count, sweep_seed(seed, n, f.order(), id)))
                }
            };
            report(id, n, f.order(), label, &instances, |inst| evaluate(id, inst))
        })
        .collect()
}

/// For random instances on `UT(n, F)`, checks that each identity's truth value
/// is the same after embedding into every `UT(n2, F)`, `n < n2 <= max_n`.
pub fn embed_invariance(n: usize, f: &Field, count: usize, seed: u64, max_n: usize) -> Result<Vec<IdentityReport>> {
    Identity::ALL
        .iter()
        .map(|&id| {
            let instances = random_instances(id, n, f, count, sweep_seed(seed, n, f.order(), id));
            report(id, n, f.order(), "embed", &instances, |inst| {
                let base = evaluate(id, inst)?;
                for n2 in n + 1..=max_n {
                    if evaluate(id, &inst.embed(n2)?)? != base {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u32) -> Field {
        Field::from_order(q).unwrap()
    }

    #[test]
    fn trivial_arguments() {
        let f = field(5);
        let e6 = UTElement::identity(6, &f);
        assert!(check_extraction_first_col(&e6, 2, 4).unwrap());
        assert!(check_extraction_last_row(&e6, 3, 2).unwrap());
        assert!(check_zx_identity(&e6, 2).unwrap());
        assert!(check_block_commutator(&[0; 5], &random_element(6, &f, &mut ChaCha8Rng::seed_from_u64(1))).unwrap());
        assert!(check_1row_double_commutator(6, &f, &[0; 5]).unwrap());
        assert!(check_subcentral_inner_note(&e6, 0, 0).unwrap());
        assert!(check_ut3_extraction(&UTElement::identity(3, &f)).unwrap());
        for j in 2..6 {
            assert!(check_y_identity(6, &f, 1, 0, &[], j).unwrap());
        }
    }

    #[test]
    fn index_errors() {
        let f = field(3);
        let a = UTElement::identity(5, &f);
        assert!(check_extraction_first_col(&a, 1, 2).is_err());
        assert!(check_extraction_last_row(&a, 2, 5).is_err());
        assert!(check_zx_identity(&a, 3).is_err());
        assert!(check_y_identity(5, &f, 1, 1, &[], 1).is_err());
        assert!(check_yz_identity(5, &f, 1, 1, &[]).is_err());
        assert!(check_yz_substitution(5, &f, 2, &[1, 0]).is_err());
        assert!(check_1row_double_commutator(5, &f, &[0, 1, 0, 0]).is_err());
        assert!(check_ut3_extraction(&a).is_err());
        assert!(check_block_commutator(&[0, 0], &UTElement::identity(3, &f)).is_err());
    }

    #[test]
    fn extraction_on_a_transvection() {
        // a = t_{24}(alpha): a^{-1} = t_{24}(-alpha), so only (i, j) = (2, 4) picks up -alpha.
        let f = field(5);
        let a = UTElement::t(6, &f, 2, 4, 3);
        for i in 2..6 {
            for j in 2..6 {
                assert!(check_extraction_first_col(&a, i, j).unwrap());
                let c = UTElement::t(6, &f, 1, i, f.neg(1)).comm(&a).comm(&UTElement::t(6, &f, j, j + 1, 1));
                let v = if (i, j) == (2, 4) { f.neg(3) } else { 0 };
                assert_eq!(c, UTElement::t(6, &f, 1, j + 1, v));
                assert!(check_extraction_last_row(&a, i, j).unwrap());
            }
        }
    }

    #[test]
    fn literal_diagonal_reading_fails() {
        // With a'_{ii} = 1 the collapsed formula would predict t_{1,i+1}(1).
        let f = field(3);
        let a = UTElement::identity(5, &f);
        let c = UTElement::t(5, &f, 1, 3, f.neg(1)).comm(&a).comm(&UTElement::t(5, &f, 3, 4, 1));
        assert_ne!(c, UTElement::t(5, &f, 1, 4, 1));
        assert!(c.is_identity());
    }

    #[test]
    fn y_identity_cases() {
        let f = field(5);
        let y = |beta| {
            let k = 1;
            t(5, &f, k + 1, k + 2, beta)
        };
        assert_eq!(t(5, &f, 3, 4, f.neg(1)).comm(&y(2)), t(5, &f, 2, 4, 2));
        assert!(check_y_identity(5, &f, 1, 2, &[], 3).unwrap());
        assert!(check_y_identity(6, &f, 2, 4, &[1], 5).unwrap());
        assert!(check_y_identity(6, &f, 2, 4, &[1], 4).unwrap());
    }

    #[test]
    fn yz_cases() {
        let f = field(5);
        assert!(check_yz_identity(5, &f, 2, 3, &[0]).unwrap());
        for beta in 0..5 {
            for a1 in 0..5 {
                assert!(check_yz_identity(5, &f, 2, beta, &[a1]).unwrap());
            }
        }
        assert!(check_yz_substitution(5, &f, 2, &[1, 2]).unwrap());
        let z = t(5, &f, 1, 5, 1).mul(&t(5, &f, 2, 5, 2));
        let y = y_element(5, &f, 2, 2, &[f.div(1, 2).unwrap()]);
        assert_eq!(y.comm(&t(5, &f, 2, 3, f.neg(1))).comm(&t(5, &f, 4, 5, 1)), z);
    }

    #[test]
    fn zx_cases() {
        let f = field(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_element(7, &f, &mut rng);
            for k in 1..=4 {
                assert!(check_zx_identity(&a, k).unwrap());
            }
        }
        for k in 1..=4 {
            let a = t(7, &f, 1, k + 1, 2);
            let c = a.comm(&t(7, &f, k + 1, k + 2, 1)).comm(&t(7, &f, k + 2, k + 3, 1));
            assert_eq!(c, t(7, &f, 1, k + 3, 2));
        }
    }

    #[test]
    fn block_cases() {
        let f = field(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_values(&f, 5, &mut rng);
        // b~ = e: only the first row of b is nontrivial.
        let b = first_row(6, &f, &[1, 2, 3, 4, 0]);
        assert!(first_row(6, &f, &u).comm(&b).is_identity());
        assert!(check_block_commutator(&u, &b).unwrap());
        assert!(check_block_shift(6, &f, &u).unwrap());
    }

    #[test]
    fn one_row_cases() {
        let f = field(9);
        assert_eq!(
            t(4, &f, 1, 2, 1).comm(&t(4, &f, 2, 3, 1).comm(&t(4, &f, 3, 4, 5))),
            t(4, &f, 1, 4, 5)
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tail = random_values(&f, 3, &mut rng);
        assert!(check_1row_double_commutator(6, &f, &[vec![0, 0], tail].concat()).unwrap());
    }

    #[test]
    fn subcentral_note_sign() {
        let f = field(3);
        for b in UTElement::all(4, &f) {
            assert!(check_subcentral_inner_note(&b, 1, 0).unwrap());
        }
        // The other conjugation direction flips the signs.
        let b = t(4, &f, 2, 3, 1);
        let s = t(4, &f, 3, 4, 1);
        let lhs = b.mul(&t(4, &f, 2, 4, 1));
        assert!(!lhs.center_congruent(&s.mul(&b).mul(&s.inverse())).unwrap());
        let f2 = field(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert!(check_subcentral_inner_note(&random_element(5, &f2, &mut rng), 1, 1).unwrap());
        }
    }

    #[test]
    fn ut3_cases() {
        let f = field(3);
        for a in UTElement::all(3, &f) {
            assert!(check_ut3_extraction(&a).unwrap());
        }
        assert!(t(3, &f, 1, 2, 1).comm(&t(3, &f, 1, 3, 2)).is_identity());
    }

    #[test]
    fn exhaustive_small_sweeps() {
        for (n, q) in [(3, 2), (4, 2), (3, 3), (4, 3)] {
            for r in sweep(n, &field(q), SweepMode::Exhaustive).unwrap() {
                assert!(r.passed(), "{r:?}");
            }
        }
    }

    #[test]
    fn random_sweeps_are_reproducible() {
        let f = field(4);
        let a = sweep(6, &f, SweepMode::Random { count: 50, seed: 9 }).unwrap();
        let b = sweep(6, &f, SweepMode::Random { count: 50, seed: 9 }).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.passed());
            assert_eq!(x.instances, y.instances);
        }
        let ids: Vec<_> = Identity::ALL.iter().map(|&id| sweep_seed(0, 6, 4, id)).collect();
        let mut dedup = ids.clone();
        dedup.dedup();
        assert_eq!(ids, dedup);
    }

    #[test]
    fn embedding_keeps_truth_values() {
        for r in embed_invariance(5, &field(3), 20, 0, 9).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }
}

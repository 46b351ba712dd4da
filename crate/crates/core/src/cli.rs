//! Command-line front end. Every command writes JSON (newline-delimited for
//! streams) to the given writer.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::acceptance;
use crate::enumerate::{
    central_set, decompose_pc_map, enumerate_pc_maps, generate_standard_set, Constraint, GroupTable, Ix, MapSet,
    DEFAULT_BUDGET, DEFAULT_BOUND,
};
use crate::enumerate::standard::DEFAULT_PARAM_BUDGET;
use crate::error::{Error, Result};
use crate::factor::{factor_commutator, factor_double_commutator};
use crate::field::Field;
use crate::identities::{sweep, SweepMode};
use crate::matrix::{ElementJson, UTElement};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "utpc", version, about = "Unitriangular groups and commutator-preserving maps")]
struct Cli {
    /// Worker threads for parallel sweeps and checks.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Group {
    #[arg(long)]
    n: usize,
    /// Field order, as `q` or `p^k`.
    #[arg(long)]
    q: String,
}

#[derive(Args, Debug)]
struct OneElement {
    #[command(flatten)]
    group: Group,
    /// Element as a JSON entry list or `{"n", "p", "k", "entries"}` object.
    #[arg(long)]
    a: String,
}

#[derive(Args, Debug)]
struct TwoElements {
    #[command(flatten)]
    group: Group,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parameters of F_q.
    FieldInfo {
        #[arg(long)]
        q: String,
    },
    /// Product a b.
    Mul(TwoElements),
    /// Inverse a^-1.
    Inverse(OneElement),
    /// [a, b] = a b a^-1 b^-1.
    Commutator(TwoElements),
    /// b, c with [b, c] = a.
    Factor(OneElement),
    /// x, y, z with [x, [y, z]] = a.
    FactorDouble(OneElement),
    /// Every PC-map of UT(n, F_q), compared with the standard construction.
    Enumerate {
        #[command(flatten)]
        group: Group,
        /// Only maps fixing every transvection.
        #[arg(long)]
        almost_identity: bool,
        /// Branching-node budget of the search.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Maximum number of map tables printed.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
    /// Splits a PC-map table into standard factors.
    Decompose {
        #[command(flatten)]
        group: Group,
        /// JSON file holding an index array or an object with a `perm` array.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        table: Option<PathBuf>,
        /// Decompose a random standard composition instead.
        #[arg(long)]
        random: bool,
    },
    /// Runs the identity checks on UT(n, F_q).
    VerifyIdentities {
        #[command(flatten)]
        group: Group,
        /// Every instance instead of a random sample.
        #[arg(long)]
        exhaustive: bool,
        /// Random instances per identity.
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Runs the full acceptance suite.
    Acceptance,
}

enum Outcome {
    Pass,
    Fail,
}

fn field(q: &str) -> Result<Field> {
    Field::from_order_str(q)
}

fn parse_element(s: &str, n: usize, f: &Field) -> Result<UTElement> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    match v {
        Value::Array(_) => {
            let entries: Vec<u8> = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
            UTElement::from_entries(n, f, entries)
        }
        _ => {
            let ej: ElementJson = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
            if ej.n != n || ej.p != f.p() || ej.k != f.k() {
                return Err(Error::Parse(format!(
                    "element header (n={}, p={}, k={}) does not match the group",
                    ej.n, ej.p, ej.k
                )));
            }
            ej.to_element()
        }
    }
}

fn elem_json(a: &UTElement) -> Value {
    serde_json::to_value(ElementJson::from(a)).expect("element serializes")
}

fn line(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{v}").map_err(|e| Error::Parse(format!("write failed: {e}")))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_PASS;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "{}", json!({"error": e.to_string()}));
            return EXIT_USAGE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| execute(&cli, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(Outcome::Pass) => EXIT_PASS,
        Ok(Outcome::Fail) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "{}", json!({"error": e.to_string()}));
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    match &cli.command {
        Command::FieldInfo { q } => {
            let f = field(q)?;
            line(
                out,
                &json!({
                    "p": f.p(),
                    "k": f.k(),
                    "order": f.order(),
                    "modulus": f.modulus(),
                    "generator": f.generator(),
                    "basis": f.basis(),
                }),
            )?;
        }
        Command::Mul(args) | Command::Commutator(args) => {
            let f = field(&args.group.q)?;
            let a = parse_element(&args.a, args.group.n, &f)?;
            let b = parse_element(&args.b, args.group.n, &f)?;
            let c = if matches!(cli.command, Command::Mul(_)) { a.multiply(&b)? } else { a.commutator(&b)? };
            line(out, &elem_json(&c))?;
        }
        Command::Inverse(args) => {
            let f = field(&args.group.q)?;
            line(out, &elem_json(&parse_element(&args.a, args.group.n, &f)?.inverse()))?;
        }
        Command::Factor(args) => {
            let f = field(&args.group.q)?;
            let (b, c) = factor_commutator(&parse_element(&args.a, args.group.n, &f)?)?;
            line(out, &json!({"b": elem_json(&b), "c": elem_json(&c)}))?;
        }
        Command::FactorDouble(args) => {
            let f = field(&args.group.q)?;
            let (x, y, z) = factor_double_commutator(&parse_element(&args.a, args.group.n, &f)?)?;
            line(out, &json!({"x": elem_json(&x), "y": elem_json(&y), "z": elem_json(&z)}))?;
        }
        Command::Enumerate { group, almost_identity, budget, limit } => {
            return enumerate(group, *almost_identity, *budget, *limit, out);
        }
        Command::Decompose { group, table, random } => {
            let f = field(&group.q)?;
            let t = Arc::new(GroupTable::build_bounded(group.n, &f, DEFAULT_BOUND)?);
            let phi: Vec<Ix> = if *random {
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                acceptance::random_standard_composition(&t, &mut rng)?.images(&t)?
            } else {
                let path = table.as_ref().expect("clap requires --table without --random");
                let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                let perm = v.get("perm").cloned().unwrap_or(v);
                serde_json::from_value(perm).map_err(|e| Error::Parse(e.to_string()))?
            };
            match decompose_pc_map(t, &phi) {
                Ok(d) => line(out, &d.to_json())?,
                Err(e @ (Error::NoDecomposition(_) | Error::Precondition(_))) => {
                    line(out, &json!({"decomposed": false, "reason": e.to_string(), "perm": phi}))?;
                    return Ok(Outcome::Fail);
                }
                Err(e) => return Err(e),
            }
        }
        Command::VerifyIdentities { group, exhaustive, count } => {
            let f = field(&group.q)?;
            let mode = if *exhaustive {
                SweepMode::Exhaustive
            } else {
                SweepMode::Random { count: *count, seed: cli.seed }
            };
            let reports = sweep(group.n, &f, mode)?;
            let mut ok = true;
            for r in &reports {
                ok &= r.passed();
                let mut v = serde_json::to_value(r).expect("report serializes");
                v["status"] = json!(if r.instances == 0 {
                    "skipped"
                } else if r.passed() {
                    "pass"
                } else {
                    "fail"
                });
                line(out, &v)?;
            }
            return Ok(if ok { Outcome::Pass } else { Outcome::Fail });
        }
        Command::Acceptance => {
            let results = acceptance::run_all(cli.seed);
            for r in &results {
                line(out, &serde_json::to_value(r).expect("result serializes"))?;
            }
            let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
            line(out, &json!({"kind": "summary", "passed": failed.is_empty(), "failed": failed}))?;
            return Ok(if failed.is_empty() { Outcome::Pass } else { Outcome::Fail });
        }
    }
    Ok(Outcome::Pass)
}

fn set_summary(set: &MapSet) -> Value {
    json!({
        "count": set.count().to_string(),
        "fingerprints": acceptance::FINGERPRINT_SEEDS.iter().map(|&s| set.fingerprint(s)).collect::<Vec<_>>(),
    })
}

fn enumerate(group: &Group, almost_identity: bool, budget: u64, limit: usize, out: &mut dyn Write) -> Result<Outcome> {
    let f = field(&group.q)?;
    let t = Arc::new(GroupTable::build_bounded(group.n, &f, DEFAULT_BOUND)?);
    let constraint = if almost_identity { Constraint::AlmostIdentity } else { Constraint::None };
    let found = enumerate_pc_maps(t.clone(), constraint, budget)?;
    let mut summary = set_summary(&found.set);
    summary["kind"] = json!("summary");
    summary["group"] = json!({"n": group.n, "p": f.p(), "k": f.k(), "order": t.order()});
    summary["constraint"] = json!(if almost_identity { "almost-identity" } else { "none" });
    summary["element_order"] = json!("index = strictly-upper entries, row-major, read as a base-q numeral");
    summary["search_nodes"] = json!(found.stats.nodes);
    line(out, &summary)?;

    let shown = found.set.expand(limit);
    for perm in &shown {
        line(out, &json!({"kind": "map", "perm": perm}))?;
    }
    let total = found.set.count();
    if total > num_bigint::BigUint::from(shown.len()) {
        line(out, &json!({"kind": "truncated", "emitted": shown.len(), "total": total.to_string()}))?;
    }

    // Almost-identity maps against the central ones fixing transvections;
    // all maps against the standard compositions. The latter is only a theorem
    // outside characteristic 2, so there it is reported without a verdict.
    let (reference, name) = if almost_identity {
        (central_set(t.clone(), true), "central maps fixing transvections")
    } else {
        (generate_standard_set(t.clone(), DEFAULT_PARAM_BUDGET)?.set, "standard compositions")
    };
    let equal = reference.count() == found.set.count()
        && acceptance::FINGERPRINT_SEEDS.iter().all(|&s| reference.fingerprint(s) == found.set.fingerprint(s));
    let judged = almost_identity || f.p() != 2;
    let mut cmp = set_summary(&reference);
    cmp["kind"] = json!("comparison");
    cmp["reference"] = json!(name);
    cmp["equal"] = json!(equal);
    cmp["judged"] = json!(judged);
    line(out, &cmp)?;
    Ok(if equal || !judged { Outcome::Pass } else { Outcome::Fail })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("utpc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
    }

    #[test]
    fn commutator_command() {
        let (code, out) = run_str(&["commutator", "--n", "3", "--q", "3", "--a", "[1,0,0]", "--b", "[0,0,1]"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["entries"], json!([0, 1, 0]));
    }

    #[test]
    fn element_object_input() {
        let a = r#"{"n":3,"p":3,"k":1,"entries":[1,2,0]}"#;
        let (code, out) = run_str(&["inverse", "--n", "3", "--q", "3^1", "--a", a]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["entries"], json!([2, 1, 0]));
        let (code, _) = run_str(&["inverse", "--n", "4", "--q", "3", "--a", a]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["mul", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["nonsense"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["field-info", "--q", "6"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["factor", "--n", "3", "--q", "2", "--a", "[1,0,0]"]).0, EXIT_USAGE);
    }

    #[test]
    fn enumerate_ut3_f2_lists_every_map() {
        let (code, out) = run_str(&["enumerate", "--n", "3", "--q", "2"]);
        assert_eq!(code, 0);
        let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines[0]["count"], "48");
        assert_eq!(lines.iter().filter(|l| l["kind"] == "map").count(), 48);
        assert_eq!(lines.last().unwrap()["kind"], "comparison");
        let (_, again) = run_str(&["enumerate", "--n", "3", "--q", "2"]);
        assert_eq!(out, again);
    }

    #[test]
    fn enumerate_truncates() {
        let (code, out) = run_str(&["enumerate", "--n", "3", "--q", "3", "--almost-identity", "--limit", "5"]);
        assert_eq!(code, 0);
        let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.iter().filter(|l| l["kind"] == "map").count(), 5);
        assert!(lines.iter().any(|l| l["kind"] == "truncated"));
        assert_eq!(lines.last().unwrap()["equal"], true);
    }

    #[test]
    fn decompose_random_and_file() {
        let (code, out) = run_str(&["decompose", "--n", "4", "--q", "3", "--random", "--seed", "3"]);
        assert_eq!(code, 0, "{out}");
        let dir = std::env::temp_dir().join(format!("utpc-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        let mut perm: Vec<usize> = (0..27).collect();
        perm.swap(1, 2);
        perm.swap(3, 9);
        std::fs::write(&path, serde_json::to_string(&perm).unwrap()).unwrap();
        let (code, _) = run_str(&["decompose", "--n", "3", "--q", "3", "--table", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_FAIL);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn verify_identities_command() {
        let (code, out) = run_str(&["verify-identities", "--n", "4", "--q", "2", "--exhaustive"]);
        assert_eq!(code, 0);
        assert!(out.lines().all(|l| !l.contains("\"fail\"")));
    }
}

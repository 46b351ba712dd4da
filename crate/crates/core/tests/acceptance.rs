//! Runs the eight acceptance criteria and prints one line per criterion.

use utpc::acceptance::{self, CriterionResult};

fn main() {
    let runs: [fn(u64) -> CriterionResult; 8] = [
        acceptance::criterion_1,
        |_| acceptance::criterion_2(),
        |_| acceptance::criterion_3(),
        acceptance::criterion_4,
        acceptance::criterion_5,
        acceptance::criterion_6,
        acceptance::criterion_7,
        acceptance::criterion_8,
    ];
    let mut failed = Vec::new();
    for run in runs {
        let r = run(0);
        println!("{r}");
        println!("  {}", r.details);
        if !r.passed {
            failed.push(r.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

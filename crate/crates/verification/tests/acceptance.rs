//! Runs every acceptance criterion and prints one PASS/FAIL line each. The
//! process exits with status 1 when any criterion fails.

use std::path::Path;
use std::process::ExitCode;

use baplab_verification as v;

fn main() -> ExitCode {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let criteria: Vec<(&str, v::Criterion)> = vec![
        ("conservation", Box::new(v::conservation)),
        ("maximum principle", Box::new(v::maximum_principle)),
        ("L1 contraction", Box::new(v::l1_contraction)),
        ("L2 monotonicity", Box::new(v::l2_monotonicity)),
        ("non-degeneracy checker", Box::new(v::nondegeneracy_checker)),
        ("decay dichotomy", Box::new(v::decay_dichotomy)),
        ("kinetic identities", Box::new(v::kinetic_identities)),
        ("spectral tail uniformity", Box::new(v::spectral_tail)),
        ("determinism", Box::new(move || v::determinism(&root))),
    ];
    let mut failed = 0;
    println!("\nacceptance criteria");
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (status, detail) = match check() {
            Ok(c) => (if c.pass { "PASS" } else { "FAIL" }, c.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {}. {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed\n", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::io::Write;

use opindex_verify::{is_unattainable, run, UNATTAINABLE};

#[test]
fn acceptance() {
    let outcomes = run("all").expect("all criteria");
    // Straight to the stderr handle so the table shows without --nocapture.
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for o in &outcomes {
        writeln!(err, "{o}").unwrap();
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    writeln!(err, "{passed}/{} criteria pass", outcomes.len()).unwrap();
    for (id, check, reason) in UNATTAINABLE {
        writeln!(err, "criterion {id}, `{check}`: {reason}").unwrap();
    }
    drop(err);

    // Everything passes except the checks recorded as unattainable, which
    // must still fail for exactly the recorded reason.
    for o in &outcomes {
        assert!(o.within_limit(), "criterion {} took {} ms (limit {} ms)", o.id, o.elapsed_ms, o.limit_ms);
        for c in &o.checks {
            let expected = !is_unattainable(o.id, &c.name);
            assert_eq!(c.passed, expected, "criterion {}: `{}`: {}", o.id, c.name, c.detail);
        }
    }
    for (id, check, _) in UNATTAINABLE {
        let o = outcomes.iter().find(|o| o.id == *id).expect("criterion ran");
        assert!(o.checks.iter().any(|c| c.name == *check), "criterion {id} has no check `{check}`");
    }
}

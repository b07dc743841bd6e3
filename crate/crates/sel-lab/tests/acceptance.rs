//! Acceptance gate: one pass/fail line per criterion, all driven by the same
//! validation suite the `sel-lab validate` command runs.

use sel_lab::validate::{run_validation, CheckResult, Level};

/// Criterion number → the validation checks that constitute it.
const CRITERIA: [(usize, &str, &[&str]); 9] = [
    (1, "limit-case constants", &["limit-constants/mean", "limit-constants/second"]),
    (2, "vacuum limit", &["vacuum-limit/closed-form", "vacuum-limit/steady-state"]),
    (3, "limit-ODE identities", &["limit-ode/case-1", "limit-ode/case-2"]),
    (4, "continuity-relation exactness", &["continuity-relation"]),
    (5, "figure-grid reproduction", &["figure-grid/mean-n", "figure-grid/mandel-q"]),
    (6, "qualitative curve features", &["self-quenching", "antibunching"]),
    (7, "singular-transform reconstruction", &["p-to-q-reconstruction"]),
    (
        8,
        "internal consistency",
        &[
            "consistency/husimi-moment",
            "consistency/husimi-positive",
            "consistency/trace-preserving",
            "consistency/uniqueness",
            "consistency/self-convergence",
        ],
    ),
    (
        9,
        "residual diagnostics",
        &["diagnostics/stationary-system", "diagnostics/fifth-order"],
    ),
];

#[test]
fn acceptance() {
    let report = run_validation(Level::Quick);
    let find = |name: &str| -> &CheckResult {
        report
            .checks
            .iter()
            .find(|c| c.name == name)
            .unwrap_or_else(|| panic!("validation suite lacks check `{name}`"))
    };
    let mut all_ok = true;
    for (num, title, names) in CRITERIA {
        let ok = names.iter().all(|n| find(n).passed);
        all_ok &= ok;
        println!(
            "criterion {num} ({title}): {}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            for n in names {
                let c = find(n);
                println!(
                    "    {} -> measured {:.4e} vs bound {:.1e} ({})",
                    c.name, c.measured, c.bound, c.detail
                );
            }
        }
    }
    // every check must be claimed by some criterion so nothing silently
    // drops out of the gate
    for c in &report.checks {
        assert!(
            CRITERIA.iter().any(|(_, _, names)| names.contains(&c.name)),
            "check `{}` not mapped to a criterion",
            c.name
        );
    }
    assert!(all_ok, "\n{}", report.render());
}

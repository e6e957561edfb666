use virasoro_core::virasoro::{run_identity_suite, SuiteConfig};

#[test]
fn identity_suite_passes() {
    let checks = run_identity_suite(&SuiteConfig::default()).unwrap();
    for c in &checks {
        println!("{:<28} {:.3e} < {:.0e}", c.name, c.max_residual, c.tolerance);
    }
    assert!(checks.iter().all(|c| c.passed()));
}

#[test]
fn corrupted_adjoint_is_detected() {
    let cfg = SuiteConfig {
        corrupt: true,
        instances: 5,
        ..SuiteConfig::default()
    };
    let checks = run_identity_suite(&cfg).unwrap();
    let dual = checks.iter().find(|c| c.name == "adjoint_duality").unwrap();
    assert!(!dual.passed(), "residual {}", dual.max_residual);
    let cocycle = checks.iter().find(|c| c.name == "bott_cocycle_identity").unwrap();
    assert!(cocycle.passed());
}

#[test]
fn suite_is_deterministic() {
    let cfg = SuiteConfig {
        n: 1024,
        instances: 3,
        seed: 7,
        ..SuiteConfig::default()
    };
    assert_eq!(run_identity_suite(&cfg).unwrap(), run_identity_suite(&cfg).unwrap());
}

use magnon_blockade::verify::{self, Mutation, VerifyOptions};

#[test]
fn flipped_kerr_sign_mirrors_the_optimal_detuning() {
    let opts = VerifyOptions {
        mutation: Some(Mutation::FlipKerrSign),
        ..VerifyOptions::default()
    };
    let r = verify::run(1, &opts);
    assert!(!r.passed);
    assert!(r.computed.contains("model argmin -0.2868"), "{}", r.computed);
}

#[test]
fn quick_subset_is_clean_without_mutation() {
    for r in verify::run_quick(&VerifyOptions::default()) {
        assert!(r.passed, "{}", r.line());
    }
}

#[test]
fn unknown_criterion_is_a_failed_row() {
    let r = verify::run(15, &VerifyOptions::default());
    assert!(!r.passed);
    assert_eq!(r.computed, "error");
}

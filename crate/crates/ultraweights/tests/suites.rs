use ultraweights::verify::{run, Suite, VerifyConfig};

fn green(suite: Suite) {
    let out = run(&VerifyConfig { suite, ..VerifyConfig::default() }).unwrap();
    assert!(!out.records.is_empty());
    for r in &out.records {
        assert!(r.is_decided_as_expected(), "{r:?}");
    }
    assert_eq!(out.summary.unexpected, 0);
}

#[test]
fn sequence_suite() {
    green(Suite::Sequence);
}

#[test]
fn conjugate_suite() {
    green(Suite::Conjugate);
}

#[test]
fn matrix_suite() {
    green(Suite::Matrix);
}

#[test]
fn omega7_suite() {
    green(Suite::Omega7);
}

#[test]
fn weight_suite() {
    green(Suite::Weight);
}

use std::path::Path;

use gsp::harness::run_corpus;

#[test]
fn every_corpus_case_meets_its_expectation() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let report = run_corpus(&dir).unwrap();
    assert!(report.cases.len() >= 40, "only {} cases", report.cases.len());
    assert!(report.ok(), "{report}");
}

#[test]
fn corpus_covers_every_diagnostic_code_and_error_kind() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let report = run_corpus(&dir).unwrap();
    let headers: Vec<String> = report
        .cases
        .iter()
        .map(|c| c.expected.as_ref().unwrap().to_string())
        .collect();
    for code in gsp::diag::Code::ALL {
        assert!(
            headers.iter().any(|h| h == &format!("static {}", code.as_str())),
            "no case for {}",
            code.as_str()
        );
    }
    for kind in gsp::runtime::ErrorKind::ALL {
        assert!(headers.iter().any(|h| h == &format!("runtime {kind}")), "no case for {kind}");
    }
}

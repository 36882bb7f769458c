use apl_core::harness::{
    emit, parse, run_oracle_validation, run_transition_sweep, ExperimentPlan, Fault, OutputFormat,
};

fn small_sweep(redact: bool) -> apl_core::harness::SweepResult {
    let mut plan = ExperimentPlan::transition_sweep(vec![6, 8], 1.0, vec![-0.1, 0.0, 0.1], 300, 11);
    plan.redact_timing = redact;
    run_transition_sweep(&plan).unwrap()
}

#[test]
fn csv_and_json_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let result = small_sweep(false);
    for (format, name) in [(OutputFormat::Csv, "s.csv"), (OutputFormat::Json, "s.json")] {
        let path = dir.path().join(name);
        emit(&result, format, &path).unwrap();
        assert_eq!(parse(&path, format).unwrap(), result);
    }
}

#[test]
fn redacted_rows_have_no_timing() {
    let result = small_sweep(true);
    assert!(result.rows.iter().all(|r| r.wall_time.is_none()));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit(&result, OutputFormat::Csv, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(parse(&dir.path().join("absent.csv"), OutputFormat::Csv).is_err());
}

#[test]
fn oracle_suite_catches_injected_fault() {
    assert!(run_oracle_validation(3, None).unwrap().all_passed());
    let report = run_oracle_validation(3, Some(Fault::ParityOffByOne)).unwrap();
    assert!(!report.all_passed());
    let failed = report.checks.iter().find(|c| !c.passed).unwrap();
    assert!(failed.witness.as_deref().unwrap().starts_with("(n="));
}

use crate::{exit, Failure};
use std::fmt::Write as _;
use thinfilm::io::IoError;
use thinfilm::validation::{run_validation, Operators, ValidationCheck};

/// Runs the suite with `ops` and a fresh scratch directory under the system
/// temp dir; returns the matrix and the failing check names.
pub fn validate_with(ops: &Operators) -> (String, Vec<String>) {
    let scratch = tempfile::Builder::new().prefix("tflm-validate").tempdir();
    let mut checks: Vec<ValidationCheck> = Vec::new();
    let dir = match &scratch {
        Ok(d) => d.path().to_path_buf(),
        Err(e) => {
            let dir = std::env::temp_dir();
            let err = IoError::IoFailure { path: dir.clone(), source: std::io::Error::new(e.kind(), e.to_string()) };
            checks.push(ValidationCheck { name: "scratch directory".into(), passed: false, detail: format!("IoFailure: {err}") });
            dir
        }
    };
    checks.extend(run_validation(ops, &dir));

    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{mark}  {:width$}  {}", c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    (out, failed)
}

pub fn validate() -> Result<String, Failure> {
    let (matrix, failed) = validate_with(&Operators::default());
    if failed.is_empty() {
        Ok(matrix)
    } else {
        Err(Failure::new(exit::FAILED, format!("failing checks: {}", failed.join(", "))).with_report(matrix))
    }
}

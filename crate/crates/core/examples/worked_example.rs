//! The three-category example: thresholds, gradient, pure strategies and the
//! four panel solutions, checked against reference values.
//!
//! cargo run --example worked_example

fn main() -> fsprivacy::Result<()> {
    let report = fsprivacy::experiment::run_example()?;
    print!("{}", report.render());
    for failure in report.failures() {
        eprintln!("mismatch: {} expected {} got {}", failure.name, failure.expected, failure.actual);
    }
    Ok(())
}

//! Run the full invariant suite, the same one `quartic verify --all` runs.

fn main() {
    let results = quartic::suite::run_all();
    for r in &results {
        println!("{} {:<42} {:>7.2}s  {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.seconds, r.detail);
    }
    if results.iter().any(|r| !r.passed) {
        std::process::exit(2);
    }
}

//! Acceptance suite: prints one pass/fail line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;
use vqss_harness::acceptance::ALL;

fn main() -> ExitCode {
    let start = Instant::now();
    let results: Vec<_> = ALL.par_iter().map(|c| {
        let t = Instant::now();
        (c(), t.elapsed())
    }).collect();
    for (r, took) in &results {
        println!("{r} ({:.2}s)", took.as_secs_f64());
    }
    let failed = results.iter().filter(|(r, _)| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! One pass/fail line per acceptance criterion, at full scale.

use endomorph_core::acceptance::{run_timed, Scale, CRITERIA};

fn main() {
    let scale = match std::env::var("ENDOMORPH_SCALE").as_deref() {
        Ok("small") => Scale::Small,
        _ => Scale::Full,
    };
    let mut failed = Vec::new();
    for id in 1..=CRITERIA.len() {
        let (o, took) = run_timed(id, scale, 7);
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {mark} {} ({} checks, {:.1?}): {}",
            o.id, o.title, o.checks, took, o.detail
        );
        if !o.passed {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

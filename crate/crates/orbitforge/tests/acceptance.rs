//! One PASS/FAIL line per acceptance criterion. Exits nonzero when a
//! criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

use orbitforge::selfcheck::{run_acceptance, DEFAULT_SEED, KNOWN_UNATTAINABLE};

fn main() {
    let seed = std::env::var("ORBITFORGE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    println!("acceptance (seed {seed})");
    let mut unexpected = 0;
    for r in run_acceptance(seed) {
        let ok = r.passed && r.within_budget();
        let budget = match r.budget {
            Some(b) => format!(" [{:.2}s of {}s]", r.elapsed.as_secs_f64(), b.as_secs()),
            None => format!(" [{:.2}s]", r.elapsed.as_secs_f64()),
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        let note = if r.passed && !ok { " over time budget" } else { "" };
        println!("{verdict} {} {} ({} cases): {}{note}{budget}", r.id, r.name, r.cases, r.detail);
        if !ok && KNOWN_UNATTAINABLE.contains(&r.id) && r.passed == false {
            println!("     {} is a known unattainable criterion", r.id);
        } else if !ok {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}

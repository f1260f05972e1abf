use std::process::ExitCode;

use cslab_core::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() -> ExitCode {
    let fast = std::env::args().any(|a| a == "--fast") || std::env::var_os("CSLAB_ACCEPTANCE_FAST").is_some();
    let opts = VerifyOptions {
        fast,
        ..Default::default()
    };
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let rep = run_criterion(id, &opts);
        let worst = rep.worst().map(|c| c.summary()).unwrap_or_default();
        println!(
            "criterion {:>2} {:<45} {} ({:.1}s)  {}",
            rep.id,
            rep.title,
            if rep.pass { "PASS" } else { "FAIL" },
            rep.seconds,
            worst
        );
        if !rep.pass {
            failed += 1;
            for c in rep.checks.iter().filter(|c| !c.pass && !c.informational) {
                println!("    failed: {} {}", c.summary(), c.detail);
            }
        }
        for c in rep.checks.iter().filter(|c| c.informational) {
            println!("    info: {}: {:.6e} {}", c.name, c.measured, c.detail);
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

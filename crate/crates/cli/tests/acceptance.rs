//! One line per acceptance criterion; exits non-zero if a fatal criterion fails.

use std::process::ExitCode;

use cantor_dioph::suites::{run, DEFAULT_SEED, SUITES};

fn main() -> ExitCode {
    let mut fatal = 0;
    for name in SUITES {
        let o = run(name, DEFAULT_SEED).expect("known suite");
        println!("{}  [{:.1}s]", o.line(), o.seconds);
        if !o.ok() {
            fatal += 1;
        }
    }
    if fatal == 0 {
        println!("acceptance: all fatal criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {fatal} fatal criteria failed");
        ExitCode::FAILURE
    }
}

//! Runs the full self-check suite and prints the pass/fail table.

use lgcusp::verify::{run, DEFAULT_SEED};

fn main() {
    let suite = run(DEFAULT_SEED);
    print!("{}", suite.table());
    if !suite.all_passed() {
        std::process::exit(1);
    }
}

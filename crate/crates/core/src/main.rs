use std::io::{stderr, stdout};

use toda_whittaker::cli::{run, PRECISION_ENV};

fn main() {
    let env = std::env::var(PRECISION_ENV).ok();
    let code = run(std::env::args_os(), env.as_deref(), &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}

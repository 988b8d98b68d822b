use std::io::{self, Read, Write};

fn main() {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    let code = hillquota::cli::run(std::env::args_os(), &mut input as &mut dyn Read, &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}

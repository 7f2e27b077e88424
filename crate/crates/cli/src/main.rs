use std::io::{stderr, stdout};

fn main() {
    let threads = std::env::var(dklab_cli::cli::THREADS_ENV).ok();
    let code = dklab_cli::run_cli(std::env::args_os(), threads.as_deref(), &mut stdout(), &mut stderr());
    std::process::exit(code);
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use sharpe_omega_cli::{args::Cli, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(out.exit_code as u8)
}

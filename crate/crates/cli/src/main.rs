use std::process::ExitCode;

use clap::Parser;
use semistab_tool::args::{Cli, Command};
use semistab_tool::{commands, exit_code};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let r = match &cli.command {
        Command::Certify(a) => commands::certify(a),
        Command::Verify(a) => commands::verify(a),
        Command::VerifyPolynomial(a) => commands::verify_poly(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Reproduce(a) => commands::reproduce(a),
    };
    if let Err(e) = &r {
        eprintln!("error: {e}");
    }
    exit_code(&r)
}

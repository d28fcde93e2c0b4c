use clap::Parser;

use onebit_sense_cli::args::{Cli, Command};
use onebit_sense_cli::commands;

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analytic(a) => commands::cmd_analytic(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Preset(a) => commands::cmd_preset(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = basenp_cli::commands::Cli::parse();
    match basenp_cli::commands::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

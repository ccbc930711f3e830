use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(scenario_explorer::cli::run() as u8)
}

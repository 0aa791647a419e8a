use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = pitchstab_cli::dispatch(std::env::args_os());
    if outcome.exit_code == pitchstab_cli::EXIT_OK {
        println!("{}", outcome.summary);
    } else {
        eprintln!("{}", outcome.summary);
    }
    for path in &outcome.artifacts {
        println!("wrote {}", path.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}

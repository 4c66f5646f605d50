use std::process::ExitCode;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout();
    ExitCode::from(diqkd_amplifier::cli::run(std::env::args_os(), &mut stdout) as u8)
}

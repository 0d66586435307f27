use std::process::ExitCode;

fn main() -> ExitCode {
    let code = diffqas_core::cli::main_with(
        std::env::args_os(),
        |key| std::env::var(key).ok(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    ExitCode::from(code as u8)
}

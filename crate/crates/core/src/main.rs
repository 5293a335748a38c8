use std::process::ExitCode;

fn main() -> ExitCode {
    densecode::cli::main()
}

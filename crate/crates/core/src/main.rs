fn main() -> std::process::ExitCode {
    boundary_path::cli::main_entry()
}

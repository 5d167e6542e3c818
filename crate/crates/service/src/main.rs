fn main() -> std::process::ExitCode {
    typematch::cli::run(std::env::args_os())
}

//! The `gpva` command; see [`gpva::cli`] for subcommands and exit codes.

fn main() {
    std::process::exit(gpva::cli::run(std::env::args_os()));
}

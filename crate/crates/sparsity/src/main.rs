fn main() {
    std::process::exit(sparsity::cli::main_with_args(std::env::args_os()));
}

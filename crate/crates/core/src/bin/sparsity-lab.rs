fn main() {
    std::process::exit(sparsity_lab::cli::main());
}

fn main() {
    pavcheck::cli::main()
}

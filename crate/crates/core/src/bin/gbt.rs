fn main() {
    std::process::exit(gbt_core::cli::main_entry());
}

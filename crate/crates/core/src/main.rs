fn main() {
    std::process::exit(walters_thermo::cli::main_entry());
}

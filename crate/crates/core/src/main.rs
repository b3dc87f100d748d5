fn main() {
    std::process::exit(ncgeom::cli::main_with_args(std::env::args_os()));
}

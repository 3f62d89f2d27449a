fn main() {
    if let Err(e) = cavent_cli::run(std::env::args().collect()) {
        eprintln!("cavent: {e}");
        std::process::exit(e.exit_code());
    }
}

fn main() {
    std::process::exit(modrotor::run_cli());
}

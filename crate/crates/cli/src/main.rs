fn main() {
    std::process::exit(uav_secrecy_cli::cli_main(std::env::args_os()));
}

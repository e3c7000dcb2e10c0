fn main() {
    std::process::exit(nonsmooth::run(std::env::args_os()));
}

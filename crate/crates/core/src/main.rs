fn main() {
    std::process::exit(tfscope::cli::run(std::env::args_os()));
}

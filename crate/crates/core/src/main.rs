use clap::Parser;

fn main() {
    let args = finsec::cli::Args::parse();
    std::process::exit(finsec::cli::main_with(args));
}

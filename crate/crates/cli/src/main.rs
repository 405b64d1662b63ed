use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = fgn_equiv_cli::Cli::parse();
    std::process::exit(fgn_equiv_cli::main_with(&cli));
}

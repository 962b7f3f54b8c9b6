use clap::Parser;

fn main() {
    let cli = bscnoma_cli::Cli::parse();
    let env_seed = std::env::var(bscnoma_cli::SEED_ENV).ok();
    match bscnoma_cli::run(&cli, env_seed.as_deref()) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

use anyhow::Result;
use clap::Parser;

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = claimify_cli::Cli::parse();
    let summary = claimify_cli::run(&cli)?;
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

use clap::Parser;
use psei_cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (code, value) = match execute(cli.command) {
        Ok(v) => (0, v),
        Err(e) => {
            log::error!("{e}");
            (e.exit.code(), e.to_json())
        }
    };
    println!("{}", serde_json::to_string_pretty(&value).expect("json value serializes"));
    std::process::exit(code);
}

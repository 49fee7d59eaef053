//! Driver for desk-scale insurance scenarios: every stage of the claim
//! pipeline as a subcommand that prints one JSON object on stdout.
//!
//! Exit codes are listed on [`Exit`].

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult, Exit};

use serde_json::Value;

use config::{Overrides, Scenario};

/// Runs one parsed subcommand.
pub fn execute(command: Command) -> CliResult<Value> {
    let (common, rest) = command.split();
    let scenario =
        Scenario::load(&common.config, Overrides { seed: common.seed.clone(), policy: common.policy.clone() })?;
    match rest {
        Command::Setup { .. } => commands::setup(&scenario),
        Command::Fund { party, amount, now, .. } => commands::fund(&scenario, &party, amount, now),
        Command::RequestData { out, .. } => commands::request_data(&scenario, out.as_deref()),
        Command::Claim { out, .. } => commands::claim(&scenario, out.as_deref()),
        Command::VerifySettle { proof, out, now, .. } => {
            commands::verify_settle(&scenario, proof.as_deref(), out.as_deref(), now)
        }
        Command::Expire { now, .. } => commands::expire(&scenario, now),
        Command::Inspect { proof, .. } => commands::inspect(&scenario, proof.as_deref()),
    }
}

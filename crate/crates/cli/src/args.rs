use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "psei", version, about = "Parametric solar insurance claims with zero-knowledge proofs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<String>,
    /// Overrides the scenario policy file.
    #[arg(long)]
    pub policy: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate the srs and provider key, mint balances and create the policy.
    Setup {
        #[command(flatten)]
        common: Common,
    },
    /// Pay one party's leg into escrow.
    Fund {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        party: String,
        /// Defaults to the premium for the insuree and the sum insured for the insurer.
        #[arg(long)]
        amount: Option<u64>,
        /// Ledger time; defaults to the start of the policy period.
        #[arg(long, allow_negative_numbers = true)]
        now: Option<i64>,
    },
    /// Fetch signed sensing data from the provider and check its provenance.
    RequestData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the claim and write a proof when it is payable.
    Claim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a proof on the ledger and settle the policy.
    VerifySettle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ledger time; defaults to the end of the policy period.
        #[arg(long, allow_negative_numbers = true)]
        now: Option<i64>,
    },
    /// Settle a policy past its expiry.
    Expire {
        #[command(flatten)]
        common: Common,
        /// Ledger time; defaults to the policy expiry.
        #[arg(long, allow_negative_numbers = true)]
        now: Option<i64>,
    },
    /// Print the manifest, ledger state and optionally a decoded proof.
    Inspect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        proof: Option<PathBuf>,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Setup { common }
            | Command::Fund { common, .. }
            | Command::RequestData { common, .. }
            | Command::Claim { common, .. }
            | Command::VerifySettle { common, .. }
            | Command::Expire { common, .. }
            | Command::Inspect { common, .. } => common,
        }
    }

    pub(crate) fn split(self) -> (Common, Self) {
        (self.common().clone(), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_negative_now_and_requires_config() {
        let cli = Cli::try_parse_from(["psei", "expire", "--config", "c.json", "--now", "-5"]).unwrap();
        assert!(matches!(cli.command, Command::Expire { now: Some(-5), .. }));
        let err = Cli::try_parse_from(["psei", "claim"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use simpeval_core::backends::FixtureStore;

use crate::error::{CliError, EXIT_OK};

#[derive(Debug, Subcommand)]
pub enum FixturesCommand {
    /// Validate a fixture store and summarize its entries
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,

    /// List every entry's hash and request
    #[arg(long)]
    pub entries: bool,
}

pub fn run(cmd: &FixturesCommand) -> Result<i32, CliError> {
    match cmd {
        FixturesCommand::Inspect(args) => {
            let store = FixtureStore::load(&args.path).map_err(CliError::fatal)?;
            let mut per_kind: BTreeMap<String, usize> = BTreeMap::new();
            for e in store.entries() {
                *per_kind.entry(e.request.kind().to_string()).or_default() += 1;
            }
            println!("{}: {} entries", args.path.display(), store.len());
            for (kind, n) in &per_kind {
                println!("  {kind}: {n}");
            }
            if args.entries {
                for e in store.entries() {
                    println!("{} {}", e.hash, e.request.canonical_json());
                }
            }
            Ok(EXIT_OK)
        }
    }
}

use std::path::PathBuf;

use clap::Args;
use simpeval_core::backends::{
    fixture_record, fixture_replay, Backend, RemoteBackend, RetryPolicy,
};
use tracing::info;

use crate::error::CliError;

pub const BACKEND_URL_ENV: &str = "SIMPEVAL_BACKEND_URL";

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    /// Base URL of a model server (serves /embed, /qg, /qa)
    #[arg(long, env = BACKEND_URL_ENV)]
    pub backend_url: Option<String>,

    /// Replay model calls from this fixture store
    #[arg(long)]
    pub fixtures: Option<PathBuf>,

    /// Call --backend-url and record every exchange into --fixtures
    #[arg(long, requires_all = ["fixtures", "backend_url"])]
    pub record: bool,

    /// Per-request timeout in seconds for the model server
    #[arg(long, default_value_t = 60)]
    pub timeout_secs: u64,

    /// Retries after a transport failure or server error
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
}

impl BackendArgs {
    pub fn is_configured(&self) -> bool {
        self.backend_url.is_some() || self.fixtures.is_some()
    }

    /// `None` when neither a URL nor a fixture store was given. A fixture
    /// store without `--record` is replayed even if a URL is also set.
    pub fn build(&self) -> Result<Option<Box<dyn Backend>>, CliError> {
        let remote = |url: &str| -> Result<RemoteBackend, CliError> {
            Ok(RemoteBackend::new(url)
                .map_err(|e| CliError::Usage(e.to_string()))?
                .timeout(std::time::Duration::from_secs(self.timeout_secs))
                .retry(RetryPolicy {
                    max_retries: self.retries,
                    ..RetryPolicy::default()
                }))
        };
        match (&self.backend_url, &self.fixtures, self.record) {
            (Some(url), Some(path), true) => {
                info!(%url, path = %path.display(), "recording backend calls");
                let recorder = fixture_record(remote(url)?, path).map_err(CliError::fatal)?;
                Ok(Some(Box::new(recorder)))
            }
            (_, Some(path), false) => {
                info!(path = %path.display(), "replaying fixtures");
                Ok(Some(Box::new(
                    fixture_replay(path).map_err(CliError::fatal)?,
                )))
            }
            (Some(url), None, _) => Ok(Some(Box::new(remote(url)?))),
            _ => Ok(None),
        }
    }
}

//! Command-line and HTTP front ends over `typematch-core`.

pub mod api;
pub mod cli;
pub mod session;

use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use typematch_core::reconcile::{provider_from_spec, HttpProvider, Provider};
use typematch_core::Result;

pub const PROVIDER_ENV: &str = "TYPEMATCH_PROVIDER_URL";

/// Picks the explicit provider spec, falling back to the base URL in
/// `TYPEMATCH_PROVIDER_URL`. `None` when neither is set.
pub fn resolve_provider(spec: Option<&str>, timeout: Duration) -> Result<Option<Arc<dyn Provider>>> {
    let from_env = std::env::var(PROVIDER_ENV).ok().filter(|v| !v.trim().is_empty());
    let spec = match (spec, from_env) {
        (Some(s), _) => s.to_string(),
        (None, Some(url)) => url,
        (None, None) => return Ok(None),
    };
    Ok(Some(Arc::from(provider_from_spec(&spec, timeout)?)))
}

pub fn default_timeout() -> Duration {
    HttpProvider::DEFAULT_TIMEOUT
}

/// Pretty JSON with a trailing newline, the form every front end emits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("wire types serialize");
    s.push('\n');
    s
}

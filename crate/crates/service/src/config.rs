//! Environment configuration.
//!
//! | variable                      | default            |
//! |-------------------------------|--------------------|
//! | `FAHP_LISTEN_ADDR`            | `127.0.0.1:8080`   |
//! | `FAHP_STORE_PATH`             | `./fahp-data`      |
//! | `FAHP_DEFAULT_GAMMA`          | `0.1`              |
//! | `FAHP_BID_SECURITY_THRESHOLD` | `300000000.00`     |
//! | `FAHP_ADMIN_TOKEN`            | generated at start |

use std::net::SocketAddr;
use std::path::PathBuf;

use fahp_core::{Money, Threshold, DEFAULT_BID_SECURITY_THRESHOLD};
use thiserror::Error;

use crate::service::Defaults;

#[derive(Debug, Error)]
#[error("{var}: {reason}")]
pub struct ConfigError {
    pub var: &'static str,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub listen_addr: SocketAddr,
    pub store_path: PathBuf,
    pub default_gamma: Threshold,
    pub bid_security_threshold: Money,
    pub admin_token: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen_addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_path: PathBuf::from("./fahp-data"),
            default_gamma: Threshold::default(),
            bid_security_threshold: DEFAULT_BID_SECURITY_THRESHOLD,
            admin_token: None,
        }
    }
}

fn parse<T>(var: &'static str, raw: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
    f(raw.trim()).map_err(|reason| ConfigError { var, reason })
}

impl Config {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        if let Some(v) = get("FAHP_LISTEN_ADDR") {
            c.listen_addr = parse("FAHP_LISTEN_ADDR", &v, |s| s.parse().map_err(|e| format!("{e}")))?;
        }
        if let Some(v) = get("FAHP_STORE_PATH") {
            c.store_path = PathBuf::from(v);
        }
        if let Some(v) = get("FAHP_DEFAULT_GAMMA") {
            c.default_gamma = parse("FAHP_DEFAULT_GAMMA", &v, |s| {
                let g: f64 = s.parse().map_err(|e| format!("{e}"))?;
                Threshold::new(g).map_err(|e| e.to_string())
            })?;
        }
        if let Some(v) = get("FAHP_BID_SECURITY_THRESHOLD") {
            c.bid_security_threshold =
                parse("FAHP_BID_SECURITY_THRESHOLD", &v, |s| s.parse::<Money>().map_err(|e| e.to_string()))?;
        }
        c.admin_token = get("FAHP_ADMIN_TOKEN").filter(|t| !t.trim().is_empty());
        Ok(c)
    }

    pub fn defaults(&self) -> Defaults {
        Defaults { gamma: self.default_gamma, bid_security_threshold: self.bid_security_threshold }
    }
}

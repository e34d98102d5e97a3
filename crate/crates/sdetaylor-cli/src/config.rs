//! Flat `key = value` configuration files mapped onto `SDETAYLOR_*`
//! environment variables, so that flags override the environment and the
//! environment overrides the file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const ENV_PREFIX: &str = "SDETAYLOR_";

/// Blank lines and lines starting with `#` are ignored.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", n + 1))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// `cache-dir` becomes `SDETAYLOR_CACHE_DIR`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase().replace('-', "_"))
}

/// Environment assignments for the keys not already set in `env`.
pub fn pending_env(
    values: &BTreeMap<String, String>,
    env: impl Fn(&str) -> Option<String>,
) -> Vec<(String, String)> {
    values
        .iter()
        .map(|(k, v)| (env_name(k), v.clone()))
        .filter(|(k, _)| env(k).is_none())
        .collect()
}

/// `--config PATH`, `--config=PATH` or `SDETAYLOR_CONFIG`.
pub fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    std::env::var_os(format!("{ENV_PREFIX}CONFIG")).map(PathBuf::from)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let m = parse("# study\nseed = 7\n\ntrials=200\ncache-dir = /tmp/c\n").unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["trials"], "200");
        assert_eq!(env_name("cache-dir"), "SDETAYLOR_CACHE_DIR");
        assert!(parse("seed").is_err());
        assert!(parse("= 3").is_err());
    }

    #[test]
    fn environment_wins_over_file() {
        let m = parse("seed = 7\ntrials = 200").unwrap();
        let env = |k: &str| (k == "SDETAYLOR_SEED").then(|| "1".to_string());
        assert_eq!(
            pending_env(&m, env),
            vec![("SDETAYLOR_TRIALS".to_string(), "200".to_string())]
        );
    }

    #[test]
    fn finds_the_config_flag() {
        let a: Vec<OsString> = ["x", "ranks", "--config", "a.cfg"]
            .iter()
            .map(Into::into)
            .collect();
        assert_eq!(config_path(&a), Some(PathBuf::from("a.cfg")));
        let a: Vec<OsString> = ["x", "--config=b.cfg"].iter().map(Into::into).collect();
        assert_eq!(config_path(&a), Some(PathBuf::from("b.cfg")));
    }
}

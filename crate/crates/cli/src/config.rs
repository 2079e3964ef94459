//! Run configuration: flags, then the `--config` file, then the environment, then defaults.
//!
//! The config file holds `key = value` lines; `#` starts a comment. Keys:
//! `format`, `threads`, `seed`, `step_limit`, `magnitude_bits`, `slow`, `map`.

use std::collections::BTreeMap;
use std::path::Path;

use collatz_core::maps::{DEFAULT_MAGNITUDE_BITS, DEFAULT_STEP_LIMIT};
use collatz_core::{Error, Result};

use crate::args::{Format, Global};

pub const THREADS_ENV: &str = "COLLATZ_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub map: String,
    pub step_limit: u64,
    pub magnitude_bits: u64,
    pub format: Format,
    pub seed: u64,
    pub threads: usize,
    pub slow: bool,
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('-', "_");
        let v = v.trim().trim_matches('"').to_string();
        match key.as_str() {
            "format" | "threads" | "seed" | "step_limit" | "magnitude_bits" | "slow" | "map" => {}
            _ => return Err(Error::usage(format!("config line {}: unknown key {key:?}", i + 1))),
        }
        out.insert(key, v);
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::usage(format!("config: bad value {v:?} for {key}")))
}

impl RunConfig {
    pub fn resolve(g: &Global) -> Result<RunConfig> {
        let file = match &g.config {
            Some(p) => parse_config_text(&read(p)?)?,
            None => BTreeMap::new(),
        };
        let get = |k: &str| file.get(k).map(String::as_str);
        let format = match (g.format, get("format")) {
            (Some(f), _) => f,
            (None, Some(s)) => s.parse().map_err(Error::usage)?,
            (None, None) => Format::Json,
        };
        let env_threads = std::env::var(THREADS_ENV).ok();
        let threads = match (g.threads, get("threads"), env_threads.as_deref()) {
            (Some(t), _, _) => t,
            (None, Some(s), _) => num("threads", s)?,
            (None, None, Some(s)) => num(THREADS_ENV, s)?,
            _ => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let cfg = RunConfig {
            map: g.map.clone().or_else(|| get("map").map(String::from)).unwrap_or_else(|| "T".into()),
            step_limit: match (g.step_limit, get("step_limit")) {
                (Some(v), _) => v,
                (None, Some(s)) => num("step_limit", s)?,
                _ => DEFAULT_STEP_LIMIT,
            },
            magnitude_bits: match (g.magnitude_bits, get("magnitude_bits")) {
                (Some(v), _) => v,
                (None, Some(s)) => num("magnitude_bits", s)?,
                _ => DEFAULT_MAGNITUDE_BITS,
            },
            format,
            seed: match (g.seed, get("seed")) {
                (Some(v), _) => v,
                (None, Some(s)) => num("seed", s)?,
                _ => 1,
            },
            threads,
            slow: g.slow || get("slow").map(|s| s == "true" || s == "1").unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.step_limit == 0 || self.magnitude_bits == 0 {
            return Err(Error::usage("step_limit and magnitude_bits must be positive"));
        }
        if self.threads == 0 {
            return Err(Error::usage("threads must be positive"));
        }
        Ok(())
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::usage(format!("cannot read {}: {e}", p.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let m = parse_config_text("# comment\nseed = 7\nstep-limit=50 # trailing\n\nformat = \"csv\"").unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["step_limit"], "50");
        assert_eq!(m["format"], "csv");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("no equals sign").is_err());
    }
}

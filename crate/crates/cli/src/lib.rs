//! Experiment harness behind the `bienayme-lab` binary: simulation and
//! scaling tables as CSV, verification suites, the short-and-fat
//! construction and exact stochastic-order comparisons.

use std::fmt;
use std::path::{Path, PathBuf};

use bienayme::dist::load_spec;
use bienayme::{OffspringDist, SamplerTag};

pub mod construct;
pub mod scaling;
pub mod simulate;
pub mod stochorder;
pub mod suites;

/// First line of every CSV we write.
pub const CSV_HEADER: &str = "# bienayme-lab v1";

/// A bad flag, file or distribution: exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(ConfigError(msg.into()).into())
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub dist: OffspringDist,
    pub ns: Vec<u64>,
    pub reps: u64,
    pub sampler: SamplerTag,
    pub seed: u64,
    pub max_tries: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(
        dist: OffspringDist,
        ns: Vec<u64>,
        reps: u64,
        sampler: SamplerTag,
        seed: u64,
    ) -> anyhow::Result<Self> {
        if reps == 0 {
            return config_err("--reps must be at least 1");
        }
        if ns.is_empty() {
            return config_err("--n needs at least one size");
        }
        if ns.contains(&0) {
            return config_err("sizes must be positive");
        }
        Ok(Self {
            experiment: "simulate".into(),
            dist,
            ns,
            reps,
            sampler,
            seed,
            max_tries: 1 << 32,
            out: None,
        })
    }
}

/// Reads `--dist`: a JSON file, inline JSON, or the bare name of a family
/// with default parameters.
pub fn load_dist(arg: &str) -> anyhow::Result<OffspringDist> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| ConfigError(format!("{arg}: {e}")))?
    } else if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        format!(r#"{{"kind":"{arg}"}}"#)
    };
    load_spec(&text).map_err(|e| ConfigError(format!("--dist {arg}: {e}")).into())
}

/// "100,1e3,10000" → [100, 1000, 10000].
pub fn parse_n_list(s: &str) -> anyhow::Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            if let Ok(v) = t.parse::<u64>() {
                return Ok(v);
            }
            match t.parse::<f64>() {
                Ok(x) if x >= 1.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
                _ => config_err(format!("not a size: {t:?}")),
            }
        })
        .collect()
}

pub fn parse_sampler(s: &str) -> anyhow::Result<SamplerTag> {
    match s {
        "exact" => Ok(SamplerTag::Exact),
        "tprime" => Ok(SamplerTag::Tprime),
        _ => config_err(format!("--sampler must be exact or tprime, got {s:?}")),
    }
}

/// "2,2,0,0,0" → [2, 2, 0, 0, 0].
pub fn parse_degrees(s: &str) -> anyhow::Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| ConfigError(format!("not a degree: {t:?}")).into())
        })
        .collect()
}

/// Writes to `out`, or stdout without one.
pub fn emit(out: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| ConfigError(format!("{}: {e}", p.display())).into())
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

use std::io::Write;

use bienayme::paths::{encode, width_upper};
use bienayme::rng::stream;
use bienayme::sample::{sample_tn_exact, sample_tn_prime};
use bienayme::scaling::scaling_row;
use bienayme::{Order, SamplerTag};
use rayon::prelude::*;
use serde::Serialize;

use crate::{ExperimentConfig, CSV_HEADER};

/// One sampled tree. Replicate r draws from stream (seed, r) at every n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub experiment: String,
    pub n: u64,
    pub replicate: u64,
    pub seed: u64,
    pub height: u64,
    pub width: u64,
    pub max_degree: u64,
    pub spine_depth: u64,
    pub a_n: u64,
    pub b_n: f64,
    pub h_n: Option<f64>,
    pub ratio_height: Option<f64>,
    pub ratio_width: Option<f64>,
    pub sampler: &'static str,
    pub tries: u64,
    /// max of the breadth-first queue path; Width ≤ this + 1
    pub bfs_path_max: i64,
    pub sentinel: bool,
}

impl StatsRow {
    /// Δ ≤ Width ≤ max W^bfs + 1.
    pub fn sandwich_holds(&self) -> bool {
        self.max_degree <= self.width && self.width as i64 <= self.bfs_path_max + 1
    }
}

fn ratio(num: u64, den: f64) -> Option<f64> {
    (den > 0.0 && den.is_finite()).then(|| num as f64 / den)
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<StatsRow>> {
    if cfg.sampler == SamplerTag::Tprime && !cfg.dist.has_cauchy_tail() {
        eprintln!("warning: tprime approximates T_n only for laws with a Cauchy-type tail");
    }
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        if !cfg.dist.is_feasible(n as usize) {
            return crate::config_err(format!("no tree of size {n} has positive probability"));
        }
        let sc = scaling_row(&cfg.dist, n)?;
        let batch: Vec<anyhow::Result<StatsRow>> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream(cfg.seed, r);
                let o = match cfg.sampler {
                    SamplerTag::Tprime => sample_tn_prime(&cfg.dist, n as usize, &mut rng)?,
                    _ => sample_tn_exact(&cfg.dist, n as usize, &mut rng, cfg.max_tries)?,
                };
                let t = &o.tree;
                let (height, width) = (t.height() as u64, t.width() as u64);
                Ok(StatsRow {
                    experiment: cfg.experiment.clone(),
                    n,
                    replicate: r,
                    seed: cfg.seed,
                    height,
                    width,
                    max_degree: t.max_degree().0 as u64,
                    spine_depth: t.decompose_at_max().spine_depth as u64,
                    a_n: sc.a_n,
                    b_n: sc.b_n,
                    h_n: sc.h_n,
                    ratio_height: sc.h_n.and_then(|h| ratio(height, h)),
                    ratio_width: ratio(width, sc.b_n),
                    sampler: o.sampler.as_str(),
                    tries: o.tries,
                    bfs_path_max: width_upper(&encode(t, Order::Bfs)),
                    sentinel: o.sentinel,
                })
            })
            .collect();
        for row in batch {
            rows.push(row?);
        }
    }
    rows.sort_by(|a, b| (&a.experiment, a.n, a.replicate).cmp(&(&b.experiment, b.n, b.replicate)));
    Ok(rows)
}

/// Rows as CSV, with the version comment first.
pub fn to_csv(rows: &[StatsRow]) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    writeln!(buf, "{CSV_HEADER}")?;
    let mut w = csv::Writer::from_writer(&mut buf);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);
    Ok(String::from_utf8(buf)?)
}

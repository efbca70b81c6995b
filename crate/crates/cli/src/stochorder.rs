use std::cmp::Ordering;

use bienayme::foata::{expected_height, skew_order};
use bienayme::DegreeSequence;
use serde::Serialize;

/// Enumeration budget for |S_d|.
pub const LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct StochOrderReport {
    pub d: Vec<u32>,
    pub d2: Vec<u32>,
    pub height_d: f64,
    pub height_d2: f64,
    /// "d < d2" when d is the more skewed one, "d2 < d", "equal" or
    /// "incomparable"
    pub relation: &'static str,
    /// the more skewed sequence has the smaller expected height
    pub holds: Option<bool>,
}

pub fn run(d: &[u32], d2: &[u32]) -> anyhow::Result<StochOrderReport> {
    let a = DegreeSequence::new(d.to_vec()).map_err(|e| crate::ConfigError(format!("d: {e}")))?;
    let b = DegreeSequence::new(d2.to_vec()).map_err(|e| crate::ConfigError(format!("d2: {e}")))?;
    let (ha, hb) = (expected_height(&a, LIMIT)?, expected_height(&b, LIMIT)?);
    let tol = 1e-12 * ha.max(hb);
    let (relation, holds) = match skew_order(&a, &b) {
        Some(Ordering::Less) => ("d < d2", Some(ha <= hb + tol)),
        Some(Ordering::Greater) => ("d2 < d", Some(hb <= ha + tol)),
        Some(Ordering::Equal) => ("equal", Some((ha - hb).abs() <= tol)),
        None => ("incomparable", None),
    };
    Ok(StochOrderReport {
        d: d.to_vec(),
        d2: d2.to_vec(),
        height_d: ha,
        height_d2: hb,
        relation,
        holds,
    })
}

use bienayme::construct::{build_short_fat, verify_fatness, FatnessReport};
use bienayme::rng::stream;
use bienayme::{ConstructedDist, DistSpec, GrowthPreset};
use serde::Serialize;

/// The distribution spec with the construction record alongside it;
/// `load_spec` ignores the extra field.
#[derive(Debug, Serialize)]
pub struct ConstructOutput {
    #[serde(flatten)]
    pub spec: DistSpec,
    pub metadata: Metadata,
}

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub eps_2: f64,
    pub delta_2: f64,
    pub construction: ConstructedDist,
    pub fatness: Vec<FatnessReport>,
    /// levels whose n_k* is past the sampling budget
    pub report_only: Vec<usize>,
}

pub fn run(
    preset: GrowthPreset,
    levels: usize,
    reps: u64,
    seed: u64,
) -> anyhow::Result<ConstructOutput> {
    let cd = build_short_fat(preset, levels)?;
    let d = cd.to_offspring()?;
    let mut fatness = Vec::new();
    let mut report_only = Vec::new();
    if reps > 0 {
        for k in 1..cd.levels.len() {
            let mut rng = stream(seed, k as u64);
            match verify_fatness(&cd, k, reps, &mut rng) {
                Ok(r) => fatness.push(r),
                Err(bienayme::Error::TooLarge(_)) => report_only.push(k),
                Err(e) => return Err(e.into()),
            }
        }
    }
    let as_f64 = |k: usize| -> (f64, f64) {
        use num_traits::ToPrimitive;
        let l = &cd.levels[k];
        (
            l.eps.to_f64().unwrap_or(f64::NAN),
            l.delta.to_f64().unwrap_or(f64::NAN),
        )
    };
    let (eps_2, delta_2) = as_f64(2);
    Ok(ConstructOutput {
        spec: d.spec().clone(),
        metadata: Metadata {
            eps_2,
            delta_2,
            construction: cd,
            fatness,
            report_only,
        },
    })
}

#[cfg(test)]
mod tests {
    use bienayme::dist::load_spec;

    use super::*;

    #[test]
    fn output_round_trips() {
        let out = run(GrowthPreset::Power, 3, 50, 1).unwrap();
        let text = serde_json::to_string_pretty(&out).unwrap();
        let d = load_spec(&text).unwrap();
        assert!(d.is_critical());
        assert_eq!((out.metadata.eps_2, out.metadata.delta_2), (0.25, 0.375));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let lv = &v["metadata"]["construction"]["levels"][3];
        assert!(lv["lambda"].as_f64().unwrap() < 1.0);
        assert!(lv["binding"].as_str().unwrap().starts_with('('));
        assert_eq!(out.metadata.fatness.len(), 3);
    }
}

//! Size-conditioned critical Bienaymé trees: offspring laws, lattice-path
//! codecs, exact and approximate samplers, the Foata–Fuchs bijection, the
//! height/width scaling sequences and the short-and-fat construction.
#![forbid(unsafe_code)]

pub mod construct;
pub mod dist;
mod error;
pub mod foata;
pub mod paths;
mod quad;
pub mod rng;
pub mod sample;
pub mod scaling;
pub mod stats;
pub mod tree;

pub use construct::{
    build_short_fat, verify_fatness, ConstructedDist, FatnessReport, GrowthPreset,
};
pub use dist::{DistSpec, Family, IncrementLaw, OffspringDist};
pub use error::{Error, Result};
pub use foata::{DegreeSequence, FFSequence, LabeledTree};
pub use paths::{LatticePath, Order, PathKind};
pub use rng::SimRng;
pub use sample::{SampleOutcome, SamplerTag};
pub use scaling::{QTable, ScalingRow, TiltSolution};
pub use tree::{MaxDecomposition, PlaneTree};

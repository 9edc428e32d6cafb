//! Maps between polyhedra: the evaluator contract, piecewise-linear maps, simplicial and
//! weakly simplicial maps, and the approximation constructions built on the star condition.

mod builtin;
mod evaluator;
mod simplicial;
mod staged;
mod star;
mod zeeman;

pub use builtin::{affine, degree2_circle, cross_map, Builtin};
pub use evaluator::{
    estimate_lipschitz, CarrierCertified, CertifiedPlMap, Compose, FnMap, MapEvaluator, PlMap, FD_STEP,
};
pub use simplicial::{SimplicialMap, TargetTower, WeaklySimplicialMap, WeaklySimplicialJson};
pub use staged::{staged_weakly_simplicial, StagedOptions, StagedOutput, StageReport};
pub use star::{check_star_condition, StarOptions, StarOutcome};
pub use zeeman::{zeeman_relative, ZeemanOptions, ZeemanOutput};

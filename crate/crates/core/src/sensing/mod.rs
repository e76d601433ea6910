//! The attacker's own channel probing: beamspace dictionary, sensor
//! placement, OMP recovery and the two key reconstruction attacks.

mod attack;
mod dictionary;
mod omp;
mod placement;

pub use attack::{
    csi_attack_round, matched_filter, pilot_observation, twoway_attack_round, AttackEstimate,
};
pub use dictionary::{build_dictionary, Dictionary};
pub use omp::{omp, CompressedOperator, SparseEstimate, RESIDUAL_TOL};
pub use placement::{
    best_subset, condition_number, place_sensors, random_placement, SensingMatrix,
};

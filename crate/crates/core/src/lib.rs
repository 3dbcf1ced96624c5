//! Worst-case fair shares for dividing indivisible chores among agents with
//! additive disutilities, parametrised by the largest single-object
//! disutility `alpha`.

pub mod allocator;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod mms;
pub mod model;
pub mod rational;
pub mod region;
pub mod shares;

pub use allocator::{allocate, allocate_two_agents_tight, AgentReport, AllocationOutcome};
pub use error::{Error, Result};
pub use mms::{exact_mms, fits_under, lex_minmax, MmsSolution, MmsSolver};
pub use model::{order_vector, Allocation, DisutilityVector, Instance};
pub use rational::Rational;
pub use region::{classify_guarantee, classify_share, RegionIndex, RegionTag};
pub use shares::{
    guarantee, hill_share, mms_lower_bound, theoretical_ratio, witness_lower, witness_upper,
    Construction, ObjectCount, ShareQuery, WitnessInstance,
};

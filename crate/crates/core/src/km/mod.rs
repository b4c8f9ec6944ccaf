//! The density-increment steps. Each returns a certificate that can be
//! recomputed from its raw inputs.

mod drc;
mod holder;
mod increment;
mod lp_orth;
mod narrow;
mod smoothing;
mod unbalance;

pub use drc::{drc, sift, sift_on, DrcMode, DrcResult, SiftResult};
pub use holder::{holder_lift, LiftContext, LiftOutcome};
pub use increment::{
    densest_coset, density_increment_step, increment_value, IncrementOutcome, StepConfig,
};
pub use lp_orth::{lp_orth, posdef_measure, LpOrthOutcome};
pub use narrow::{bour_narrow, NarrowOutcome};
pub use smoothing::{
    find_smoothing_bohr, find_smoothing_subspace, BohrBudget, Smoothing, Subspace,
};
pub use unbalance::{unbalance, unbalance_bound, UnbalanceOutcome};

use crate::func::{mu_of_set, ProbMeasure};
use crate::set::GSet;
use crate::Result;

/// Relative slack used when comparing a recomputed quantity to a threshold.
pub const CERT_TOL: f64 = 1e-12;

pub(crate) fn ge(a: f64, b: f64) -> bool {
    a >= b - CERT_TOL * b.abs().max(1.0)
}

pub(crate) fn mu(a: &GSet) -> Result<ProbMeasure> {
    mu_of_set(a)
}

//! Progression-free constructions and the end-to-end increment drivers.

mod ap;
mod behrend;
mod embed;
mod ffq;
mod three_sum;
mod znz;

pub use ap::longest_ap;
pub use behrend::{behrend, is_ap_free, Strategy};
pub use embed::{embed_interval, embed_mod, integer_3ap_count};
pub use ffq::{replay_ffq, roth_ffq_driver, FfqCell, FfqConfig, FfqStep, FfqTerminal, FfqTrace};
pub use three_sum::{three_sumset_ap_pipeline, ApReport, ThreeSumOutcome};
pub use znz::{
    replay_znz, roth_znz_driver, Goal, StepKind, ZnzConfig, ZnzStep, ZnzTerminal, ZnzTrace,
};

/// Largest number of increments any trace may contain:
/// `⌈c_inc / ε · ln(1/α₀)⌉ + 1`.
pub fn step_limit(c_inc: f64, eps: f64, alpha0: f64) -> usize {
    let v = c_inc / eps * crate::num::ln(1.0 / alpha0);
    crate::num::ceil(v.max(0.0)) as usize + 1
}

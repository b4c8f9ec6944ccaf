use crate::bohr::{longest_run_with_step, ApRun};
use crate::set::GSet;

/// Longest arithmetic progression in `s`, over every nonzero step (steps
/// coprime to the order in a cyclic group). Ties go to the smallest
/// `(step, start)`.
pub fn longest_ap(s: &GSet) -> ApRun {
    let g = s.group();
    let mut best = ApRun { start: 0, step: 0, length: 0 };
    if s.is_empty() {
        return best;
    }
    let cyclic = g.rank() == 1;
    for step in 1..g.size() {
        if cyclic && crate::num::gcd(step as u64, g.size() as u64) != 1 {
            continue;
        }
        let run = longest_run_with_step(s, step);
        if run.length > best.length {
            best = run;
        }
    }
    if best.length == 0 {
        let start = s.iter().next().unwrap_or(0);
        best = ApRun { start, step: 0, length: 1 };
    }
    best
}

//! Fault counting, constraint value, and fitness score.
//!
//! These are the pure functions the evolution loop is built on: a greedy
//! left-to-right alignment between a generated mechanic sequence and the
//! target, a playability constraint over repeated agent runs, and a score
//! that penalizes missed and extra mechanics.

use serde::{Deserialize, Serialize};

use crate::level::MechanicKind;
use crate::sim::Playtrace;

/// An ordered list of mechanic kinds with positions and ticks stripped.
///
/// Simultaneous events within a tick are linearized by mechanic code, so a
/// trace always projects to one well-defined sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MechanicSequence(pub Vec<MechanicKind>);

impl MechanicSequence {
    pub fn from_trace(trace: &Playtrace) -> MechanicSequence {
        // Trace events are already ordered by (tick, code).
        MechanicSequence(trace.events.iter().map(|e| e.kind).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One mechanic name per line, the on-disk target format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.0 {
            out.push_str(m.name());
            out.push('\n');
        }
        out
    }

    /// Parses the one-name-per-line format. Blank lines are ignored.
    pub fn from_text(text: &str) -> Result<MechanicSequence, UnknownMechanic> {
        let mut seq = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let name = line.trim();
            if name.is_empty() {
                continue;
            }
            let kind = MechanicKind::from_name(name).ok_or_else(|| UnknownMechanic {
                name: name.to_string(),
                line: i + 1,
            })?;
            seq.push(kind);
        }
        Ok(MechanicSequence(seq))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown mechanic name {name:?} on line {line}")]
pub struct UnknownMechanic {
    pub name: String,
    pub line: usize,
}

/// Missed / extra counts from aligning a generated sequence to a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FaultReport {
    pub missed: usize,
    pub extras: usize,
}

/// Weights of the fitness score and the constraint evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    /// Initial score S.
    pub initial_score: f64,
    /// Per-missed-mechanic penalty weight.
    pub missed_weight: f64,
    /// Extra-penalty curve scale.
    pub extra_a: f64,
    /// Extra-penalty curve steepness.
    pub extra_b: f64,
    /// Extra-penalty curve offset.
    pub extra_c: f64,
    /// Agent runs per chromosome evaluation.
    pub runs_per_eval: usize,
    /// Win-rate threshold at which the constraint saturates.
    pub win_threshold: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            initial_score: 1.0,
            missed_weight: 0.1,
            extra_a: 0.5,
            extra_b: 0.1,
            extra_c: 0.0,
            runs_per_eval: 5,
            win_threshold: 0.6,
        }
    }
}

/// Greedy left-to-right alignment fault count.
///
/// For each target mechanic in order, the generated sequence is scanned
/// from a cursor for its first occurrence. A match at offset `k` adds `k`
/// extras and advances the cursor past the match; no match adds one miss
/// and leaves the cursor in place. Generated events after the final match
/// are not counted as extras.
pub fn count_faults(generated: &MechanicSequence, target: &MechanicSequence) -> FaultReport {
    let gen = &generated.0;
    let mut cursor = 0;
    let mut report = FaultReport::default();
    for &wanted in &target.0 {
        match gen[cursor.min(gen.len())..].iter().position(|&m| m == wanted) {
            Some(k) => {
                report.extras += k;
                cursor += k + 1;
            }
            None => report.missed += 1,
        }
    }
    report
}

/// Constraint value in [0, 1]: 1 when the mean win rate over the runs
/// meets the threshold, otherwise the mean fraction of the level crossed.
pub fn constraint_value(traces: &[Playtrace], level_width: usize, weights: &FitnessWeights) -> f64 {
    assert!(!traces.is_empty(), "constraint needs at least one trace");
    assert!(level_width > 0);
    let n = traces.len() as f64;
    let win_rate = traces.iter().filter(|t| t.won).count() as f64 / n;
    if win_rate >= weights.win_threshold {
        return 1.0;
    }
    let width = level_width as f64;
    traces
        .iter()
        .map(|t| (t.distance / width).clamp(0.0, 1.0))
        .sum::<f64>()
        / n
}

/// Fitness score: `F = S - (P_missed + P_extra * (S - P_missed))` with
/// `P_missed = W * missed` and `P_extra = a * tanh(b * extras) + c`.
/// Can go negative.
///
/// The remaining score `S - P_missed` floors at zero: once misses have
/// consumed the base score, extras cannot flip into a reward, which keeps
/// the score non-increasing in both fault counts.
pub fn fitness_score(report: &FaultReport, weights: &FitnessWeights) -> f64 {
    let s = weights.initial_score;
    let p_missed = weights.missed_weight * report.missed as f64;
    let p_extra = weights.extra_a * (weights.extra_b * report.extras as f64).tanh() + weights.extra_c;
    let remaining = (s - p_missed).max(0.0);
    s - (p_missed + p_extra * remaining)
}

/// Among winning traces, the one with the fewest events; ties go to the
/// earliest run index. None when no trace won.
pub fn select_scoring_trace(traces: &[Playtrace]) -> Option<&Playtrace> {
    traces
        .iter()
        .filter(|t| t.won)
        .min_by_key(|t| t.events.len())
}

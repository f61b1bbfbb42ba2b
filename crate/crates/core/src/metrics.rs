//! Evaluation battery: playability, tile-pattern KL divergence, and
//! mechanic-match statistics.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::agent::{plan_and_play, AgentConfig};
use crate::fitness::{count_faults, MechanicSequence};
use crate::level::{TileGrid, TileKind};
use crate::sim::{Playtrace, SimConfig, SimError};

/// Occurrence counts of every w x h tile window of one level.
///
/// Counts live in a BTreeMap so aggregations iterate in a fixed order and
/// reported divergences are bit-stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDistribution {
    pub window: (usize, usize),
    pub counts: BTreeMap<Vec<TileKind>, u64>,
    pub total: u64,
}

/// Per-level minimum divergences with their mean and population std.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub per_level: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl DiversityReport {
    fn from_values(per_level: Vec<f64>) -> DiversityReport {
        let n = per_level.len() as f64;
        let mean = per_level.iter().sum::<f64>() / n;
        let var = per_level.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        DiversityReport { per_level, mean, std: var.sqrt() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("grid {got:?} is smaller than the {window:?} pattern window")]
    GridSmallerThanWindow {
        got: (usize, usize),
        window: (usize, usize),
    },
    #[error("window mismatch: {0:?} vs {1:?}")]
    WindowMismatch((usize, usize), (usize, usize)),
    #[error("need at least two levels for within-group diversity")]
    TooFewLevels,
}

/// Fraction of `runs` seeded agent episodes that win the level.
pub fn playability(
    grid: &TileGrid,
    runs: usize,
    sim: &SimConfig,
    agent: &AgentConfig,
    seed: u64,
) -> Result<f64, SimError> {
    assert!(runs >= 1);
    let wins: Vec<bool> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let config = AgentConfig {
                noise_seed: seed.wrapping_add(i as u64),
                ..agent.clone()
            };
            plan_and_play(grid, sim, &config).map(|t| t.won)
        })
        .collect::<Result<_, _>>()?;
    Ok(wins.iter().filter(|&&w| w).count() as f64 / runs as f64)
}

/// Counts every w x h window at every offset (stride 1, no wrapping).
pub fn pattern_distribution(
    grid: &TileGrid,
    window: (usize, usize),
) -> Result<PatternDistribution, MetricsError> {
    let (w, h) = window;
    assert!(w > 0 && h > 0);
    if grid.width() < w || grid.height() < h {
        return Err(MetricsError::GridSmallerThanWindow {
            got: (grid.width(), grid.height()),
            window,
        });
    }
    let mut counts: BTreeMap<Vec<TileKind>, u64> = BTreeMap::new();
    let mut pattern = Vec::with_capacity(w * h);
    for y0 in 0..=grid.height() - h {
        for x0 in 0..=grid.width() - w {
            pattern.clear();
            for dy in 0..h {
                for dx in 0..w {
                    pattern.push(grid.get(x0 + dx, y0 + dy));
                }
            }
            *counts.entry(pattern.clone()).or_insert(0) += 1;
        }
    }
    let total = counts.values().sum();
    Ok(PatternDistribution { window, counts, total })
}

/// KL(P-hat || Q-hat) over the union pattern alphabet with additive
/// smoothing epsilon. Non-negative and asymmetric.
pub fn tpkl_divergence(
    p: &PatternDistribution,
    q: &PatternDistribution,
    epsilon: f64,
) -> Result<f64, MetricsError> {
    if p.window != q.window {
        return Err(MetricsError::WindowMismatch(p.window, q.window));
    }
    assert!(p.total > 0 && q.total > 0);
    let mut alphabet: BTreeMap<&Vec<TileKind>, (u64, u64)> = BTreeMap::new();
    for (pattern, &c) in &p.counts {
        alphabet.entry(pattern).or_insert((0, 0)).0 = c;
    }
    for (pattern, &c) in &q.counts {
        alphabet.entry(pattern).or_insert((0, 0)).1 = c;
    }
    let a = alphabet.len() as f64;
    let p_denom = p.total as f64 + epsilon * a;
    let q_denom = q.total as f64 + epsilon * a;
    let mut kl = 0.0;
    for &(cp, cq) in alphabet.values() {
        let ph = (cp as f64 + epsilon) / p_denom;
        let qh = (cq as f64 + epsilon) / q_denom;
        kl += ph * (ph / qh).ln();
    }
    Ok(kl)
}

/// For each level, the minimum divergence against every other level in the
/// group (its nearest neighbor), averaged into the group score.
pub fn within_group_diversity(
    levels: &[TileGrid],
    window: (usize, usize),
    epsilon: f64,
) -> Result<DiversityReport, MetricsError> {
    if levels.len() < 2 {
        return Err(MetricsError::TooFewLevels);
    }
    let dists: Vec<PatternDistribution> = levels
        .iter()
        .map(|g| pattern_distribution(g, window))
        .collect::<Result<_, _>>()?;
    let minima: Vec<f64> = (0..dists.len())
        .map(|i| {
            let mut min = f64::INFINITY;
            for j in 0..dists.len() {
                if i != j {
                    min = min.min(tpkl_divergence(&dists[i], &dists[j], epsilon)?);
                }
            }
            Ok(min)
        })
        .collect::<Result<_, MetricsError>>()?;
    Ok(DiversityReport::from_values(minima))
}

/// Divergence of each generated level against the target level.
pub fn vs_target_diversity(
    levels: &[TileGrid],
    target: &TileGrid,
    window: (usize, usize),
    epsilon: f64,
) -> Result<DiversityReport, MetricsError> {
    assert!(!levels.is_empty());
    let target_dist = pattern_distribution(target, window)?;
    let values: Vec<f64> = levels
        .iter()
        .map(|g| tpkl_divergence(&pattern_distribution(g, window)?, &target_dist, epsilon))
        .collect::<Result<_, _>>()?;
    Ok(DiversityReport::from_values(values))
}

/// Matched/extra mechanic counts of a trace against the target, with
/// target-normalized values when the target is non-empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchStats {
    pub matched: usize,
    pub extras: usize,
    pub normalized: Option<(f64, f64)>,
}

pub fn mechanic_match_stats(trace: &Playtrace, target: &MechanicSequence) -> MatchStats {
    let report = count_faults(&MechanicSequence::from_trace(trace), target);
    let matched = target.len() - report.missed;
    let normalized = (!target.is_empty()).then(|| {
        let t = target.len() as f64;
        (matched as f64 / t, report.extras as f64 / t)
    });
    MatchStats { matched, extras: report.extras, normalized }
}

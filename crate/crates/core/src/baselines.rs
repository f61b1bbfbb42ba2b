//! Random and greedy scene-stitching baselines.

use rand::prelude::*;
use thiserror::Error;

use crate::agent::{plan_and_play, AgentConfig};
use crate::corpus::Corpus;
use crate::fitness::MechanicSequence;
use crate::level::{assemble_level, Chromosome, MechanicKind, MechanicSet};
use crate::sim::SimConfig;

/// Uniformly random stitching: random length in `scene_range`, every scene
/// uniform over the whole corpus. Makes no use of any target.
pub fn random_level<R: Rng>(
    corpus: &Corpus,
    scene_range: (usize, usize),
    rng: &mut R,
) -> Chromosome {
    assert!(!corpus.is_empty());
    let (lo, hi) = scene_range;
    let len = rng.random_range(lo..=hi);
    let scenes = (0..len)
        .map(|_| corpus.scenes()[rng.random_range(0..corpus.len())].id)
        .collect();
    Chromosome::new(scenes)
}

/// How many leading mechanics of `remaining` the label set can consume,
/// each label at most once, stopping at the first miss.
fn prefix_consumption(labels: MechanicSet, remaining: &[MechanicKind]) -> usize {
    let mut available = labels;
    let mut consumed = 0;
    for &m in remaining {
        if available.contains(m) {
            available = available.difference([m].into_iter().collect());
            consumed += 1;
        } else {
            break;
        }
    }
    consumed
}

/// Greedy stitching: slot by slot, pick the scene whose labels consume the
/// longest prefix of the remaining target (ties uniformly random), then
/// advance the cursor past what it consumed.
pub fn greedy_level<R: Rng>(
    target: &MechanicSequence,
    corpus: &Corpus,
    scene_range: (usize, usize),
    rng: &mut R,
) -> Chromosome {
    assert!(!corpus.is_empty());
    let (lo, hi) = scene_range;
    let len = rng.random_range(lo..=hi);
    let mut cursor = 0;
    let mut scenes = Vec::with_capacity(len);
    for _ in 0..len {
        let remaining = &target.0[cursor.min(target.len())..];
        let best = corpus
            .scenes()
            .iter()
            .map(|s| prefix_consumption(s.mechanics, remaining))
            .max()
            .expect("non-empty corpus");
        let candidates: Vec<usize> = corpus
            .scenes()
            .iter()
            .enumerate()
            .filter(|(_, s)| prefix_consumption(s.mechanics, remaining) == best)
            .map(|(i, _)| i)
            .collect();
        let pick = candidates[rng.random_range(0..candidates.len())];
        scenes.push(corpus.scenes()[pick].id);
        cursor += best;
    }
    Chromosome::new(scenes)
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("exhausted {attempts} attempts with only {} playable levels", kept.len())]
    AttemptsExhausted {
        kept: Vec<Chromosome>,
        attempts: usize,
    },
    #[error(transparent)]
    Level(#[from] crate::level::LevelError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

/// Levels kept by the playable-at-creation filter, plus the attempts used.
#[derive(Debug, Clone)]
pub struct PlayableBatch {
    pub chromosomes: Vec<Chromosome>,
    pub attempts: usize,
}

/// Generates levels until `count` of them are playable at creation time
/// (a single agent run wins), or `max_attempts` generations have been
/// spent. The partial-result error carries whatever was kept.
pub fn generate_until_playable<R, G>(
    mut generator: G,
    corpus: &Corpus,
    count: usize,
    max_attempts: usize,
    sim: &SimConfig,
    agent: &AgentConfig,
    rng: &mut R,
) -> Result<PlayableBatch, BaselineError>
where
    R: Rng,
    G: FnMut(&mut R) -> Chromosome,
{
    assert!(count >= 1);
    let mut kept = Vec::with_capacity(count);
    let mut attempts = 0;
    while kept.len() < count {
        if attempts >= max_attempts {
            return Err(BaselineError::AttemptsExhausted { kept, attempts });
        }
        attempts += 1;
        let chromosome = generator(rng);
        let grid = assemble_level(&chromosome, corpus)?;
        let config = AgentConfig { noise_seed: rng.random(), ..agent.clone() };
        let trace = plan_and_play(&grid, sim, &config)?;
        if trace.won {
            kept.push(chromosome);
        }
    }
    Ok(PlayableBatch { chromosomes: kept, attempts })
}

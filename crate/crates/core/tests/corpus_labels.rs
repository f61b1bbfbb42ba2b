//! Synthetic-corpus verification: every scene, assembled alone between the
//! pads, is winnable by the agent, and the mechanics it is labeled with
//! actually fire in winning playthroughs.

use scenestitch::agent::{plan_and_play, AgentConfig};
use scenestitch::corpus::synthetic::{build_synthetic_corpus, SyntheticConfig};
use scenestitch::level::{assemble_level, Chromosome, MechanicSet};
use scenestitch::sim::SimConfig;

const SEEDS: u64 = 5;

#[test]
fn every_scene_is_winnable_and_labels_fire() {
    let corpus = build_synthetic_corpus(&SyntheticConfig::default());
    let sim = SimConfig::default();
    let mut failures = Vec::new();
    for scene in corpus.scenes() {
        let grid = assemble_level(&Chromosome::new(vec![scene.id]), &corpus).unwrap();
        let mut wins = 0;
        let mut fired = MechanicSet::EMPTY;
        for seed in 0..SEEDS {
            let agent = AgentConfig { noise_seed: seed, ..AgentConfig::default() };
            let trace = plan_and_play(&grid, &sim, &agent).unwrap();
            if trace.won {
                wins += 1;
                for event in &trace.events {
                    fired.insert(event.kind);
                }
            }
        }
        if wins != SEEDS || !scene.mechanics.is_subset_of(fired) {
            failures.push(format!(
                "{}: wins {wins}/{SEEDS}, labels {}, fired {}",
                scene.name, scene.mechanics, fired
            ));
        }
    }
    assert!(failures.is_empty(), "corpus verification failed:\n{}", failures.join("\n"));
}

#[test]
fn corridor_into_wall_seams_are_unwinnable() {
    // The corpus's one lethal adjacency: a corridor ender directly before
    // a wall starter leaves no headroom to mount the wall.
    let corpus = build_synthetic_corpus(&SyntheticConfig::default());
    let sim = SimConfig::default();
    let ender = corpus.scenes().iter().find(|s| s.name == "a_plain_0").unwrap().id;
    let starter = corpus.scenes().iter().find(|s| s.name == "b_plain_0").unwrap().id;
    let grid = assemble_level(&Chromosome::new(vec![ender, starter]), &corpus).unwrap();
    for seed in 0..SEEDS {
        let agent = AgentConfig { noise_seed: seed, ..AgentConfig::default() };
        let trace = plan_and_play(&grid, &sim, &agent).unwrap();
        assert!(!trace.won, "seed {seed} unexpectedly won the sealed seam");
    }
}

//! Scene-stitching level generation for a tile platformer.
//!
//! The crate builds levels by stitching mechanic-labeled scenes from a
//! corpus, evaluates them with a deterministic simulator and a best-first
//! playing agent, and optimizes scene sequences with a two-population
//! genetic algorithm so that the agent's fired-mechanic sequence matches a
//! target sequence. Baseline generators and evaluation metrics (playability,
//! tile-pattern KL divergence) round out the experiment pipeline.

pub mod agent;
pub mod baselines;
pub mod corpus;
pub mod evolve;
pub mod fitness;
pub mod level;
pub mod metrics;
pub mod rank;
pub mod seeds;
pub mod sim;

pub use agent::{evaluate_n_runs, plan_and_play, AgentConfig};
pub use corpus::{load_corpus, Corpus};
pub use fitness::{
    constraint_value, count_faults, fitness_score, select_scoring_trace, FaultReport,
    FitnessWeights, MechanicSequence,
};
pub use level::{
    assemble_level, parse_level_text, serialize_level_text, Chromosome, MechanicKind, MechanicSet,
    Scene, SceneId, TileGrid, TileKind,
};
pub use sim::{run_episode, Action, MechanicEvent, Playtrace, SimConfig, SimState};

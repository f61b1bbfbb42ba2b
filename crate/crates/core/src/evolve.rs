//! Two-population genetic algorithm over scene sequences.
//!
//! Chromosomes whose constraint value saturates at 1 (the agent's win rate
//! meets the threshold) form the feasible population and optimize the
//! mechanic-sequence fitness; the rest form the infeasible population and
//! optimize the constraint. Individuals move between populations freely as
//! their evaluation changes. Offspring come from variable-length two-point
//! crossover, five mutation operators, plain copies, and linear rank
//! selection within each source population; the top feasible individuals
//! carry over unchanged.
//!
//! Evaluation seeds derive from chromosome content, so identical
//! chromosomes always evaluate identically. That makes elite fitness
//! exactly monotone, lets evaluations be cached, and keeps parallel and
//! serial evaluation bit-identical.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{evaluate_n_runs, AgentConfig};
use crate::corpus::{rank_sample_inverse_mechanics, sample_scene_by_count, Corpus};
use crate::fitness::{
    constraint_value, count_faults, fitness_score, select_scoring_trace, FaultReport,
    FitnessWeights, MechanicSequence,
};
use crate::level::{assemble_level, Chromosome, MechanicKind, MechanicSet, Scene, SceneId};
use crate::rank::linear_rank_weights;
use crate::seeds;
use crate::sim::{Playtrace, SimConfig};

/// Every knob of one evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub min_scenes: usize,
    pub max_scenes: usize,
    pub generations: usize,
    /// Std-dev of the per-scene mechanic-count draw at initialization.
    pub init_mechanic_std: f64,
    /// Override for the mechanic-count mean; defaults to target length
    /// divided by the chromosome length.
    pub init_mechanic_mean: Option<f64>,
    pub weights: FitnessWeights,
    pub sim: SimConfig,
    pub agent: AgentConfig,
    pub seed: u64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            population_size: 250,
            crossover_rate: 0.70,
            mutation_rate: 0.20,
            elite_count: 1,
            min_scenes: 5,
            max_scenes: 25,
            generations: 100,
            init_mechanic_std: 1.0,
            init_mechanic_mean: None,
            weights: FitnessWeights::default(),
            sim: SimConfig::default(),
            agent: AgentConfig::default(),
            seed: 0,
        }
    }
}

/// A chromosome with its evaluation. Fitness is present exactly when the
/// individual is feasible (constraint == 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedChromosome {
    pub chromosome: Chromosome,
    pub constraint: f64,
    pub fitness: Option<f64>,
    /// Winning trace with the fewest events, when any run won.
    pub scoring_trace: Option<Playtrace>,
    /// Faults of the scoring trace, or of the furthest-reaching attempt
    /// when nothing won.
    pub fault_report: FaultReport,
    /// Target mechanics matched by that trace.
    pub matched: usize,
}

impl EvaluatedChromosome {
    pub fn is_feasible(&self) -> bool {
        self.constraint == 1.0
    }
}

/// Per-generation aggregates, the source of the stats CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: Option<f64>,
    pub mean_fitness: Option<f64>,
    pub best_constraint: f64,
    pub mean_constraint: f64,
    pub mean_scenes: f64,
    pub mean_matched: f64,
    pub mean_extras: f64,
    pub feasible_count: usize,
}

impl GenerationStats {
    pub const CSV_HEADER: &'static str =
        "generation,best_fitness,mean_fitness,mean_constraint,mean_scenes,mean_matched,mean_extras";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{:.6},{:.3},{:.3},{:.3}",
            self.generation,
            opt(self.best_fitness),
            opt(self.mean_fitness),
            self.mean_constraint,
            self.mean_scenes,
            self.mean_matched,
            self.mean_extras,
        )
    }
}

/// Draws the initial population: uniform lengths in the configured range,
/// per-scene mechanic counts from a rounded Gaussian around the target
/// density, scenes sampled by that count.
pub fn initialize_population<R: Rng>(
    target: &MechanicSequence,
    corpus: &Corpus,
    config: &EvolveConfig,
    rng: &mut R,
) -> Vec<Chromosome> {
    let mut population = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let len = rng.random_range(config.min_scenes..=config.max_scenes);
        let mu = config
            .init_mechanic_mean
            .unwrap_or(target.len() as f64 / len as f64);
        let normal = rand_distr::Normal::new(mu, config.init_mechanic_std)
            .expect("std is finite and non-negative");
        let mut scenes = Vec::with_capacity(len);
        for _ in 0..len {
            let count = normal.sample(rng).round().clamp(0.0, 12.0) as usize;
            scenes.push(sample_scene_by_count(corpus, count, rng).id);
        }
        population.push(Chromosome::new(scenes));
    }
    population
}

/// Variable-length two-point crossover: each parent picks an independent
/// cut pair and the center segments swap. Children that come out empty are
/// repaired with one rank-sampled scene.
pub fn crossover<R: Rng>(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    corpus: &Corpus,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let cuts = |len: usize, rng: &mut R| {
        let i = rng.random_range(0..=len);
        let j = rng.random_range(0..=len);
        (i.min(j), i.max(j))
    };
    let (ai, aj) = cuts(parent_a.len(), rng);
    let (bi, bj) = cuts(parent_b.len(), rng);
    let a = &parent_a.scenes;
    let b = &parent_b.scenes;
    let mut child_a = Vec::with_capacity(a.len() + b.len());
    child_a.extend_from_slice(&a[..ai]);
    child_a.extend_from_slice(&b[bi..bj]);
    child_a.extend_from_slice(&a[aj..]);
    let mut child_b = Vec::with_capacity(a.len() + b.len());
    child_b.extend_from_slice(&b[..bi]);
    child_b.extend_from_slice(&a[ai..aj]);
    child_b.extend_from_slice(&b[bj..]);
    for child in [&mut child_a, &mut child_b] {
        if child.is_empty() {
            child.push(rank_sample_inverse_mechanics(corpus, rng).id);
        }
    }
    (Chromosome::new(child_a), Chromosome::new(child_b))
}

/// Scene maximizing label coverage of `wanted` with a light penalty for
/// surplus labels; uniform among the best scorers.
pub fn nearest_label_scene<'c, R: Rng>(
    corpus: &'c Corpus,
    wanted: MechanicSet,
    rng: &mut R,
) -> &'c Scene {
    assert!(!corpus.is_empty());
    let score = |s: &Scene| {
        s.mechanics.intersection(wanted).len() as f64
            - 0.25 * s.mechanics.difference(wanted).len() as f64
    };
    let best = corpus
        .scenes()
        .iter()
        .map(score)
        .fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<&Scene> = corpus
        .scenes()
        .iter()
        .filter(|s| score(s) == best)
        .collect();
    candidates[rng.random_range(0..candidates.len())]
}

/// The five mutation operators. The mutated scene index is rank-selected
/// in favor of scenes with more mechanics; the operator is uniform.
pub fn mutate<R: Rng>(chromosome: &Chromosome, corpus: &Corpus, rng: &mut R) -> Chromosome {
    assert!(!chromosome.is_empty());
    let mut scenes = chromosome.scenes.clone();
    let counts: Vec<f64> = scenes
        .iter()
        .map(|id| corpus.scene(*id).expect("resolvable").mechanics.len() as f64)
        .collect();
    let weights = linear_rank_weights(&counts, false);
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    let idx = dist.sample(rng);
    let op = rng.random_range(0..5u8);
    let labels_of = |id: SceneId| corpus.scene(id).expect("resolvable").mechanics;

    match op {
        // Delete, unless it would empty the chromosome (then Change).
        0 if scenes.len() > 1 => {
            scenes.remove(idx);
        }
        // Add an inverse-rank-sampled scene to a random side.
        1 => {
            let at = if rng.random_bool(0.5) { idx } else { idx + 1 };
            scenes.insert(at, rank_sample_inverse_mechanics(corpus, rng).id);
        }
        // Split the labels in half and replace with two nearest scenes.
        2 => {
            let mut labels: Vec<MechanicKind> = labels_of(scenes[idx]).iter().collect();
            labels.shuffle(rng);
            let mut left_n = labels.len() / 2;
            if labels.len() % 2 == 1 && rng.random_bool(0.5) {
                left_n += 1;
            }
            let left: MechanicSet = labels[..left_n].iter().copied().collect();
            let right: MechanicSet = labels[left_n..].iter().copied().collect();
            let left_scene = nearest_label_scene(corpus, left, rng).id;
            let right_scene = nearest_label_scene(corpus, right, rng).id;
            scenes[idx] = left_scene;
            scenes.insert(idx + 1, right_scene);
        }
        // Merge with a neighbor into one scene holding the union.
        3 if scenes.len() > 1 => {
            let left_side = if idx == 0 {
                false
            } else if idx + 1 == scenes.len() {
                true
            } else {
                rng.random_bool(0.5)
            };
            let other = if left_side { idx - 1 } else { idx + 1 };
            let union = labels_of(scenes[idx]).union(labels_of(scenes[other]));
            let exact: Vec<SceneId> = corpus
                .scenes()
                .iter()
                .filter(|s| s.mechanics == union)
                .map(|s| s.id)
                .collect();
            let merged = if exact.is_empty() {
                nearest_label_scene(corpus, union, rng).id
            } else {
                exact[rng.random_range(0..exact.len())]
            };
            let keep = idx.min(other);
            scenes[keep] = merged;
            scenes.remove(keep + 1);
        }
        // Change (also the fallback for Delete/Merge on length-1).
        _ => {
            scenes[idx] = rank_sample_inverse_mechanics(corpus, rng).id;
        }
    }
    Chromosome::new(scenes)
}

/// Evaluates one chromosome: N agent runs with a content-derived seed,
/// constraint from the run results, fitness from the scoring trace when
/// feasible.
pub fn evaluate_chromosome(
    chromosome: &Chromosome,
    corpus: &Corpus,
    target: &MechanicSequence,
    config: &EvolveConfig,
    eval_seed: u64,
) -> EvaluatedChromosome {
    let grid = assemble_level(chromosome, corpus).expect("operators keep chromosomes valid");
    let seed_base = seeds::fnv1a(eval_seed, chromosome.scenes.iter().map(|id| id.0));
    let traces = evaluate_n_runs(
        &grid,
        config.weights.runs_per_eval,
        &config.sim,
        &config.agent,
        seed_base,
    )
    .expect("assembled levels always carry start and flag");
    let constraint = constraint_value(&traces, grid.width(), &config.weights);
    let scoring_trace = select_scoring_trace(&traces).cloned();
    let stats_trace = scoring_trace.clone().unwrap_or_else(|| {
        traces
            .iter()
            .max_by(|a, b| a.distance.partial_cmp(&b.distance).unwrap())
            .cloned()
            .expect("at least one run")
    });
    let fault_report = count_faults(&MechanicSequence::from_trace(&stats_trace), target);
    let fitness = (constraint == 1.0).then(|| fitness_score(&fault_report, &config.weights));
    let matched = target.len() - fault_report.missed;
    EvaluatedChromosome {
        chromosome: chromosome.clone(),
        constraint,
        fitness,
        scoring_trace,
        fault_report,
        matched,
    }
}

fn stats_for(generation: usize, evaluated: &[EvaluatedChromosome]) -> GenerationStats {
    let n = evaluated.len() as f64;
    let feasible: Vec<&EvaluatedChromosome> =
        evaluated.iter().filter(|e| e.is_feasible()).collect();
    let best_fitness = feasible
        .iter()
        .filter_map(|e| e.fitness)
        .fold(None, |acc: Option<f64>, f| Some(acc.map_or(f, |a| a.max(f))));
    let mean_fitness = if feasible.is_empty() {
        None
    } else {
        Some(feasible.iter().filter_map(|e| e.fitness).sum::<f64>() / feasible.len() as f64)
    };
    GenerationStats {
        generation,
        best_fitness,
        mean_fitness,
        best_constraint: evaluated.iter().map(|e| e.constraint).fold(0.0, f64::max),
        mean_constraint: evaluated.iter().map(|e| e.constraint).sum::<f64>() / n,
        mean_scenes: evaluated.iter().map(|e| e.chromosome.len() as f64).sum::<f64>() / n,
        mean_matched: evaluated.iter().map(|e| e.matched as f64).sum::<f64>() / n,
        mean_extras: evaluated.iter().map(|e| e.fault_report.extras as f64).sum::<f64>() / n,
        feasible_count: feasible.len(),
    }
}

/// Runs the full FI-2Pop loop and returns the final best individual (best
/// feasible by fitness, else best by constraint) plus per-generation stats.
pub fn run_evolution(
    target: &MechanicSequence,
    corpus: &Corpus,
    config: &EvolveConfig,
) -> (EvaluatedChromosome, Vec<GenerationStats>) {
    assert!(config.population_size > 0);
    assert!(config.crossover_rate + config.mutation_rate <= 1.0 + 1e-12);
    let mut init_rng =
        ChaCha8Rng::seed_from_u64(seeds::split(config.seed, seeds::STREAM_EVOLVE_INIT));
    let mut breed_rng =
        ChaCha8Rng::seed_from_u64(seeds::split(config.seed, seeds::STREAM_EVOLVE_BREED));
    let eval_seed = seeds::split(config.seed, seeds::STREAM_EVOLVE_EVAL);

    let mut population = initialize_population(target, corpus, config, &mut init_rng);
    let mut cache: HashMap<Vec<SceneId>, EvaluatedChromosome> = HashMap::new();
    let mut stats = Vec::with_capacity(config.generations + 1);

    for generation in 0..=config.generations {
        // Evaluate every chromosome not seen before, in parallel. Results
        // depend only on content, so merge order is irrelevant.
        let mut pending: Vec<Vec<SceneId>> = Vec::new();
        for chromosome in &population {
            if !cache.contains_key(&chromosome.scenes) && !pending.contains(&chromosome.scenes) {
                pending.push(chromosome.scenes.clone());
            }
        }
        let fresh: Vec<(Vec<SceneId>, EvaluatedChromosome)> = pending
            .into_par_iter()
            .map(|scenes| {
                let chromosome = Chromosome::new(scenes.clone());
                let evaluated =
                    evaluate_chromosome(&chromosome, corpus, target, config, eval_seed);
                (scenes, evaluated)
            })
            .collect();
        cache.extend(fresh);
        let evaluated: Vec<EvaluatedChromosome> = population
            .iter()
            .map(|c| cache[&c.scenes].clone())
            .collect();

        stats.push(stats_for(generation, &evaluated));
        if generation == config.generations {
            let best = best_of(&evaluated);
            return (best, stats);
        }

        population = breed(&evaluated, corpus, config, &mut breed_rng);
    }
    unreachable!("loop returns on the final generation");
}

fn best_of(evaluated: &[EvaluatedChromosome]) -> EvaluatedChromosome {
    let feasible_best = evaluated
        .iter()
        .filter(|e| e.is_feasible())
        .max_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap());
    match feasible_best {
        Some(best) => best.clone(),
        None => evaluated
            .iter()
            .max_by(|a, b| a.constraint.partial_cmp(&b.constraint).unwrap())
            .expect("population is non-empty")
            .clone(),
    }
}

/// Builds the next generation: elites unchanged, then offspring from each
/// population proportionally to its size, bred by the operator lottery.
fn breed(
    evaluated: &[EvaluatedChromosome],
    corpus: &Corpus,
    config: &EvolveConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Chromosome> {
    let pop = config.population_size;
    let mut feasible: Vec<&EvaluatedChromosome> = Vec::new();
    let mut infeasible: Vec<&EvaluatedChromosome> = Vec::new();
    for e in evaluated {
        if e.is_feasible() {
            feasible.push(e);
        } else {
            infeasible.push(e);
        }
    }

    // Elites: top feasible by fitness; when nothing is feasible yet, top
    // by constraint so progress is still protected.
    let mut elite_pool: Vec<&EvaluatedChromosome> = if feasible.is_empty() {
        let mut pool = infeasible.clone();
        pool.sort_by(|a, b| b.constraint.partial_cmp(&a.constraint).unwrap());
        pool
    } else {
        let mut pool = feasible.clone();
        pool.sort_by(|a, b| b.fitness.partial_cmp(&a.fitness).unwrap());
        pool
    };
    elite_pool.truncate(config.elite_count.min(pop));
    let mut next: Vec<Chromosome> = elite_pool.iter().map(|e| e.chromosome.clone()).collect();

    let offspring_total = pop - next.len();
    // Proportional split with at least one slot per non-empty population.
    let mut from_feasible = if feasible.is_empty() {
        0
    } else {
        ((offspring_total as f64 * feasible.len() as f64 / evaluated.len() as f64).round()
            as usize)
            .clamp(1, offspring_total)
    };
    if infeasible.is_empty() {
        from_feasible = offspring_total;
    } else if feasible.is_empty() {
        from_feasible = 0;
    } else if offspring_total - from_feasible == 0 && !infeasible.is_empty() {
        from_feasible = offspring_total.saturating_sub(1).max(1);
    }
    let quotas = [
        (feasible, from_feasible, true),
        (infeasible, offspring_total - from_feasible, false),
    ];

    for (pool, quota, by_fitness) in quotas {
        if quota == 0 || pool.is_empty() {
            continue;
        }
        let keys: Vec<f64> = pool
            .iter()
            .map(|e| {
                if by_fitness {
                    e.fitness.expect("feasible has fitness")
                } else {
                    e.constraint
                }
            })
            .collect();
        let weights = linear_rank_weights(&keys, false);
        let dist = WeightedIndex::new(&weights).expect("positive weights");
        let mut made = 0;
        while made < quota {
            let roll: f64 = rng.random();
            if roll < config.crossover_rate {
                let a = pool[dist.sample(rng)];
                let b = pool[dist.sample(rng)];
                let (child_a, child_b) = crossover(&a.chromosome, &b.chromosome, corpus, rng);
                next.push(child_a);
                made += 1;
                if made < quota {
                    next.push(child_b);
                    made += 1;
                }
            } else if roll < config.crossover_rate + config.mutation_rate {
                let parent = pool[dist.sample(rng)];
                next.push(mutate(&parent.chromosome, corpus, rng));
                made += 1;
            } else {
                let parent = pool[dist.sample(rng)];
                next.push(parent.chromosome.clone());
                made += 1;
            }
        }
    }
    debug_assert_eq!(next.len(), pop);
    next
}

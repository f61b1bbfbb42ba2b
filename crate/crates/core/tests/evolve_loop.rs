//! End-to-end behavior of the evolution loop at desk scale.

use scenestitch::corpus::synthetic::{build_synthetic_corpus, SyntheticConfig};
use scenestitch::corpus::Corpus;
use scenestitch::evolve::{run_evolution, EvolveConfig, GenerationStats};
use scenestitch::fitness::{FitnessWeights, MechanicSequence};
use scenestitch::level::{MechanicKind, Scene, SceneId, TileGrid, TileKind};

fn flat_only_corpus() -> Corpus {
    let mut grid = TileGrid::new(16, 14);
    for x in 0..16 {
        grid.set(x, 13, TileKind::Ground);
    }
    Corpus::from_scenes(vec![Scene {
        id: SceneId(0),
        name: "flat".into(),
        grid,
        mechanics: scenestitch::level::MechanicSet::EMPTY,
    }])
    .unwrap()
}

fn small_config(seed: u64) -> EvolveConfig {
    EvolveConfig {
        population_size: 8,
        generations: 6,
        weights: FitnessWeights { runs_per_eval: 2, ..FitnessWeights::default() },
        seed,
        ..EvolveConfig::default()
    }
}

#[test]
fn flat_corpus_with_empty_target_is_perfect_from_generation_zero() {
    let corpus = flat_only_corpus();
    let target = MechanicSequence(vec![]);
    let (best, stats) = run_evolution(&target, &corpus, &small_config(3));
    // The agent wins flat levels, and with an empty target there are no
    // faults, so generation 0 already scores the full initial value.
    assert_eq!(stats[0].best_fitness, Some(1.0));
    assert_eq!(best.fitness, Some(1.0));
    assert!(best.is_feasible());
    assert_eq!(best.fault_report.missed, 0);
    assert_eq!(best.fault_report.extras, 0);
}

#[test]
fn elite_fitness_is_monotone_and_stats_are_deterministic() {
    let corpus = build_synthetic_corpus(&SyntheticConfig::default());
    let target = MechanicSequence(vec![
        MechanicKind::Jump,
        MechanicKind::CoinCollect,
        MechanicKind::Jump,
        MechanicKind::StompKill,
        MechanicKind::CoinCollect,
    ]);
    let (_, stats_a) = run_evolution(&target, &corpus, &small_config(11));
    let (_, stats_b) = run_evolution(&target, &corpus, &small_config(11));
    assert_eq!(stats_a, stats_b, "identical seeds must give identical stats streams");
    let mut last: Option<f64> = None;
    for s in &stats_a {
        if let Some(best) = s.best_fitness {
            if let Some(prev) = last {
                assert!(best >= prev - 1e-12, "elite fitness decreased: {prev} -> {best}");
            }
            last = Some(best);
        } else {
            assert!(last.is_none(), "feasible elite disappeared after appearing");
        }
    }
}

#[test]
fn serial_and_parallel_evaluation_agree() {
    let corpus = build_synthetic_corpus(&SyntheticConfig::default());
    let target = MechanicSequence(vec![MechanicKind::Jump, MechanicKind::CoinCollect]);
    let config = small_config(21);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (best_serial, stats_serial) = single.install(|| run_evolution(&target, &corpus, &config));
    let (best_parallel, stats_parallel) = run_evolution(&target, &corpus, &config);
    assert_eq!(stats_serial, stats_parallel);
    assert_eq!(best_serial.chromosome, best_parallel.chromosome);
    assert_eq!(best_serial.fitness, best_parallel.fitness);
}

#[test]
fn stats_csv_shape_is_frozen() {
    assert_eq!(
        GenerationStats::CSV_HEADER,
        "generation,best_fitness,mean_fitness,mean_constraint,mean_scenes,mean_matched,mean_extras"
    );
    let stats = GenerationStats {
        generation: 3,
        best_fitness: Some(0.5),
        mean_fitness: None,
        best_constraint: 1.0,
        mean_constraint: 0.25,
        mean_scenes: 12.5,
        mean_matched: 4.0,
        mean_extras: 2.25,
        feasible_count: 1,
    };
    assert_eq!(stats.csv_row(), "3,0.500000,,0.250000,12.500,4.000,2.250");
}

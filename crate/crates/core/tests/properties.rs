//! Property tests for the pure data paths: level text round-trips,
//! assembly arithmetic, fault counting, score monotonicity, and the
//! divergence metric.

mod common;

use common::greedy_alignment_oracle;
use proptest::prelude::*;
use scenestitch::corpus::synthetic::{build_synthetic_corpus, SyntheticConfig};
use scenestitch::fitness::{
    constraint_value, count_faults, fitness_score, FaultReport, FitnessWeights, MechanicSequence,
};
use scenestitch::level::{
    assemble_level, parse_level_text, serialize_level_text, Chromosome, MechanicKind, SceneId,
    TileGrid, TileKind, PAD_WIDTH,
};
use scenestitch::metrics::{pattern_distribution, tpkl_divergence};
use scenestitch::sim::Playtrace;

fn arb_tile() -> impl Strategy<Value = TileKind> {
    prop::sample::select(TileKind::ALL.to_vec())
}

fn arb_grid() -> impl Strategy<Value = TileGrid> {
    (1usize..20, 1usize..16).prop_flat_map(|(w, h)| {
        prop::collection::vec(arb_tile(), w * h).prop_map(move |cells| {
            let mut grid = TileGrid::new(w, h);
            for (i, kind) in cells.into_iter().enumerate() {
                grid.set(i % w, i / w, kind);
            }
            grid
        })
    })
}

fn arb_mechanics(max_len: usize) -> impl Strategy<Value = Vec<MechanicKind>> {
    prop::collection::vec(prop::sample::select(MechanicKind::ALL.to_vec()), 0..max_len)
}

proptest! {
    #[test]
    fn level_text_round_trips(grid in arb_grid()) {
        let text = serialize_level_text(&grid);
        let parsed = parse_level_text(&text).unwrap();
        prop_assert_eq!(&parsed, &grid);
        prop_assert_eq!(serialize_level_text(&parsed), text);
    }

    #[test]
    fn assembly_width_formula(len in 1usize..30, seed in 0u64..1000) {
        let corpus = build_synthetic_corpus(&SyntheticConfig::default());
        let mut rng = common::seeded(seed);
        use rand::Rng;
        let scenes: Vec<SceneId> = (0..len)
            .map(|_| SceneId(rng.random_range(0..corpus.len() as u32)))
            .collect();
        let grid = assemble_level(&Chromosome::new(scenes), &corpus).unwrap();
        prop_assert_eq!(grid.width(), PAD_WIDTH * 2 + len * corpus.scene_width());
        prop_assert_eq!(grid.height(), corpus.scene_height());
    }

    #[test]
    fn fault_count_matches_oracle_on_random_pairs(
        generated in arb_mechanics(12),
        target in arb_mechanics(12),
    ) {
        let report = count_faults(
            &MechanicSequence(generated.clone()),
            &MechanicSequence(target.clone()),
        );
        let (missed, extras) = greedy_alignment_oracle(&generated, &target);
        prop_assert_eq!(report.missed, missed);
        prop_assert_eq!(report.extras, extras);
    }

    #[test]
    fn fault_count_identities(seq in arb_mechanics(16)) {
        let s = MechanicSequence(seq.clone());
        let same = count_faults(&s, &s);
        prop_assert_eq!(same, FaultReport { missed: 0, extras: 0 });
        let empty = MechanicSequence(vec![]);
        prop_assert_eq!(
            count_faults(&empty, &s),
            FaultReport { missed: seq.len(), extras: 0 }
        );
        prop_assert_eq!(count_faults(&s, &empty), FaultReport { missed: 0, extras: 0 });
    }

    #[test]
    fn fitness_is_monotone_in_faults(missed in 0usize..40, extras in 0usize..200) {
        let weights = FitnessWeights::default();
        let f = fitness_score(&FaultReport { missed, extras }, &weights);
        let f_miss = fitness_score(&FaultReport { missed: missed + 1, extras }, &weights);
        let f_extra = fitness_score(&FaultReport { missed, extras: extras + 1 }, &weights);
        prop_assert!(f_miss <= f + 1e-12);
        prop_assert!(f_extra <= f + 1e-12);
    }

    #[test]
    fn constraint_stays_in_unit_interval(
        wins in prop::collection::vec(any::<bool>(), 1..8),
        distances in prop::collection::vec(0.0f64..300.0, 1..8),
    ) {
        let n = wins.len().min(distances.len());
        let traces: Vec<Playtrace> = (0..n)
            .map(|i| Playtrace {
                events: vec![],
                won: wins[i],
                distance: distances[i].min(250.0),
                ticks_used: 0,
            })
            .collect();
        let c = constraint_value(&traces, 250, &FitnessWeights::default());
        prop_assert!((0.0..=1.0).contains(&c));
        let all_won = traces.iter().all(|t| t.won);
        if all_won {
            prop_assert_eq!(c, 1.0);
        }
    }

    #[test]
    fn divergence_non_negative_and_zero_on_self(a in arb_grid(), b in arb_grid()) {
        let window = (2, 2);
        if a.width() < 2 || a.height() < 2 || b.width() < 2 || b.height() < 2 {
            return Ok(());
        }
        let p = pattern_distribution(&a, window).unwrap();
        let q = pattern_distribution(&b, window).unwrap();
        let self_kl = tpkl_divergence(&p, &p, 1e-5).unwrap();
        prop_assert!(self_kl.abs() < 1e-12);
        let kl = tpkl_divergence(&p, &q, 1e-5).unwrap();
        prop_assert!(kl >= -1e-12);
    }
}

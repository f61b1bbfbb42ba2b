//! Hand-constructed scene corpus for tests and desk-scale experiments.
//!
//! Every scene is 16x14 with its floor on the bottom row so stitching
//! lines up with the assembly pads. Scenes come in three families:
//!
//! * safe scenes: flat fillers and one scene per mechanic, built so the
//!   labeled mechanics actually fire during play (gaps force jumps, low
//!   ceilings cap jump height, trenches force stomps, and so on);
//! * corridor enders ("a_" scenes): the last six columns run under a
//!   height-3 ceiling, so the avatar leaves the scene with no headroom;
//! * wall starters ("b_" scenes): the first two columns carry a height-3
//!   wall that needs a full jump to mount.
//!
//! A corridor ender followed by a wall starter is unwinnable: there is no
//! room to rise before the wall. That one lethal adjacency is what makes
//! uninformed stitching fail while leaving evolution plenty of feasible
//! arrangements.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::level::{MechanicKind, Scene, SceneId, TileGrid, TileKind};

use super::Corpus;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub scene_width: usize,
    pub scene_height: usize,
    pub seed: u64,
    /// Seed-jittered variants built per parameterized family.
    pub variants_per_family: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            scene_width: 16,
            scene_height: 14,
            seed: 0,
            variants_per_family: 2,
        }
    }
}

/// Scene under construction. "Height" arguments count tiles above the
/// floor surface: a surface at height k puts feet at row `floor - k`.
struct SceneBuilder {
    grid: TileGrid,
    floor: usize,
}

impl SceneBuilder {
    fn new(width: usize, height: usize) -> SceneBuilder {
        let mut grid = TileGrid::new(width, height);
        let floor = height - 1;
        for x in 0..width {
            grid.set(x, floor, TileKind::Ground);
        }
        SceneBuilder { grid, floor }
    }

    /// Removes the floor over `width` columns starting at `c0` (bottomless).
    fn gap(&mut self, c0: usize, width: usize) -> &mut Self {
        for c in c0..c0 + width {
            self.grid.set(c, self.floor, TileKind::Empty);
        }
        self
    }

    /// Raises the ground by `k` tiles over the column range (inclusive).
    fn raise(&mut self, c0: usize, c1: usize, k: usize) -> &mut Self {
        for c in c0..=c1 {
            for r in self.floor - k..self.floor {
                self.grid.set(c, r, TileKind::Ground);
            }
        }
        self
    }

    /// Solid ceiling row at height `k` over the column range (inclusive).
    fn ceiling(&mut self, c0: usize, c1: usize, k: usize, kind: TileKind) -> &mut Self {
        for c in c0..=c1 {
            self.grid.set(c, self.floor - k, kind);
        }
        self
    }

    /// One tile at height `k` above the floor.
    fn tile(&mut self, c: usize, k: usize, kind: TileKind) -> &mut Self {
        self.grid.set(c, self.floor - k, kind);
        self
    }

    fn coin(&mut self, c: usize, k: usize) -> &mut Self {
        self.tile(c, k, TileKind::Coin)
    }

    /// Enemy standing on the floor.
    fn enemy(&mut self, c: usize, kind: TileKind) -> &mut Self {
        self.tile(c, 1, kind)
    }

    fn platform(&mut self, c0: usize, c1: usize, k: usize) -> &mut Self {
        self.ceiling(c0, c1, k, TileKind::Platform)
    }

    fn build(self, name: impl Into<String>, labels: &[MechanicKind]) -> Scene {
        Scene {
            id: SceneId(0),
            name: name.into(),
            grid: self.grid,
            mechanics: labels.iter().copied().collect(),
        }
    }
}

/// Corridor-ender suffix: the last six columns are sealed solid from the
/// scene top down to a height-3 passage, so the avatar leaves the scene
/// with no headroom and no roof to walk over.
fn corridor_exit(b: &mut SceneBuilder, width: usize) {
    for c in width - 6..width {
        for r in 0..=b.floor - 3 {
            b.grid.set(c, r, TileKind::SolidBlock);
        }
    }
}

/// Wall-starter prefix: a height-3 wall on the first two columns.
fn entry_wall(b: &mut SceneBuilder) {
    b.raise(0, 1, 3);
}

fn build_scene<F>(w: usize, h: usize, name: String, labels: &[MechanicKind], f: F) -> Scene
where
    F: FnOnce(&mut SceneBuilder),
{
    let mut b = SceneBuilder::new(w, h);
    f(&mut b);
    b.build(name, labels)
}

/// Builds the full synthetic corpus. Deterministic in the config: the seed
/// only drives small positional jitter between variants of each family.
pub fn build_synthetic_corpus(config: &SyntheticConfig) -> Corpus {
    let w = config.scene_width;
    let h = config.scene_height;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scenes: Vec<Scene> = Vec::new();

    use MechanicKind::*;
    use TileKind::{Brick, EnemyGoomba, EnemyKoopa, EnemySpiky, QuestionCoin, QuestionPowerup, SolidBlock};

    // --- Flat fillers -----------------------------------------------------
    scenes.push(build_scene(w, h, "flat_plain".into(), &[], |_| {}));
    scenes.push(build_scene(w, h, "flat_deco_platform".into(), &[], |b| {
        b.platform(5, 10, 6);
        b.coin(7, 1).coin(8, 1);
    }));
    scenes.push(build_scene(w, h, "flat_deco_blocks".into(), &[], |b| {
        b.ceiling(4, 6, 7, SolidBlock).ceiling(10, 12, 7, SolidBlock);
        b.coin(8, 1);
    }));
    scenes.push(build_scene(w, h, "flat_deco_coins".into(), &[], |b| {
        b.coin(5, 1).coin(7, 1).coin(9, 1).coin(11, 1);
    }));

    // --- One scene per mechanic -------------------------------------------
    for v in 0..config.variants_per_family {
        let j = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| rng.random_range(lo..=hi);

        // A plain two-wide gap: any crossing is a jump.
        let c = (7 + j(&mut rng, -2, 1)) as usize;
        scenes.push(build_scene(w, h, format!("m_jump_{v}"), &[Jump], move |b| {
            b.gap(c, 2);
        }));

        // A one-wide hole under a height-3 ceiling: the hop is height-capped.
        let c = (7 + j(&mut rng, -1, 2)) as usize;
        scenes.push(build_scene(w, h, format!("m_lowjump_{v}"), &[LowJump], move |b| {
            b.ceiling(4, 12, 3, SolidBlock);
            b.gap(c, 2);
        }));

        // A 2-high plateau: the far-side drop is a short, low hop.
        let c = (6 + j(&mut rng, -1, 1)) as usize;
        scenes.push(build_scene(w, h, format!("m_shortjump_{v}"), &[ShortJump], move |b| {
            b.raise(c, c + 3, 2);
        }));

        // A 3-high wall: mounting it needs more than the high-jump threshold.
        let c = (7 + j(&mut rng, -2, 2)) as usize;
        scenes.push(build_scene(w, h, format!("m_highjump_{v}"), &[HighJump], move |b| {
            b.raise(c, c + 1, 3);
        }));

        // A five-wide gap with a runway: crossing spans the long threshold.
        let c = (6 + j(&mut rng, -1, 1)) as usize;
        scenes.push(build_scene(w, h, format!("m_longjump_{v}"), &[LongJump], move |b| {
            b.gap(c, 5);
        }));

        // Two goombas in a low trench: no headroom to clear them both.
        let c = (7 + j(&mut rng, -1, 1)) as usize;
        scenes.push(build_scene(w, h, format!("m_stomp_{v}"), &[StompKill], move |b| {
            b.ceiling(4, 12, 3, SolidBlock);
            b.enemy(c, EnemyGoomba).enemy(c + 2, EnemyGoomba);
        }));

        // A koopa ahead of a goomba column under a mid ceiling: the kicked
        // shell clears the train.
        scenes.push(build_scene(w, h, format!("m_shell_{v}"), &[ShellKill], |b| {
            b.ceiling(3, 13, 3, SolidBlock);
            b.enemy(6, EnemyKoopa).enemy(8, EnemyKoopa);
            b.enemy(11, EnemyGoomba).enemy(13, EnemyGoomba);
        }));

        // A goomba on a floating platform walks off into a floor slot and
        // out of the level.
        scenes.push(build_scene(w, h, format!("m_fall_{v}"), &[FallKill], |b| {
            b.platform(8, 10, 5);
            b.tile(8, 6, EnemyGoomba);
            b.gap(6, 2);
        }));

        // Powerup blocks hang over a gap onto a raised ledge: the mounting
        // jump bonks them and the mushroom drops onto the landing ledge.
        scenes.push(build_scene(w, h, format!("m_mode_{v}"), &[ModeChange], |b| {
            b.tile(6, 3, QuestionPowerup).tile(7, 3, QuestionPowerup);
            b.gap(6, 2);
            b.raise(8, 11, 1);
        }));

        // Coins at body height: walking through collects them.
        let c = (6 + j(&mut rng, -2, 2)) as usize;
        scenes.push(build_scene(w, h, format!("m_coin_{v}"), &[CoinCollect], move |b| {
            b.coin(c, 1).coin(c + 1, 1).coin(c + 2, 1);
        }));

        // Bricks over a gap onto a raised ledge: the mounting jump must
        // bonk the bricks.
        scenes.push(build_scene(w, h, format!("m_brick_{v}"), &[BrickBlock], |b| {
            b.tile(6, 3, Brick).tile(7, 3, Brick);
            b.gap(6, 2);
            b.raise(8, 11, 1);
        }));

        // Same geometry with powerup blocks in the bump zone.
        scenes.push(build_scene(w, h, format!("m_qblock_{v}"), &[QuestionBlock], |b| {
            b.tile(6, 3, QuestionCoin).tile(7, 3, QuestionCoin);
            b.gap(6, 2);
            b.raise(8, 11, 1);
        }));
    }

    // --- Multi-mechanic scenes --------------------------------------------
    scenes.push(build_scene(w, h, "mm_trench_coins".into(), &[StompKill, CoinCollect], |b| {
        b.ceiling(4, 12, 3, SolidBlock);
        b.coin(5, 1).coin(6, 1);
        b.enemy(8, EnemyGoomba).enemy(10, EnemyGoomba);
    }));
    scenes.push(build_scene(w, h, "mm_wall_coins".into(), &[HighJump, CoinCollect], |b| {
        b.raise(7, 8, 3);
        b.coin(7, 4).coin(8, 4);
    }));
    scenes.push(build_scene(w, h, "mm_gap_coins".into(), &[Jump, CoinCollect], |b| {
        b.coin(5, 1);
        b.gap(7, 2);
        b.coin(7, 2).coin(8, 2);
    }));
    scenes.push(build_scene(w, h, "mm_long_coins".into(), &[LongJump, CoinCollect], |b| {
        b.coin(4, 1).coin(5, 1);
        b.gap(6, 5);
    }));
    scenes.push(build_scene(w, h, "mm_tunnel_q".into(), &[QuestionBlock, CoinCollect], |b| {
        b.ceiling(4, 10, 3, QuestionCoin);
        b.gap(6, 2);
    }));
    scenes.push(build_scene(w, h, "mm_mode_stomp".into(), &[ModeChange, StompKill], |b| {
        b.ceiling(2, 5, 3, SolidBlock);
        b.enemy(3, EnemyGoomba).enemy(5, EnemyGoomba);
        b.tile(8, 3, QuestionPowerup).tile(9, 3, QuestionPowerup);
        b.gap(8, 2);
        b.raise(10, 13, 1);
    }));
    scenes.push(build_scene(w, h, "mm_double_gap".into(), &[Jump], |b| {
        b.gap(5, 2).gap(10, 2);
    }));
    scenes.push(build_scene(w, h, "mm_spiky_gap".into(), &[Jump], |b| {
        b.gap(5, 2);
        b.enemy(10, EnemySpiky);
    }));
    scenes.push(build_scene(w, h, "mm_koopa_coins".into(), &[StompKill, CoinCollect], |b| {
        b.coin(5, 1).coin(6, 1);
        b.enemy(9, EnemyKoopa);
        b.ceiling(7, 12, 3, SolidBlock);
    }));
    scenes.push(build_scene(w, h, "mm_high_tunnel".into(), &[HighJump, LowJump], |b| {
        b.raise(4, 5, 3);
        b.ceiling(9, 14, 3, SolidBlock);
        b.gap(11, 2);
    }));
    scenes.push(build_scene(w, h, "mm_brick_coins".into(), &[BrickBlock, CoinCollect], |b| {
        b.coin(4, 1);
        b.tile(7, 3, Brick).tile(8, 3, Brick);
        b.gap(7, 2);
        b.raise(9, 12, 1);
    }));
    scenes.push(build_scene(w, h, "mm_q_stomp".into(), &[QuestionBlock, StompKill], |b| {
        b.ceiling(1, 12, 3, QuestionCoin);
        b.enemy(2, EnemyGoomba).enemy(4, EnemyGoomba);
        b.gap(8, 2);
    }));

    // --- Rich multi-mechanic scenes: the compact-matching workhorses ------
    scenes.push(build_scene(w, h, "r_trench_gap_coins".into(), &[Jump, StompKill, CoinCollect], |b| {
        b.coin(3, 1).coin(4, 1);
        b.ceiling(5, 10, 3, SolidBlock);
        b.enemy(7, EnemyGoomba).enemy(9, EnemyGoomba);
        b.gap(12, 2);
    }));
    scenes.push(build_scene(w, h, "r_stomp_q_coin".into(), &[StompKill, QuestionBlock, CoinCollect], |b| {
        b.ceiling(4, 11, 3, QuestionCoin);
        b.gap(6, 2);
        b.enemy(9, EnemyGoomba).enemy(11, EnemyGoomba);
    }));
    scenes.push(build_scene(w, h, "r_shell_coin_gap".into(), &[Jump, StompKill, ShellKill, CoinCollect], |b| {
        b.coin(2, 1);
        b.ceiling(3, 10, 3, SolidBlock);
        b.enemy(5, EnemyKoopa).enemy(7, EnemyKoopa);
        b.enemy(10, EnemyGoomba);
        b.gap(12, 2);
    }));
    scenes.push(build_scene(w, h, "r_mode_coin_jump".into(), &[Jump, ModeChange, QuestionBlock, CoinCollect], |b| {
        b.coin(3, 1).coin(4, 1);
        b.tile(6, 3, QuestionPowerup).tile(7, 3, QuestionPowerup);
        b.gap(6, 2);
        b.raise(8, 11, 1);
        b.gap(13, 1);
    }));
    scenes.push(build_scene(w, h, "r_high_low_coin".into(), &[HighJump, LowJump, CoinCollect], |b| {
        b.ceiling(2, 7, 3, SolidBlock);
        b.gap(4, 2);
        b.coin(8, 1).coin(8, 2);
        b.raise(12, 13, 3);
    }));
    scenes.push(build_scene(w, h, "r_long_stomp_coin".into(), &[LongJump, StompKill, CoinCollect], |b| {
        b.coin(2, 1);
        b.ceiling(3, 8, 3, SolidBlock);
        b.enemy(5, EnemyGoomba).enemy(7, EnemyGoomba);
        b.gap(10, 5);
    }));
    scenes.push(build_scene(w, h, "r_fall_coin_jump".into(), &[Jump, FallKill, CoinCollect], |b| {
        b.coin(3, 1).coin(4, 1);
        b.platform(8, 10, 5);
        b.tile(8, 6, EnemyGoomba);
        b.gap(6, 2);
    }));
    scenes.push(build_scene(w, h, "r_brick_stomp_coin".into(), &[StompKill, CoinCollect, BrickBlock], |b| {
        b.coin(0, 1);
        b.ceiling(1, 12, 3, Brick);
        b.enemy(3, EnemyGoomba).enemy(5, EnemyGoomba);
        b.gap(8, 2);
    }));
    scenes.push(build_scene(w, h, "r_gap_wall_coin".into(), &[Jump, HighJump, CoinCollect], |b| {
        b.gap(4, 2);
        b.raise(8, 9, 3);
        b.coin(8, 4).coin(9, 4);
    }));
    scenes.push(build_scene(w, h, "r_q_high_coin".into(), &[HighJump, QuestionBlock, CoinCollect], |b| {
        b.ceiling(3, 9, 3, QuestionCoin);
        b.gap(5, 2);
        b.raise(12, 13, 3);
    }));

    // --- Corridor enders ("a_"): content, then a no-headroom exit ---------
    for v in 0..config.variants_per_family {
        let j = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| rng.random_range(lo..=hi);

        scenes.push(build_scene(w, h, format!("a_plain_{v}"), &[], move |b| {
            corridor_exit(b, w);
        }));
        let c = (4 + j(&mut rng, 0, 2)) as usize;
        scenes.push(build_scene(w, h, format!("a_coins_{v}"), &[CoinCollect], move |b| {
            b.coin(c, 1).coin(c + 1, 1);
            corridor_exit(b, w);
        }));
        let c = (4 + j(&mut rng, 0, 2)) as usize;
        scenes.push(build_scene(w, h, format!("a_gap_{v}"), &[Jump], move |b| {
            b.gap(c, 2);
            corridor_exit(b, w);
        }));
        scenes.push(build_scene(w, h, format!("a_trench_{v}"), &[StompKill], move |b| {
            b.ceiling(3, 8, 3, SolidBlock);
            b.enemy(5, EnemyGoomba).enemy(7, EnemyGoomba);
            corridor_exit(b, w);
        }));
        let c = (4 + j(&mut rng, 0, 2)) as usize;
        scenes.push(build_scene(w, h, format!("a_lowhop_{v}"), &[LowJump], move |b| {
            b.ceiling(3, 9, 3, SolidBlock);
            b.gap(c, 2);
            corridor_exit(b, w);
        }));
        let c = (3 + j(&mut rng, 0, 1)) as usize;
        scenes.push(build_scene(w, h, format!("a_wall_{v}"), &[HighJump], move |b| {
            b.raise(c, c + 1, 3);
            corridor_exit(b, w);
        }));
        scenes.push(build_scene(w, h, format!("a_koopa_{v}"), &[ShellKill], move |b| {
            b.ceiling(2, 9, 3, SolidBlock);
            b.enemy(4, EnemyKoopa).enemy(6, EnemyKoopa);
            b.enemy(9, EnemyGoomba);
            corridor_exit(b, w);
        }));
        let c = (4 + j(&mut rng, 0, 1)) as usize;
        scenes.push(build_scene(w, h, format!("a_long_{v}"), &[LongJump], move |b| {
            b.gap(c, 5);
            corridor_exit(b, w);
        }));
        scenes.push(build_scene(w, h, format!("a_spiky_{v}"), &[Jump], move |b| {
            b.gap(3, 2);
            b.enemy(7, EnemySpiky);
            corridor_exit(b, w);
        }));
        scenes.push(build_scene(w, h, format!("a_mode_{v}"), &[ModeChange], move |b| {
            b.ceiling(2, 9, 5, SolidBlock);
            b.tile(4, 3, QuestionPowerup).tile(5, 3, QuestionPowerup);
            b.gap(4, 2);
            b.raise(6, 9, 1);
            corridor_exit(b, w);
        }));
    }

    // --- Wall starters ("b_"): a full-jump wall, then content --------------
    for v in 0..config.variants_per_family {
        let j = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| rng.random_range(lo..=hi);

        scenes.push(build_scene(w, h, format!("b_plain_{v}"), &[HighJump], move |b| {
            entry_wall(b);
        }));
        let c = (6 + j(&mut rng, 0, 3)) as usize;
        scenes.push(build_scene(w, h, format!("b_coins_{v}"), &[HighJump, CoinCollect], move |b| {
            entry_wall(b);
            b.coin(c, 1).coin(c + 1, 1);
        }));
        let c = (7 + j(&mut rng, 0, 2)) as usize;
        scenes.push(build_scene(w, h, format!("b_gap_{v}"), &[Jump], move |b| {
            entry_wall(b);
            b.gap(c, 2);
        }));
        scenes.push(build_scene(w, h, format!("b_trench_{v}"), &[StompKill], move |b| {
            entry_wall(b);
            b.ceiling(6, 13, 3, SolidBlock);
            b.enemy(9, EnemyGoomba).enemy(11, EnemyGoomba);
        }));
        let c = (8 + j(&mut rng, 0, 2)) as usize;
        scenes.push(build_scene(w, h, format!("b_lowhop_{v}"), &[LowJump], move |b| {
            entry_wall(b);
            b.ceiling(6, 13, 3, SolidBlock);
            b.gap(c, 2);
        }));
        let c = (8 + j(&mut rng, 0, 2)) as usize;
        scenes.push(build_scene(w, h, format!("b_wall_{v}"), &[HighJump], move |b| {
            entry_wall(b);
            b.raise(c, c + 1, 3);
        }));
        scenes.push(build_scene(w, h, format!("b_spiky_{v}"), &[Jump], move |b| {
            entry_wall(b);
            b.gap(6, 2);
            b.enemy(11, EnemySpiky);
        }));
        let c = (7 + j(&mut rng, 0, 1)) as usize;
        scenes.push(build_scene(w, h, format!("b_long_{v}"), &[LongJump], move |b| {
            entry_wall(b);
            b.gap(c, 5);
        }));
        scenes.push(build_scene(w, h, format!("b_mode_{v}"), &[ModeChange], move |b| {
            entry_wall(b);
            b.tile(7, 3, QuestionPowerup).tile(8, 3, QuestionPowerup);
            b.gap(7, 2);
            b.raise(9, 12, 1);
        }));
        scenes.push(build_scene(w, h, format!("b_fall_{v}"), &[FallKill], move |b| {
            entry_wall(b);
            b.platform(9, 11, 5);
            b.tile(9, 6, EnemyGoomba);
            b.gap(7, 2);
        }));
    }

    Corpus::from_scenes(scenes).expect("synthetic corpus is valid")
}

/// Looks a scene up by its family name.
pub fn scene_id_by_name(corpus: &Corpus, name: &str) -> Option<SceneId> {
    corpus.scenes().iter().find(|s| s.name == name).map(|s| s.id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_all_twelve_mechanics_as_singleton_labels() {
        let corpus = build_synthetic_corpus(&SyntheticConfig::default());
        for kind in MechanicKind::ALL {
            let found = corpus
                .scenes()
                .iter()
                .any(|s| s.mechanics.len() == 1 && s.mechanics.contains(kind));
            assert!(found, "no singleton-labeled scene for {kind}");
        }
    }

    #[test]
    fn has_flat_scene_and_enough_scenes() {
        let corpus = build_synthetic_corpus(&SyntheticConfig::default());
        assert!(corpus.by_mechanic_count().contains_key(&0));
        assert!(corpus.len() >= 60, "corpus has {} scenes", corpus.len());
    }

    #[test]
    fn same_seed_builds_identical_corpus() {
        let config = SyntheticConfig::default();
        let a = build_synthetic_corpus(&config);
        let b = build_synthetic_corpus(&config);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.scenes().iter().zip(b.scenes()) {
            assert_eq!(x.grid, y.grid);
            assert_eq!(x.name, y.name);
        }
    }

    #[test]
    fn different_seeds_differ_somewhere() {
        let a = build_synthetic_corpus(&SyntheticConfig::default());
        let b = build_synthetic_corpus(&SyntheticConfig { seed: 1, ..SyntheticConfig::default() });
        assert_eq!(a.len(), b.len());
        let delta = a
            .scenes()
            .iter()
            .zip(b.scenes())
            .filter(|(x, y)| x.grid != y.grid)
            .count();
        assert!(delta > 0);
    }

    #[test]
    fn mechanic_scenes_label_what_they_build() {
        let corpus = build_synthetic_corpus(&SyntheticConfig::default());
        let stomp = scene_id_by_name(&corpus, "m_stomp_0").unwrap();
        let scene = corpus.scene(stomp).unwrap();
        assert!(scene.mechanics.contains(MechanicKind::StompKill));
        let cells = scene.grid.cells();
        assert!(cells.iter().any(|&k| k == TileKind::EnemyGoomba));
    }
}

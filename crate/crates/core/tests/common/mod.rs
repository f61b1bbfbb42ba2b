//! Shared test support: reference oracles and random generators kept
//! independent of the library's implementation paths.

use rand::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scenestitch::level::{MechanicKind, TileGrid, TileKind};
use scenestitch::sim::Action;

/// Reference interpreter of the greedy alignment: walk the target, scan
/// the generated list from a cursor for the first occurrence, count the
/// skipped entries as extras and absences as misses. Written as an
/// explicit index loop so it shares no code with `count_faults`.
pub fn greedy_alignment_oracle(
    generated: &[MechanicKind],
    target: &[MechanicKind],
) -> (usize, usize) {
    let mut cursor = 0usize;
    let mut missed = 0usize;
    let mut extras = 0usize;
    let mut p_target = 0usize;
    while p_target < target.len() {
        let wanted = target[p_target];
        let mut i = cursor;
        let mut found = usize::MAX;
        while i < generated.len() {
            if generated[i] == wanted {
                found = i;
                break;
            }
            i += 1;
        }
        if found == usize::MAX {
            missed += 1;
        } else {
            extras += found - cursor;
            cursor = found + 1;
        }
        p_target += 1;
    }
    (missed, extras)
}

/// A random but structurally sane level: solid floor, scattered platforms
/// and blocks above it, a sprinkling of coins and enemies, the avatar
/// spawn on the left and the flag on the right.
pub fn random_grid(rng: &mut ChaCha8Rng) -> TileGrid {
    let width = rng.random_range(20..48);
    let height = rng.random_range(8..15);
    let mut grid = TileGrid::new(width, height);
    for x in 0..width {
        grid.set(x, height - 1, TileKind::Ground);
    }
    let scatter = [
        TileKind::Ground,
        TileKind::Brick,
        TileKind::QuestionCoin,
        TileKind::QuestionPowerup,
        TileKind::SolidBlock,
        TileKind::Platform,
        TileKind::Coin,
        TileKind::PipeTop,
    ];
    for y in 1..height - 2 {
        for x in 3..width - 3 {
            if rng.random_bool(0.08) {
                grid.set(x, y, scatter[rng.random_range(0..scatter.len())]);
            }
        }
    }
    // A few walkers on the floor, away from the spawn.
    for _ in 0..rng.random_range(0..4) {
        let x = rng.random_range(6..width - 3);
        let kind = match rng.random_range(0..3) {
            0 => TileKind::EnemyGoomba,
            1 => TileKind::EnemyKoopa,
            _ => TileKind::EnemySpiky,
        };
        if grid.get(x, height - 2) == TileKind::Empty {
            grid.set(x, height - 2, kind);
        }
    }
    // Clear space around the spawn and the flag column.
    for y in 1..height - 1 {
        for x in 0..3 {
            grid.set(x, y, TileKind::Empty);
        }
        grid.set(width - 2, y, TileKind::Empty);
    }
    grid.set(1, height - 2, TileKind::MarioStart);
    grid.set(width - 2, height - 2, TileKind::Flag);
    grid
}

/// A random input per tick, jump-heavy enough to exercise the air paths.
pub fn random_action(rng: &mut ChaCha8Rng) -> Action {
    const CHOICES: [Action; 7] = [
        Action::RIGHT,
        Action::RIGHT_RUN,
        Action::RIGHT_JUMP,
        Action::RIGHT_RUN_JUMP,
        Action::JUMP,
        Action::LEFT,
        Action::NONE,
    ];
    CHOICES[rng.random_range(0..CHOICES.len())]
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

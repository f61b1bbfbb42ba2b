//! Deterministic discrete-time tile physics with mechanic event detection.
//!
//! The simulation advances one tick per [`SimState::step`] call. Movement is
//! axis-separated AABB collision against the tile grid; all speeds stay
//! below one tile per tick so a single-cell sweep is sufficient. Every
//! quantity is an `f64` updated by plain arithmetic, so identical inputs
//! give bit-identical runs.
//!
//! Events follow the avatar: landing closes an airborne phase and emits a
//! `Jump` plus its high/low and short/long classification, head bumps fire
//! block events, and enemy interactions fire the kill events. Simultaneous
//! events within a tick are ordered by mechanic code.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{MechanicKind, TileGrid, TileKind};

const EPS: f64 = 1e-7;
/// Vertical tolerance for reading "fell on top of" out of an overlap.
const STOMP_TOLERANCE: f64 = 0.3;

pub const AVATAR_WIDTH: f64 = 0.8;
pub const AVATAR_HEIGHT: f64 = 0.9;
const ENTITY_SIZE: f64 = 0.8;

/// Avatar power-up state. Damage walks it down one step per hit; a hit at
/// Small loses the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Small,
    Big,
    Fire,
}

/// Physics constants and mechanic-classification thresholds.
///
/// These defaults are frozen; every quantitative test pins them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Downward acceleration in tiles/tick^2.
    pub gravity: f64,
    /// Initial upward speed of a jump in tiles/tick.
    pub jump_impulse: f64,
    /// Walking speed cap in tiles/tick; holding run doubles it.
    pub max_run_speed: f64,
    /// Tick budget per tile of level width.
    pub max_ticks_per_tile: u32,
    /// A jump rising more than this many tiles is a high jump.
    pub high_jump_y_threshold: f64,
    /// A jump covering more than this many tiles horizontally is long.
    pub long_jump_x_threshold: f64,
    /// Ground acceleration (and braking) in tiles/tick^2.
    pub ground_accel: f64,
    /// Fraction of ground acceleration available while airborne.
    pub air_control: f64,
    /// Ticks of reduced gravity while the jump button stays held.
    pub sustain_ticks: u32,
    /// Gravity multiplier during the sustain window.
    pub sustain_gravity_factor: f64,
    /// Rising speed is cut to this when the jump button is released early.
    pub jump_release_cap: f64,
    /// Falling speed cap in tiles/tick; must stay below 1.0.
    pub terminal_velocity: f64,
    /// Upward speed granted by bouncing off a stomped enemy.
    pub stomp_bounce: f64,
    /// Invulnerability window after taking a hit, in ticks.
    pub hurt_cooldown_ticks: u32,
    /// Walking speed of goombas, koopas, and spikies.
    pub enemy_speed: f64,
    /// Sliding speed of a kicked shell.
    pub shell_speed: f64,
    /// Walking speed of a spawned mushroom.
    pub mushroom_speed: f64,
    /// Enemies start walking once the avatar is within this many tiles.
    pub activation_distance: f64,
    /// Mode the avatar spawns in.
    pub start_mode: Mode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            gravity: 0.12,
            jump_impulse: 0.9,
            max_run_speed: 0.3,
            max_ticks_per_tile: 30,
            high_jump_y_threshold: 2.0,
            long_jump_x_threshold: 4.0,
            ground_accel: 0.02,
            air_control: 0.2,
            sustain_ticks: 8,
            sustain_gravity_factor: 0.65,
            jump_release_cap: 0.24,
            terminal_velocity: 0.85,
            stomp_bounce: 0.5,
            hurt_cooldown_ticks: 20,
            enemy_speed: 0.04,
            shell_speed: 0.45,
            mushroom_speed: 0.08,
            activation_distance: 20.0,
            start_mode: Mode::Small,
        }
    }
}

impl SimConfig {
    /// Top horizontal speed (running), used by tick-optimistic heuristics.
    pub fn top_speed(&self) -> f64 {
        self.max_run_speed * 2.0
    }

    pub fn tick_budget(&self, level_width: usize) -> u32 {
        self.max_ticks_per_tile * level_width as u32
    }
}

/// One tick of player input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Action {
    pub left: bool,
    pub right: bool,
    pub jump: bool,
    pub run: bool,
}

impl Action {
    pub const NONE: Action = Action { left: false, right: false, jump: false, run: false };
    pub const LEFT: Action = Action { left: true, right: false, jump: false, run: false };
    pub const RIGHT: Action = Action { left: false, right: true, jump: false, run: false };
    pub const RIGHT_RUN: Action = Action { left: false, right: true, jump: false, run: true };
    pub const RIGHT_JUMP: Action = Action { left: false, right: true, jump: true, run: false };
    pub const RIGHT_RUN_JUMP: Action = Action { left: false, right: true, jump: true, run: true };
    pub const JUMP: Action = Action { left: false, right: false, jump: true, run: false };
}

/// A mechanic firing, stamped with the tick and an x position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicEvent {
    pub kind: MechanicKind,
    pub tick: u32,
    pub x: f64,
}

/// Everything recorded from one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Playtrace {
    pub events: Vec<MechanicEvent>,
    pub won: bool,
    /// Furthest avatar center x reached, in tiles.
    pub distance: f64,
    pub ticks_used: u32,
}

impl Playtrace {
    /// Debug/golden format: one `tick,kind,x` line per event.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&format!("{},{},{:.3}\n", e.tick, e.kind.name(), e.x));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Running,
    Won,
    Lost,
}

/// Avatar kinematics plus the bookkeeping for jump classification.
#[derive(Debug, Clone, PartialEq)]
pub struct AvatarState {
    /// Top-left corner of the bounding box, in tiles.
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub mode: Mode,
    pub on_ground: bool,
    /// Where the current airborne phase began; absent when grounded.
    pub jump_origin: Option<(f64, f64)>,
    /// Highest point (smallest y) reached in the current airborne phase.
    apex_y: f64,
    jump_held: bool,
    sustain_left: u32,
    hurt_cooldown: u32,
}

impl AvatarState {
    pub fn center_x(&self) -> f64 {
        self.x + AVATAR_WIDTH / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.y + AVATAR_HEIGHT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Goomba,
    Koopa,
    Spiky,
    Shell,
    Mushroom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub alive: bool,
    pub active: bool,
}

impl Entity {
    fn center_x(&self) -> f64 {
        self.x + ENTITY_SIZE / 2.0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("level has no MarioStart tile")]
    MissingStart,
    #[error("level has no Flag tile")]
    MissingFlag,
}

/// Full mutable simulation state for one episode.
#[derive(Debug, Clone)]
pub struct SimState {
    /// Level tiles; consumed blocks are rewritten, so this is a
    /// copy-on-write handle.
    pub grid: Arc<TileGrid>,
    pub avatar: AvatarState,
    pub entities: Vec<Entity>,
    pub tick: u32,
    pub coins_collected: u32,
    pub outcome: Outcome,
    /// Furthest avatar center x reached so far.
    pub distance: f64,
    flag_col: f64,
}

impl SimState {
    pub fn new(grid: &TileGrid, config: &SimConfig) -> Result<SimState, SimError> {
        let (start_x, start_y) = grid.start_tile().ok_or(SimError::MissingStart)?;
        let flag_col = grid.flag_column().ok_or(SimError::MissingFlag)? as f64;
        let mut entities = Vec::new();
        let mut sim_grid = grid.clone();
        for (x, y, kind) in grid.iter_cells() {
            let entity_kind = match kind {
                TileKind::EnemyGoomba => Some(EntityKind::Goomba),
                TileKind::EnemyKoopa => Some(EntityKind::Koopa),
                TileKind::EnemySpiky => Some(EntityKind::Spiky),
                _ => None,
            };
            if let Some(entity_kind) = entity_kind {
                entities.push(Entity {
                    kind: entity_kind,
                    x: x as f64 + (1.0 - ENTITY_SIZE) / 2.0,
                    y: (y + 1) as f64 - ENTITY_SIZE,
                    vx: -1.0, // direction; scaled by enemy_speed each tick
                    vy: 0.0,
                    alive: true,
                    active: false,
                });
                sim_grid.set(x, y, TileKind::Empty);
            }
        }
        let avatar = AvatarState {
            x: start_x as f64 + (1.0 - AVATAR_WIDTH) / 2.0,
            y: (start_y + 1) as f64 - AVATAR_HEIGHT,
            vx: 0.0,
            vy: 0.0,
            mode: config.start_mode,
            on_ground: true,
            jump_origin: None,
            apex_y: 0.0,
            jump_held: false,
            sustain_left: 0,
            hurt_cooldown: 0,
        };
        let distance = avatar.center_x();
        Ok(SimState {
            grid: Arc::new(sim_grid),
            avatar,
            entities,
            tick: 0,
            coins_collected: 0,
            outcome: Outcome::Running,
            distance,
            flag_col,
        })
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome != Outcome::Running
    }

    pub fn flag_column(&self) -> f64 {
        self.flag_col
    }

    /// Clone for short-horizon planning. Entities beyond `window` tiles of
    /// the avatar cannot reach it within a slice and are dropped, which
    /// keeps search-node clones cheap on long levels.
    pub fn clone_for_planning(&self, window: f64) -> SimState {
        let cx = self.avatar.center_x();
        let mut clone = self.clone();
        clone
            .entities
            .retain(|e| e.alive && (e.center_x() - cx).abs() <= window);
        clone
    }

    /// Advances the simulation one tick and returns the mechanics fired,
    /// ordered by mechanic code. A no-op on terminal states.
    pub fn step(&mut self, action: Action, config: &SimConfig) -> Vec<MechanicEvent> {
        if self.is_terminal() {
            return Vec::new();
        }
        let mut events: Vec<MechanicEvent> = Vec::new();
        let tick = self.tick;
        let grid_height = self.grid.height() as f64;

        // Horizontal intent.
        let dir = (action.right as i32 - action.left as i32) as f64;
        let cap = config.max_run_speed * if action.run { 2.0 } else { 1.0 };
        let accel = if self.avatar.on_ground {
            config.ground_accel
        } else {
            config.ground_accel * config.air_control
        };
        let target_vx = dir * cap;
        let dv = target_vx - self.avatar.vx;
        if dir != 0.0 || self.avatar.on_ground {
            self.avatar.vx += dv.clamp(-accel, accel);
        }

        // Jump press, release cut, gravity.
        let jump_pressed = action.jump && !self.avatar.jump_held;
        if self.avatar.on_ground && jump_pressed {
            self.avatar.vy = -config.jump_impulse;
            self.avatar.on_ground = false;
            self.avatar.jump_origin = Some((self.avatar.x, self.avatar.y));
            self.avatar.apex_y = self.avatar.y;
            self.avatar.sustain_left = config.sustain_ticks;
        } else if !self.avatar.on_ground
            && !action.jump
            && self.avatar.vy < -config.jump_release_cap
        {
            self.avatar.vy = -config.jump_release_cap;
        }
        if !self.avatar.on_ground {
            let g = if action.jump && self.avatar.sustain_left > 0 && self.avatar.vy < 0.0 {
                self.avatar.sustain_left -= 1;
                config.gravity * config.sustain_gravity_factor
            } else {
                config.gravity
            };
            self.avatar.vy = (self.avatar.vy + g).min(config.terminal_velocity);
        }

        let prev_bottom = self.avatar.bottom();

        // Horizontal move, clamped to the level and against solids.
        let max_x = self.grid.width() as f64 - AVATAR_WIDTH;
        let (nx, hit_x) = resolve_x(
            &self.grid,
            self.avatar.x,
            self.avatar.y,
            AVATAR_WIDTH,
            AVATAR_HEIGHT,
            self.avatar.vx,
        );
        self.avatar.x = nx.clamp(0.0, max_x);
        if hit_x || nx != self.avatar.x {
            self.avatar.vx = 0.0;
        }

        // Vertical move: land, or bump blocks overhead.
        let mut bounced = false;
        if self.avatar.vy > 0.0 {
            let (ny, landed) = resolve_down(
                &self.grid,
                self.avatar.x,
                self.avatar.y,
                AVATAR_WIDTH,
                AVATAR_HEIGHT,
                self.avatar.vy,
            );
            self.avatar.y = ny;
            if landed {
                self.avatar.vy = 0.0;
                self.avatar.on_ground = true;
                if let Some(origin) = self.avatar.jump_origin.take() {
                    let apex_rise = origin.1 - self.avatar.apex_y;
                    let landing = (self.avatar.x, self.avatar.y);
                    for kind in classify_jump(origin, landing, apex_rise, config) {
                        events.push(MechanicEvent { kind, tick, x: self.avatar.x });
                    }
                }
            }
        } else if self.avatar.vy < 0.0 {
            let (ny, bump_row) = resolve_up(
                &self.grid,
                self.avatar.x,
                self.avatar.y,
                AVATAR_WIDTH,
                self.avatar.vy,
            );
            self.avatar.y = ny;
            if let Some(row) = bump_row {
                self.avatar.vy = 0.0;
                self.bump_blocks(row, tick, &mut events);
            }
        }
        if !self.avatar.on_ground {
            self.avatar.apex_y = self.avatar.apex_y.min(self.avatar.y);
        }

        // Walking off an edge starts an airborne phase.
        if self.avatar.on_ground
            && !supported(
                &self.grid,
                self.avatar.x,
                self.avatar.y,
                AVATAR_WIDTH,
                AVATAR_HEIGHT,
            )
        {
            self.avatar.on_ground = false;
            self.avatar.jump_origin = Some((self.avatar.x, self.avatar.y));
            self.avatar.apex_y = self.avatar.y;
            self.avatar.sustain_left = 0;
        }

        self.collect_coins(tick, &mut events);

        if self.avatar.hurt_cooldown > 0 {
            self.avatar.hurt_cooldown -= 1;
        }

        self.step_entities(config, tick, &mut events);
        self.interact_entities(config, prev_bottom, &mut bounced, tick, &mut events);

        // Terminal checks.
        if self.avatar.y > grid_height {
            self.outcome = Outcome::Lost;
        }
        if self.outcome == Outcome::Running && self.avatar.center_x() >= self.flag_col {
            self.outcome = Outcome::Won;
            self.distance = self.flag_col;
        }
        if self.outcome != Outcome::Won {
            self.distance = self.distance.max(self.avatar.center_x().min(self.flag_col));
        }

        self.avatar.jump_held = action.jump;
        self.tick += 1;
        events.sort_by_key(|e| e.kind.code());
        events
    }

    fn bump_blocks(&mut self, row: usize, tick: u32, events: &mut Vec<MechanicEvent>) {
        // Pick the single overhead tile nearest the avatar center.
        let span = column_span(self.avatar.x, AVATAR_WIDTH);
        let center = self.avatar.center_x();
        let mut best: Option<(f64, usize, TileKind)> = None;
        for c in span.clone() {
            let kind = self.grid.get_or_empty(c as isize, row as isize);
            if !kind.is_solid() {
                continue;
            }
            let d = (c as f64 + 0.5 - center).abs();
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, c, kind));
            }
        }
        let Some((_, col, kind)) = best else { return };
        let x = self.avatar.x;
        match kind {
            TileKind::Brick => {
                events.push(MechanicEvent { kind: MechanicKind::BrickBlock, tick, x });
            }
            TileKind::QuestionCoin => {
                events.push(MechanicEvent { kind: MechanicKind::QuestionBlock, tick, x });
                events.push(MechanicEvent { kind: MechanicKind::CoinCollect, tick, x });
                self.coins_collected += 1;
                Arc::make_mut(&mut self.grid).set(col, row, TileKind::SolidBlock);
            }
            TileKind::QuestionPowerup => {
                events.push(MechanicEvent { kind: MechanicKind::QuestionBlock, tick, x });
                // The mushroom drops out of the block's underside, into the
                // space the bumping avatar occupies.
                let mx = col as f64 + (1.0 - ENTITY_SIZE) / 2.0;
                let away = if self.avatar.center_x() >= col as f64 + 0.5 { -1.0 } else { 1.0 };
                self.entities.push(Entity {
                    kind: EntityKind::Mushroom,
                    x: mx,
                    y: (row + 1) as f64 + 0.05,
                    vx: away,
                    vy: 0.0,
                    alive: true,
                    active: true,
                });
                Arc::make_mut(&mut self.grid).set(col, row, TileKind::SolidBlock);
            }
            _ => {}
        }
    }

    fn collect_coins(&mut self, tick: u32, events: &mut Vec<MechanicEvent>) {
        let cols = column_span(self.avatar.x, AVATAR_WIDTH);
        let rows = row_span(self.avatar.y, AVATAR_HEIGHT);
        for r in rows {
            for c in cols.clone() {
                if self.grid.get_or_empty(c as isize, r as isize) == TileKind::Coin {
                    Arc::make_mut(&mut self.grid).set(c, r, TileKind::Empty);
                    self.coins_collected += 1;
                    events.push(MechanicEvent {
                        kind: MechanicKind::CoinCollect,
                        tick,
                        x: self.avatar.x,
                    });
                }
            }
        }
    }

    fn step_entities(&mut self, config: &SimConfig, tick: u32, events: &mut Vec<MechanicEvent>) {
        let grid_height = self.grid.height() as f64;
        let avatar_cx = self.avatar.center_x();
        for i in 0..self.entities.len() {
            let e = &mut self.entities[i];
            if !e.alive {
                continue;
            }
            let speed = match e.kind {
                EntityKind::Goomba | EntityKind::Koopa | EntityKind::Spiky => {
                    if !e.active && (e.center_x() - avatar_cx).abs() <= config.activation_distance {
                        e.active = true;
                    }
                    config.enemy_speed
                }
                EntityKind::Shell => config.shell_speed,
                EntityKind::Mushroom => config.mushroom_speed,
            };
            if !e.active {
                continue;
            }
            e.vy = (e.vy + config.gravity).min(config.terminal_velocity);
            // vx holds direction (-1, 0, or 1); speed comes from the kind.
            let dx = e.vx * speed;
            let (nx, hit_x) = resolve_x(&self.grid, e.x, e.y, ENTITY_SIZE, ENTITY_SIZE, dx);
            e.x = nx;
            if hit_x {
                match e.kind {
                    // Shells shatter on walls; walkers turn around.
                    EntityKind::Shell => {
                        e.alive = false;
                        continue;
                    }
                    _ => e.vx = -e.vx,
                }
            }
            let (ny, landed) =
                resolve_down(&self.grid, e.x, e.y, ENTITY_SIZE, ENTITY_SIZE, e.vy.max(0.0));
            e.y = ny;
            if landed {
                e.vy = 0.0;
            }
            if e.y > grid_height {
                e.alive = false;
                if matches!(e.kind, EntityKind::Goomba | EntityKind::Koopa | EntityKind::Spiky) {
                    events.push(MechanicEvent { kind: MechanicKind::FallKill, tick, x: e.x });
                }
                continue;
            }
            // A moving shell mows down enemies it touches.
            if e.kind == EntityKind::Shell && e.vx != 0.0 {
                let (sx, sy) = (e.x, e.y);
                for j in 0..self.entities.len() {
                    if j == i {
                        continue;
                    }
                    let victim = &self.entities[j];
                    if victim.alive
                        && matches!(
                            victim.kind,
                            EntityKind::Goomba | EntityKind::Koopa | EntityKind::Spiky
                        )
                        && boxes_overlap(sx, sy, victim.x, victim.y)
                    {
                        let vx_pos = victim.x;
                        self.entities[j].alive = false;
                        events.push(MechanicEvent {
                            kind: MechanicKind::ShellKill,
                            tick,
                            x: vx_pos,
                        });
                    }
                }
            }
        }
    }

    fn interact_entities(
        &mut self,
        config: &SimConfig,
        prev_bottom: f64,
        bounced: &mut bool,
        tick: u32,
        events: &mut Vec<MechanicEvent>,
    ) {
        let mut spawned: Vec<Entity> = Vec::new();
        for i in 0..self.entities.len() {
            if self.outcome != Outcome::Running {
                break;
            }
            let e = &self.entities[i];
            if !e.alive || !avatar_overlaps(&self.avatar, e) {
                continue;
            }
            match e.kind {
                EntityKind::Mushroom => {
                    self.entities[i].alive = false;
                    let upgraded = match self.avatar.mode {
                        Mode::Small => Some(Mode::Big),
                        Mode::Big => Some(Mode::Fire),
                        Mode::Fire => None,
                    };
                    if let Some(mode) = upgraded {
                        self.avatar.mode = mode;
                        events.push(MechanicEvent {
                            kind: MechanicKind::ModeChange,
                            tick,
                            x: self.avatar.x,
                        });
                    }
                }
                EntityKind::Shell => {
                    if self.entities[i].vx == 0.0 {
                        let toward =
                            if self.entities[i].center_x() >= self.avatar.center_x() { 1.0 } else { -1.0 };
                        self.entities[i].vx = toward;
                    }
                }
                EntityKind::Goomba | EntityKind::Koopa | EntityKind::Spiky => {
                    let stompable = e.kind != EntityKind::Spiky;
                    let falling_on = (self.avatar.vy > 0.0 || *bounced)
                        && prev_bottom <= e.y + STOMP_TOLERANCE;
                    if stompable && falling_on {
                        let kind = e.kind;
                        let (ex, ey) = (e.x, e.y);
                        self.entities[i].alive = false;
                        events.push(MechanicEvent {
                            kind: MechanicKind::StompKill,
                            tick,
                            x: self.avatar.x,
                        });
                        if kind == EntityKind::Koopa {
                            // The stomp doubles as the kick: the shell
                            // shoots out away from the avatar.
                            let away = if self.avatar.center_x() <= ex + ENTITY_SIZE / 2.0 {
                                1.0
                            } else {
                                -1.0
                            };
                            spawned.push(Entity {
                                kind: EntityKind::Shell,
                                x: ex,
                                y: ey,
                                vx: away,
                                vy: 0.0,
                                alive: true,
                                active: true,
                            });
                        }
                        self.avatar.vy = -config.stomp_bounce;
                        self.avatar.on_ground = false;
                        *bounced = true;
                    } else if self.avatar.hurt_cooldown == 0 {
                        match self.avatar.mode {
                            Mode::Fire => {
                                self.avatar.mode = Mode::Big;
                                events.push(MechanicEvent {
                                    kind: MechanicKind::ModeChange,
                                    tick,
                                    x: self.avatar.x,
                                });
                            }
                            Mode::Big => {
                                self.avatar.mode = Mode::Small;
                                events.push(MechanicEvent {
                                    kind: MechanicKind::ModeChange,
                                    tick,
                                    x: self.avatar.x,
                                });
                            }
                            Mode::Small => {
                                self.outcome = Outcome::Lost;
                            }
                        }
                        self.avatar.hurt_cooldown = config.hurt_cooldown_ticks;
                    }
                }
            }
        }
        self.entities.extend(spawned);
    }
}

/// Splits an airborne phase into its jump classification. Always contains
/// `Jump`; exactly one of low/high and exactly one of short/long, with
/// strict-inequality thresholds.
pub fn classify_jump(
    origin: (f64, f64),
    landing: (f64, f64),
    apex_rise: f64,
    config: &SimConfig,
) -> Vec<MechanicKind> {
    let mut kinds = vec![MechanicKind::Jump];
    if apex_rise > config.high_jump_y_threshold {
        kinds.push(MechanicKind::HighJump);
    } else {
        kinds.push(MechanicKind::LowJump);
    }
    if (landing.0 - origin.0).abs() > config.long_jump_x_threshold {
        kinds.push(MechanicKind::LongJump);
    } else {
        kinds.push(MechanicKind::ShortJump);
    }
    kinds
}

/// Runs a policy until the episode terminates or the tick budget runs out.
pub fn run_episode<F>(
    grid: &TileGrid,
    mut policy: F,
    config: &SimConfig,
) -> Result<Playtrace, SimError>
where
    F: FnMut(&SimState) -> Action,
{
    let mut state = SimState::new(grid, config)?;
    let budget = config.tick_budget(grid.width());
    let mut events = Vec::new();
    while !state.is_terminal() && state.tick < budget {
        let action = policy(&state);
        events.extend(state.step(action, config));
    }
    Ok(Playtrace {
        events,
        won: state.outcome == Outcome::Won,
        distance: state.distance,
        ticks_used: state.tick,
    })
}

fn column_span(x: f64, w: f64) -> std::ops::RangeInclusive<usize> {
    let lo = x.max(0.0).floor() as usize;
    let hi = (x + w - EPS).max(0.0).floor() as usize;
    lo..=hi
}

fn row_span(y: f64, h: f64) -> std::ops::RangeInclusive<usize> {
    let lo = y.max(0.0).floor() as usize;
    let hi = (y + h - EPS).max(0.0).floor() as usize;
    lo..=hi
}

fn solid_in_rect(grid: &TileGrid, x: f64, y: f64, w: f64, h: f64) -> bool {
    if y + h <= 0.0 {
        return false;
    }
    for r in row_span(y, h) {
        for c in column_span(x, w) {
            if grid.get_or_empty(c as isize, r as isize).is_solid() {
                return true;
            }
        }
    }
    false
}

/// Horizontal sweep: returns the new x and whether a solid stopped it.
fn resolve_x(grid: &TileGrid, x: f64, y: f64, w: f64, h: f64, dx: f64) -> (f64, bool) {
    let nx = x + dx;
    if dx == 0.0 || !solid_in_rect(grid, nx, y, w, h) {
        return (nx, false);
    }
    if dx > 0.0 {
        let c = (nx + w - EPS).floor();
        ((c - w).max(x.min(nx)), true)
    } else {
        let c = nx.floor();
        ((c + 1.0).min(x.max(nx)), true)
    }
}

/// Downward sweep: lands on solids and on one-way platform tops.
fn resolve_down(grid: &TileGrid, x: f64, y: f64, w: f64, h: f64, dy: f64) -> (f64, bool) {
    if dy <= 0.0 {
        return (y, false);
    }
    let ny = y + dy;
    let bottom = y + h;
    let new_bottom = ny + h;
    let r = (new_bottom - EPS).floor();
    if r < 0.0 {
        return (ny, false);
    }
    let row = r as usize;
    let entered = bottom <= r + EPS;
    for c in column_span(x, w) {
        let kind = grid.get_or_empty(c as isize, row as isize);
        let lands = kind.is_solid() || (kind == TileKind::Platform && entered);
        if lands && new_bottom > r {
            return (r - h, true);
        }
    }
    (ny, false)
}

/// Upward sweep: returns the new y and the row of the blocked tiles, if any.
fn resolve_up(grid: &TileGrid, x: f64, y: f64, w: f64, dy: f64) -> (f64, Option<usize>) {
    if dy >= 0.0 {
        return (y, None);
    }
    let ny = y + dy;
    if ny < 0.0 {
        // Off the top of the level: no ceiling out there.
        return (ny, None);
    }
    let row = ny.floor() as usize;
    for c in column_span(x, w) {
        if grid.get_or_empty(c as isize, row as isize).is_solid() {
            return ((row + 1) as f64, Some(row));
        }
    }
    (ny, None)
}

/// True when something solid (or a platform top) sits directly under the
/// feet of the given box.
fn supported(grid: &TileGrid, x: f64, y: f64, w: f64, h: f64) -> bool {
    let feet = y + h;
    let row = (feet + 0.1).floor();
    if row < 0.0 {
        return false;
    }
    let r = row as usize;
    for c in column_span(x, w) {
        let kind = grid.get_or_empty(c as isize, r as isize);
        if kind.is_solid() || (kind == TileKind::Platform && feet <= row + 0.1) {
            return true;
        }
    }
    false
}

fn boxes_overlap(ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    ax < bx + ENTITY_SIZE && bx < ax + ENTITY_SIZE && ay < by + ENTITY_SIZE && by < ay + ENTITY_SIZE
}

fn avatar_overlaps(a: &AvatarState, e: &Entity) -> bool {
    a.x < e.x + ENTITY_SIZE
        && e.x < a.x + AVATAR_WIDTH
        && a.y < e.y + ENTITY_SIZE
        && e.y < a.y + AVATAR_HEIGHT
}

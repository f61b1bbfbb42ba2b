//! Best-first playing agent over forward-simulated states.
//!
//! Planning expands nodes from the current state, ordered by `g + h`
//! where `g` is ticks elapsed and `h` is an optimistic ticks-to-flag
//! estimate at top running speed. Equal keys are broken by a seeded random
//! draw, which is the only source of run-to-run variation: the simulator
//! itself is deterministic. Each search yields the best plan to the
//! horizon; the agent commits its leading actions and replans.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::level::TileGrid;
use crate::sim::{Action, Outcome, Playtrace, SimConfig, SimError, SimState};

/// The macro-action set searched by the planner. Each edge holds the
/// action for `action_ticks` simulator ticks.
const ACTIONS: [Action; 7] = [
    Action::RIGHT_RUN,
    Action::RIGHT,
    Action::RIGHT_RUN_JUMP,
    Action::RIGHT_JUMP,
    Action::JUMP,
    Action::LEFT,
    Action::NONE,
];

/// Entities farther than this from the avatar are ignored inside planning
/// rollouts; they cannot interact within one horizon.
const PLANNING_ENTITY_WINDOW: f64 = 48.0;


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Ticks simulated per planning slice (search depth).
    pub replan_horizon: u32,
    /// Maximum node expansions per slice.
    pub node_budget: u32,
    /// Ticks each macro-action is held; also the commit granularity.
    pub action_ticks: u32,
    /// Actions followed from a plan before searching again.
    pub replan_every: u32,
    /// Committed actions without forward progress before giving up.
    pub stall_slices: u32,
    /// Seed for tie-breaking in the open list.
    pub noise_seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            replan_horizon: 24,
            node_budget: 1000,
            action_ticks: 2,
            replan_every: 3,
            stall_slices: 40,
            noise_seed: 0,
        }
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    f: f64,
    depth: u32,
    tie: u64,
    idx: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap and we want the smallest f.
        // Equal f prefers deeper nodes so plateaus drill to the horizon;
        // the seeded draw breaks exact ties.
        other
            .f
            .partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.depth.cmp(&other.depth))
            .then_with(|| other.tie.cmp(&self.tie))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Node {
    state: SimState,
    parent: usize,
    action: Action,
    depth: u32,
    /// Ticks plus a tiny per-jump-edge surcharge, so needless hops lose
    /// ties against straight runs and plateaus stay narrow.
    cost: f64,
}

const JUMP_EDGE_COST: f64 = 0.01;

/// Optimistic ticks-to-goal: straight-line distance at top speed.
fn heuristic(state: &SimState, config: &SimConfig) -> f64 {
    (state.flag_column() - state.avatar.center_x()).max(0.0) / config.top_speed()
}

/// Discretized state signature for duplicate pruning within one slice.
fn dedup_key(state: &SimState, depth: u32) -> (u32, i64, i64, i64, i64, bool) {
    (
        depth,
        (state.avatar.x * 4.0).round() as i64,
        (state.avatar.y * 4.0).round() as i64,
        (state.avatar.vx * 25.0).round() as i64,
        (state.avatar.vy * 25.0).round() as i64,
        state.avatar.on_ground,
    )
}

fn reconstruct(arena: &[Node], mut idx: usize) -> VecDeque<Action> {
    let mut actions = VecDeque::new();
    while idx != usize::MAX {
        actions.push_front(arena[idx].action);
        idx = arena[idx].parent;
    }
    actions
}

/// Best-first search from `state` to the horizon. Returns the action
/// sequence of the best plan found.
fn plan_slice(
    state: &SimState,
    sim_config: &SimConfig,
    agent_config: &AgentConfig,
    tick_budget: u32,
    rng: &mut ChaCha8Rng,
) -> VecDeque<Action> {
    let root = state.clone_for_planning(PLANNING_ENTITY_WINDOW);
    let mut arena: Vec<Node> = Vec::with_capacity(256);
    let mut open: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(256);
    let mut seen: HashMap<(u32, i64, i64, i64, i64, bool), ()> = HashMap::with_capacity(256);
    let mut best_fallback: Option<(f64, usize)> = None;
    let mut expansions = 0u32;

    let expand = |from: &SimState,
                  parent: usize,
                  depth: u32,
                  cost: f64,
                  arena: &mut Vec<Node>,
                  open: &mut BinaryHeap<HeapEntry>,
                  seen: &mut HashMap<(u32, i64, i64, i64, i64, bool), ()>,
                  best_fallback: &mut Option<(f64, usize)>,
                  rng: &mut ChaCha8Rng| {
        for action in ACTIONS {
            let mut child = from.clone();
            for _ in 0..agent_config.action_ticks {
                if child.is_terminal() || child.tick >= tick_budget {
                    break;
                }
                child.step(action, sim_config);
            }
            if child.outcome == Outcome::Lost
                || (child.outcome == Outcome::Running && child.tick >= tick_budget)
            {
                continue;
            }
            let depth = depth + agent_config.action_ticks;
            let key = dedup_key(&child, depth);
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key, ());
            let cost = cost
                + agent_config.action_ticks as f64
                + if action.jump { JUMP_EDGE_COST } else { 0.0 };
            let f = cost + heuristic(&child, sim_config);
            let idx = arena.len();
            arena.push(Node { state: child, parent, action, depth, cost });
            if best_fallback.map_or(true, |(bf, _)| f < bf) {
                *best_fallback = Some((f, idx));
            }
            open.push(HeapEntry { f, depth, tie: rng.next_u64(), idx });
        }
    };

    expand(
        &root,
        usize::MAX,
        0,
        0.0,
        &mut arena,
        &mut open,
        &mut seen,
        &mut best_fallback,
        rng,
    );

    while let Some(entry) = open.pop() {
        let (done, depth, cost) = {
            let node = &arena[entry.idx];
            (
                node.state.outcome == Outcome::Won || node.depth >= agent_config.replan_horizon,
                node.depth,
                node.cost,
            )
        };
        if done {
            return reconstruct(&arena, entry.idx);
        }
        expansions += 1;
        if expansions >= agent_config.node_budget {
            break;
        }
        let from = arena[entry.idx].state.clone();
        expand(
            &from,
            entry.idx,
            depth,
            cost,
            &mut arena,
            &mut open,
            &mut seen,
            &mut best_fallback,
            rng,
        );
    }

    // Budget exhausted or every plan died: take the most promising node
    // seen, or try to jump clear as a last resort.
    match best_fallback {
        Some((_, idx)) => reconstruct(&arena, idx),
        None => VecDeque::from([Action::RIGHT_RUN_JUMP]),
    }
}

/// Plays one episode and returns the trace.
pub fn plan_and_play(
    grid: &TileGrid,
    sim_config: &SimConfig,
    agent_config: &AgentConfig,
) -> Result<Playtrace, SimError> {
    plan_and_play_with(grid, sim_config, agent_config, |_| {})
}

/// [`plan_and_play`] with an observer called after every committed tick;
/// used by tests that need the avatar trajectory.
pub fn plan_and_play_with<F>(
    grid: &TileGrid,
    sim_config: &SimConfig,
    agent_config: &AgentConfig,
    mut observer: F,
) -> Result<Playtrace, SimError>
where
    F: FnMut(&SimState),
{
    let mut state = SimState::new(grid, sim_config)?;
    let tick_budget = sim_config.tick_budget(grid.width());
    let mut rng = ChaCha8Rng::seed_from_u64(agent_config.noise_seed);
    let mut events = Vec::new();
    let mut plan: VecDeque<Action> = VecDeque::new();
    let mut followed = 0u32;
    let mut best_distance = state.distance;
    let mut stalled = 0u32;

    observer(&state);
    while !state.is_terminal() && state.tick < tick_budget {
        if plan.is_empty() || followed >= agent_config.replan_every {
            plan = plan_slice(&state, sim_config, agent_config, tick_budget, &mut rng);
            followed = 0;
        }
        let action = plan.pop_front().unwrap_or(Action::RIGHT_RUN_JUMP);
        followed += 1;
        for _ in 0..agent_config.action_ticks {
            if state.is_terminal() || state.tick >= tick_budget {
                break;
            }
            events.extend(state.step(action, sim_config));
            observer(&state);
        }
        if state.distance > best_distance + 0.25 {
            best_distance = state.distance;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= agent_config.stall_slices {
                break;
            }
        }
    }
    Ok(Playtrace {
        events,
        won: state.outcome == Outcome::Won,
        distance: state.distance,
        ticks_used: state.tick,
    })
}

/// Runs `n` independent episodes with seeds `seed_base..seed_base + n`.
pub fn evaluate_n_runs(
    grid: &TileGrid,
    n: usize,
    sim_config: &SimConfig,
    agent_config: &AgentConfig,
    seed_base: u64,
) -> Result<Vec<Playtrace>, SimError> {
    assert!(n >= 1);
    let mut traces = Vec::with_capacity(n);
    for i in 0..n {
        let mut cfg = agent_config.clone();
        cfg.noise_seed = seed_base.wrapping_add(i as u64);
        traces.push(plan_and_play(grid, sim_config, &cfg)?);
    }
    Ok(traces)
}

//! Agent decision policies.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{apply_action, signed_offset, torus_chebyshev, Action, CellReward, Environment, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Policy {
    LocalSearch,
    Oracle,
    Random,
}

/// How an agent gathers information from the rest of the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comm {
    Talking,
    Stigmergy,
    Imitation,
    None,
}

/// The five agent kinds of the group notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    /// Local search with stigmergy.
    SL,
    /// Local search with talking.
    TL,
    /// Local search with imitation.
    IL,
    /// Oracle.
    O,
    /// Random walker.
    R,
}

impl Kind {
    pub const ALL: [Kind; 5] = [Kind::SL, Kind::TL, Kind::IL, Kind::O, Kind::R];

    pub fn token(self) -> &'static str {
        match self {
            Kind::SL => "SL",
            Kind::TL => "TL",
            Kind::IL => "IL",
            Kind::O => "O",
            Kind::R => "R",
        }
    }

    pub fn policy(self) -> Policy {
        match self {
            Kind::SL | Kind::TL | Kind::IL => Policy::LocalSearch,
            Kind::O => Policy::Oracle,
            Kind::R => Policy::Random,
        }
    }

    /// Oracle and Random agents only donate information, so they carry no
    /// method of their own.
    pub fn comm(self) -> Comm {
        match self {
            Kind::SL => Comm::Stigmergy,
            Kind::TL => Comm::Talking,
            Kind::IL => Comm::Imitation,
            Kind::O | Kind::R => Comm::None,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: u32,
    pub kind: Kind,
}

impl AgentSpec {
    pub fn new(id: u32, kind: Kind) -> Self {
        Self { id, kind }
    }

    pub fn policy(&self) -> Policy {
        self.kind.policy()
    }

    pub fn comm(&self) -> Comm {
        self.kind.comm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentState {
    pub id: u32,
    pub pos: Position,
    pub last_action: Action,
}

impl AgentState {
    pub fn new(id: u32, pos: Position) -> Self {
        Self {
            id,
            pos,
            last_action: Action::Stay,
        }
    }
}

/// One step that shortens the toroidal Chebyshev distance from `from` to
/// `to` by exactly one, or `Stay` when they coincide.
pub fn greedy_step_toward(from: Position, to: Position, side: usize) -> Action {
    let dx = signed_offset(from.x, to.x, side).signum();
    let dy = signed_offset(from.y, to.y, side).signum();
    Action::from_delta(dx, dy).expect("unit delta")
}

/// Steps toward the best known cell. `known` lists distinct cells with the
/// reward the agent believes they hold; exact ties are broken uniformly.
///
/// Panics if `known` is empty.
pub fn local_search_decide<R: Rng + ?Sized>(known: &[CellReward], me: &AgentState, side: usize, rng: &mut R) -> Action {
    let best = known.iter().map(|c| c.reward).fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<Position> = known.iter().filter(|c| c.reward == best).map(|c| c.pos).collect();
    local_search_toward(&candidates, me, side, rng)
}

/// Steps toward one of `candidates`, chosen uniformly. The candidates
/// must be the maximum-reward cells of the agent's merged knowledge, as
/// produced by `SharedInfo::best_cells`; [`local_search_decide`] on the
/// full map makes the same draw.
pub fn local_search_toward<R: Rng + ?Sized>(
    candidates: &[Position],
    me: &AgentState,
    side: usize,
    rng: &mut R,
) -> Action {
    let target = candidates[rng.random_range(0..candidates.len())];
    greedy_step_toward(me.pos, target, side)
}

/// Moves to minimise the distance to where the Good object will be after
/// its next pattern step. Ties go to the higher current reward, then to
/// the earlier action in [`Action::ALL`].
pub fn oracle_decide(env: &Environment, me: &AgentState) -> Action {
    let target = env.next_good();
    let side = env.side();
    Action::ALL
        .into_iter()
        .min_by_key(|&a| {
            let cell = apply_action(me.pos, a, side);
            (torus_chebyshev(cell, target, side), -env.reward_tenths(cell))
        })
        .expect("nine actions")
}

/// A uniformly chosen neighbour-cell move; `include_stay` widens the draw
/// to all nine actions.
pub fn random_decide<R: Rng + ?Sized>(rng: &mut R, include_stay: bool) -> Action {
    if include_stay {
        Action::ALL[rng.random_range(0..Action::ALL.len())]
    } else {
        Action::MOVES[rng.random_range(0..Action::MOVES.len())]
    }
}

//! Per-iteration information exchange.
//!
//! All exchanges read the iteration-start snapshot only. The receiver's
//! communication method decides what it gets; Oracle and Random agents
//! donate observations or actions but never consume them.

use rand::Rng;

use crate::grid::{shell_values, torus_chebyshev, Action, CellReward, Observation, Position};
use crate::policy::AgentState;

/// One agent's observation tagged with its stable id.
#[derive(Debug, Clone, PartialEq)]
pub struct Sighting {
    pub id: u32,
    pub observation: Observation,
}

/// What a receiver knows before deciding.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedInfo {
    /// Always the exact environment values.
    pub own: Observation,
    /// Cells reported by peers, excluding the receiver's own nine cells. A
    /// cell may appear once per reporting peer under stigmergy.
    pub peer_cells: Vec<CellReward>,
    /// Previous-iteration actions of visible agents (imitation only).
    pub peer_actions: Vec<(u32, Action)>,
}

impl SharedInfo {
    pub fn solo(own: Observation) -> Self {
        Self {
            own,
            peer_cells: Vec::new(),
            peer_actions: Vec::new(),
        }
    }

    /// Distinct known cells: the own observation first, then peer cells
    /// ordered by position. Repeated peer reports of a cell keep the highest
    /// value.
    pub fn known_cells(&self) -> Vec<CellReward> {
        let mut peers = self.peer_cells.clone();
        peers.sort_unstable_by(|a, b| pos_key(a.pos).cmp(&pos_key(b.pos)).then(a.reward.total_cmp(&b.reward)));
        let mut out: Vec<CellReward> = Vec::with_capacity(9 + peers.len());
        out.extend_from_slice(&self.own.cells);
        let first_peer = out.len();
        for c in peers {
            if out.len() > first_peer && out[out.len() - 1].pos == c.pos {
                let last = out.len() - 1;
                out[last].reward = out[last].reward.max(c.reward);
            } else {
                out.push(c);
            }
        }
        out
    }

    /// The cells of [`known_cells`](Self::known_cells) holding the highest
    /// value, in the same order, without materialising the merged map.
    pub fn best_cells(&self) -> Vec<Position> {
        let best = self
            .own
            .cells
            .iter()
            .chain(&self.peer_cells)
            .map(|c| c.reward)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut out: Vec<Position> = self
            .own
            .cells
            .iter()
            .filter(|c| c.reward == best)
            .map(|c| c.pos)
            .collect();
        let mut peers: Vec<Position> = self
            .peer_cells
            .iter()
            .filter(|c| c.reward == best)
            .map(|c| c.pos)
            .collect();
        peers.sort_unstable_by_key(|&p| pos_key(p));
        peers.dedup();
        out.extend(peers);
        out
    }
}

fn pos_key(p: Position) -> u64 {
    ((p.y as u64) << 32) | p.x as u64
}

fn split(sightings: &[Sighting], receiver: u32) -> (&Observation, Vec<&Sighting>) {
    let own = &sightings
        .iter()
        .find(|s| s.id == receiver)
        .expect("receiver must have an observation")
        .observation;
    let mut peers: Vec<&Sighting> = sightings.iter().filter(|s| s.id != receiver).collect();
    if !peers.is_sorted_by_key(|s| s.id) {
        peers.sort_by_key(|s| s.id);
    }
    (own, peers)
}

fn is_own(own: &Observation, pos: Position) -> bool {
    own.cells.iter().any(|c| c.pos == pos)
}

/// Exact sharing. `range` limits donors to those whose position lies within
/// that Chebyshev distance of the receiver; `None` means the whole group.
pub fn talking_exchange(sightings: &[Sighting], receiver: u32, range: Option<usize>, side: usize) -> SharedInfo {
    let (own, peers) = split(sightings, receiver);
    let mut peer_cells: Vec<CellReward> = peers
        .into_iter()
        .filter(|s| range.is_none_or(|r| torus_chebyshev(s.observation.origin, own.origin, side) <= r))
        .flat_map(|s| s.observation.cells.iter().copied())
        .filter(|c| !is_own(own, c.pos))
        .collect();
    peer_cells.sort_unstable_by_key(|c| pos_key(c.pos));
    peer_cells.dedup_by_key(|c| c.pos);
    SharedInfo {
        own: own.clone(),
        peer_cells,
        peer_actions: Vec::new(),
    }
}

/// Peers' cell positions with every reported value replaced by an
/// independent uniform draw from the nine shell values. Draws are made per
/// (peer, cell) report, fresh for each receiver.
pub fn stigmergy_exchange<R: Rng + ?Sized>(sightings: &[Sighting], receiver: u32, rng: &mut R) -> SharedInfo {
    let (own, peers) = split(sightings, receiver);
    let values = shell_values();
    let mut peer_cells = Vec::with_capacity(9 * peers.len());
    for s in peers {
        for c in &s.observation.cells {
            if !is_own(own, c.pos) {
                peer_cells.push(CellReward {
                    pos: c.pos,
                    reward: values[rng.random_range(0..values.len())],
                });
            }
        }
    }
    SharedInfo {
        own: own.clone(),
        peer_cells,
        peer_actions: Vec::new(),
    }
}

/// Agents other than the receiver standing in its Moore neighbourhood,
/// with their previous actions, ordered by id.
pub fn visible_actions(states: &[AgentState], receiver: u32, side: usize) -> Vec<(u32, Action)> {
    let me = states
        .iter()
        .find(|s| s.id == receiver)
        .expect("receiver must have a state");
    let mut out: Vec<(u32, Action)> = states
        .iter()
        .filter(|s| s.id != receiver && torus_chebyshev(s.pos, me.pos, side) <= 1)
        .map(|s| (s.id, s.last_action))
        .collect();
    out.sort_by_key(|&(id, _)| id);
    out
}

/// The previous action of one uniformly chosen visible agent, or `None`
/// when the receiver is alone and should fall back to local search.
pub fn imitation_select<R: Rng + ?Sized>(
    states: &[AgentState],
    receiver: u32,
    side: usize,
    rng: &mut R,
) -> Option<Action> {
    let visible = visible_actions(states, receiver, side);
    if visible.is_empty() {
        None
    } else {
        Some(visible[rng.random_range(0..visible.len())].1)
    }
}

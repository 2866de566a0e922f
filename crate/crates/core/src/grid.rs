//! The toroidal grid world: geometry, the reward field induced by the Good
//! and Evil special objects, their looping movement patterns, and the two
//! environment complexity measures.
//!
//! Axis convention: `x` is the column, `y` the row. "Up" decrements `y`,
//! "left" decrements `x`. Coordinates are 0-based.

use std::io::Write;
use std::sync::Arc;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::seed;

/// Smallest supported grid side. Below this the distance-3 reward shells
/// wrap onto themselves.
pub const MIN_SIDE: usize = 5;

/// Reward contributed by the Good object at distance 0..=3, in tenths.
/// The Evil object contributes the exact negatives.
const SHELL_TENTHS: [i32; 4] = [10, 8, 5, 1];

/// A cell on an `m x m` torus, always stored as its canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    /// Reduces arbitrary signed coordinates onto the torus.
    pub fn wrapped(x: i64, y: i64, side: usize) -> Self {
        let m = side as i64;
        Self {
            x: x.rem_euclid(m) as usize,
            y: y.rem_euclid(m) as usize,
        }
    }

    /// Row-major cell index.
    pub fn index(self, side: usize) -> usize {
        self.y * side + self.x
    }

    pub fn from_index(index: usize, side: usize) -> Self {
        Self {
            x: index % side,
            y: index / side,
        }
    }
}

/// The nine moves available to agents and special objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Left,
    Right,
    Up,
    Down,
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
    Stay,
}

impl Action {
    /// Fixed enumeration order, used wherever deterministic tie-breaking is
    /// needed.
    pub const ALL: [Action; 9] = [
        Action::Left,
        Action::Right,
        Action::Up,
        Action::Down,
        Action::UpLeft,
        Action::UpRight,
        Action::DownLeft,
        Action::DownRight,
        Action::Stay,
    ];

    /// The eight moves that leave the current cell.
    pub const MOVES: [Action; 8] = [
        Action::Left,
        Action::Right,
        Action::Up,
        Action::Down,
        Action::UpLeft,
        Action::UpRight,
        Action::DownLeft,
        Action::DownRight,
    ];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::UpLeft => (-1, -1),
            Action::UpRight => (1, -1),
            Action::DownLeft => (-1, 1),
            Action::DownRight => (1, 1),
            Action::Stay => (0, 0),
        }
    }

    pub fn from_delta(dx: i64, dy: i64) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.delta() == (dx, dy))
    }

    pub fn opposite(self) -> Action {
        let (dx, dy) = self.delta();
        Action::from_delta(-dx, -dy).expect("negated delta is a valid action")
    }

    /// Position of this action in [`Action::ALL`].
    pub fn code(self) -> u8 {
        Action::ALL.iter().position(|&a| a == self).unwrap() as u8
    }
}

/// Moves `p` by `action` on an `m x m` torus.
pub fn apply_action(p: Position, action: Action, side: usize) -> Position {
    let (dx, dy) = action.delta();
    Position::wrapped(p.x as i64 + dx, p.y as i64 + dy, side)
}

fn axis_distance(a: usize, b: usize, side: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(side - d)
}

/// Toroidal chessboard (Chebyshev) distance.
pub fn torus_chebyshev(a: Position, b: Position, side: usize) -> usize {
    axis_distance(a.x, b.x, side).max(axis_distance(a.y, b.y, side))
}

/// Shortest signed displacement from `from` to `to` along one axis. When
/// both wrap directions are equally short the positive one is returned.
pub(crate) fn signed_offset(from: usize, to: usize, side: usize) -> i64 {
    let m = side as i64;
    let d = (to as i64 - from as i64).rem_euclid(m);
    if d * 2 <= m {
        d
    } else {
        d - m
    }
}

fn good_tenths(distance: usize) -> i32 {
    SHELL_TENTHS.get(distance).copied().unwrap_or(0)
}

/// Every value an observed cell can take, in tenths: one Good shell value
/// plus one Evil shell value.
pub fn reward_alphabet() -> Vec<f64> {
    let mut shell: Vec<i32> = SHELL_TENTHS.to_vec();
    shell.push(0);
    let mut out: Vec<i32> = shell.iter().flat_map(|g| shell.iter().map(move |e| g - e)).collect();
    out.sort_unstable();
    out.dedup();
    out.into_iter().map(|t| f64::from(t) / 10.0).collect()
}

/// The nine distinct values a single shell can emit, symmetric around 0.
pub fn shell_values() -> [f64; 9] {
    [-1.0, -0.8, -0.5, -0.1, 0.0, 0.1, 0.5, 0.8, 1.0]
}

/// A looping sequence of actions with a cursor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovementPattern {
    actions: Arc<[Action]>,
    cursor: usize,
}

impl MovementPattern {
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Config("movement pattern must not be empty".into()));
        }
        Ok(Self {
            actions: actions.into(),
            cursor: 0,
        })
    }

    /// A pattern of `len` actions drawn uniformly from all nine moves.
    pub fn generated(len: usize, seed: u64) -> Result<Self> {
        let mut rng = seed::stream(seed, &[]);
        let actions = (0..len)
            .map(|_| Action::ALL[rng.random_range(0..Action::ALL.len())])
            .collect();
        Self::new(actions)
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn current(&self) -> Action {
        self.actions[self.cursor]
    }

    pub fn advanced(&self) -> Self {
        Self {
            actions: Arc::clone(&self.actions),
            cursor: (self.cursor + 1) % self.actions.len(),
        }
    }

    /// Hex SHA-256 of the action sequence (cursor excluded).
    pub fn digest(&self) -> String {
        let bytes: Vec<u8> = self.actions.iter().map(|a| a.code()).collect();
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Snapshot of the world minus the agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Environment {
    side: usize,
    good: Position,
    evil: Position,
    good_pattern: MovementPattern,
    evil_pattern: MovementPattern,
}

impl Environment {
    pub fn new(
        side: usize,
        good: Position,
        evil: Position,
        good_pattern: MovementPattern,
        evil_pattern: MovementPattern,
    ) -> Result<Self> {
        validate_side(side)?;
        if good.x >= side || good.y >= side || evil.x >= side || evil.y >= side {
            return Err(Error::Config("special object outside the grid".into()));
        }
        if good == evil {
            return Err(Error::Config(
                "Good and Evil objects must start on distinct cells".into(),
            ));
        }
        Ok(Self {
            side,
            good,
            evil,
            good_pattern,
            evil_pattern,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn good(&self) -> Position {
        self.good
    }

    pub fn evil(&self) -> Position {
        self.evil
    }

    pub fn good_pattern(&self) -> &MovementPattern {
        &self.good_pattern
    }

    pub fn evil_pattern(&self) -> &MovementPattern {
        &self.evil_pattern
    }

    /// Where the Good object will be after its next pattern step.
    pub fn next_good(&self) -> Position {
        apply_action(self.good, self.good_pattern.current(), self.side)
    }

    /// Advances both special objects by one step of their patterns.
    pub fn stepped(&self) -> Self {
        Self {
            side: self.side,
            good: self.next_good(),
            evil: apply_action(self.evil, self.evil_pattern.current(), self.side),
            good_pattern: self.good_pattern.advanced(),
            evil_pattern: self.evil_pattern.advanced(),
        }
    }

    pub(crate) fn reward_tenths(&self, cell: Position) -> i32 {
        good_tenths(torus_chebyshev(cell, self.good, self.side))
            - good_tenths(torus_chebyshev(cell, self.evil, self.side))
    }

    /// Reward of standing on `cell`: the Good shell value plus the Evil one.
    pub fn reward_at(&self, cell: Position) -> f64 {
        f64::from(self.reward_tenths(cell)) / 10.0
    }

    /// Radius-1 Moore neighbourhood of `p`, with rewards.
    pub fn observe(&self, p: Position) -> Observation {
        let cells = Action::ALL.map(|a| {
            let pos = apply_action(p, a, self.side);
            CellReward {
                pos,
                reward: self.reward_at(pos),
            }
        });
        Observation { origin: p, cells }
    }
}

pub(crate) fn validate_side(side: usize) -> Result<()> {
    if side < MIN_SIDE {
        return Err(Error::Config(format!(
            "grid side must be at least {MIN_SIDE}, got {side}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellReward {
    pub pos: Position,
    pub reward: f64,
}

/// What an agent sees: the nine cells around (and including) its position.
/// `cells[k]` is the cell reached by `Action::ALL[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub origin: Position,
    pub cells: [CellReward; 9],
}

/// Shannon entropy in bits of two independent uniform object placements on
/// an `m x m` grid: `2 * log2(m^2)`.
pub fn entropy_bits(side: usize) -> f64 {
    2.0 * ((side * side) as f64).log2()
}

/// Compressed length in bits of the pattern's action codes under raw
/// DEFLATE. An upper-bound proxy for Kolmogorov complexity.
pub fn complexity_bits(pattern: &MovementPattern) -> f64 {
    let bytes: Vec<u8> = pattern.actions().iter().map(|a| a.code()).collect();
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::best());
    enc.write_all(&bytes).expect("in-memory write");
    let out = enc.finish().expect("in-memory write");
    (out.len() * 8) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: usize, y: usize) -> Position {
        Position { x, y }
    }

    // Brute force: smallest |dx + k*m| over a few wraps, per axis.
    fn brute_distance(a: Position, b: Position, m: usize) -> usize {
        let m = m as i64;
        let axis = |u: usize, v: usize| {
            (-2..=2)
                .map(|k| (u as i64 - v as i64 + k * m).unsigned_abs() as usize)
                .min()
                .unwrap()
        };
        axis(a.x, b.x).max(axis(a.y, b.y))
    }

    fn stay_env(side: usize, good: Position, evil: Position) -> Environment {
        let stay = MovementPattern::new(vec![Action::Stay]).unwrap();
        Environment::new(side, good, evil, stay.clone(), stay).unwrap()
    }

    #[test]
    fn worked_distance_example() {
        // (2,1) to (2,10) on a 1-based 10x10 grid.
        assert_eq!(torus_chebyshev(p(1, 0), p(1, 9), 10), 1);
    }

    #[test]
    fn distance_matches_brute_force() {
        assert_eq!(torus_chebyshev(p(1, 1), p(4, 4), 5), 2);
        for m in 1..=9 {
            for i in 0..m * m {
                for j in 0..m * m {
                    let (a, b) = (Position::from_index(i, m), Position::from_index(j, m));
                    let d = torus_chebyshev(a, b, m);
                    assert_eq!(d, brute_distance(a, b, m));
                    assert!(d <= m / 2);
                }
            }
        }
    }

    #[test]
    fn reward_table_lookups() {
        let good = p(10, 10);
        let evil = p(13, 11);
        let env = stay_env(20, good, evil);
        // d(good)=1, d(evil)=3
        let cell = p(11, 10);
        assert_eq!(torus_chebyshev(cell, good, 20), 1);
        assert_eq!(torus_chebyshev(cell, evil, 20), 2);
        let cell = p(9, 10);
        assert_eq!(torus_chebyshev(cell, good, 20), 1);
        assert_eq!(torus_chebyshev(cell, evil, 20), 4);
        assert_eq!(env.reward_at(cell), 0.8);
        let cell = p(10, 9);
        assert_eq!(torus_chebyshev(cell, evil, 20), 3);
        assert_eq!(env.reward_at(cell), 0.7);

        let env = stay_env(20, p(0, 0), p(10, 10));
        assert_eq!(env.reward_at(p(5, 0)), 0.0); // d=5 and d=10
        assert_eq!(env.reward_at(p(0, 0)), 1.0);
        assert_eq!(env.reward_at(p(10, 10)), -1.0);
        // equidistant cells cancel
        assert_eq!(env.reward_at(p(5, 5)), 0.0);
        let env = stay_env(20, p(0, 0), p(6, 0));
        assert_eq!(env.reward_at(p(3, 0)), 0.0);
        assert_eq!(env.reward_at(p(4, 0)), -0.5);
    }

    #[test]
    fn apply_action_wraps() {
        assert_eq!(apply_action(p(0, 0), Action::UpLeft, 10), p(9, 9));
        assert_eq!(apply_action(p(2, 1), Action::Right, 3), p(0, 1));
        for a in Action::ALL {
            let q = apply_action(p(4, 4), a, 10);
            assert_eq!(apply_action(q, a.opposite(), 10), p(4, 4));
        }
        assert_eq!(apply_action(p(3, 7), Action::Stay, 10), p(3, 7));
    }

    #[test]
    fn stepping_advances_cursor_and_wraps() {
        let good = MovementPattern::new(vec![Action::Right, Action::Right]).unwrap();
        let evil = MovementPattern::new(vec![Action::Stay]).unwrap();
        let env = Environment::new(5, p(0, 0), p(3, 3), good, evil).unwrap();
        let env = env.stepped();
        assert_eq!(env.good_pattern().cursor(), 1);
        let env = env.stepped();
        assert_eq!(env.good(), p(2, 0));
        assert_eq!(env.good_pattern().cursor(), 0);
        assert_eq!(env.evil(), p(3, 3));
        assert_eq!(env.evil_pattern().cursor(), 0);
        assert_eq!(env.stepped(), env.stepped());
    }

    #[test]
    fn rejects_small_or_degenerate_grids() {
        let stay = MovementPattern::new(vec![Action::Stay]).unwrap();
        assert!(Environment::new(4, p(0, 0), p(1, 1), stay.clone(), stay.clone()).is_err());
        assert!(Environment::new(5, p(1, 1), p(1, 1), stay.clone(), stay).is_err());
        assert!(MovementPattern::new(vec![]).is_err());
    }

    #[test]
    fn entropy_reproduces_reported_values() {
        for (m, bits) in [(10, 13.2), (20, 17.2), (30, 19.6)] {
            assert!((entropy_bits(m) - bits).abs() < 0.1, "m={m}");
        }
        assert!((entropy_bits(20) - 17.29).abs() < 0.005);
        assert_eq!(entropy_bits(1), 0.0);
    }

    #[test]
    fn complexity_orders_constant_below_random() {
        let one = MovementPattern::new(vec![Action::Up]).unwrap();
        let hundred = MovementPattern::new(vec![Action::Up; 100]).unwrap();
        let (k1, k100) = (complexity_bits(&one), complexity_bits(&hundred));
        assert!(k1 > 0.0);
        assert!((k100 - k1).abs() <= 128.0, "{k1} vs {k100}");

        let constant = MovementPattern::new(vec![Action::Left; 64]).unwrap();
        let random = MovementPattern::generated(64, 99).unwrap();
        assert!(complexity_bits(&constant) < complexity_bits(&random));
    }

    #[test]
    fn observation_examples() {
        let env = stay_env(20, p(0, 0), p(10, 10));
        let far = env.observe(p(5, 15));
        assert!(far.cells.iter().all(|c| c.reward == 0.0));

        let near = env.observe(p(1, 0));
        assert_eq!(near.cells[8].pos, p(1, 0));
        assert_eq!(near.cells[8].reward, 0.8);
        assert_eq!(near.cells.iter().filter(|c| c.reward == 1.0).count(), 1);

        let corner = env.observe(p(0, 0));
        let mut cells: Vec<_> = corner.cells.iter().map(|c| c.pos).collect();
        cells.sort();
        cells.dedup();
        assert_eq!(cells.len(), 9);
    }

    #[test]
    fn alphabet_has_expected_shape() {
        let alpha = reward_alphabet();
        assert!(alpha.iter().all(|r| (-1.0..=1.0).contains(r)));
        assert!(alpha.contains(&0.7));
        let shell = shell_values();
        assert!((shell.iter().sum::<f64>()).abs() < 1e-12);
    }
}

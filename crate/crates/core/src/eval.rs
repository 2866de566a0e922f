//! The evaluation loop, the group score, batched episodes and the weighted
//! homogeneous baseline.
//!
//! One iteration runs in this order:
//!
//! 1. every agent observes the iteration-start snapshot;
//! 2. every agent exchanges information and picks an action, then all
//!    actions are applied at once;
//! 3. Good and Evil advance one pattern step;
//! 4. each agent is rewarded for its new cell against the objects' new
//!    cells.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::comm::{imitation_select, stigmergy_exchange, talking_exchange, SharedInfo, Sighting};
use crate::error::{Error, Result};
use crate::grid::{apply_action, validate_side, Action, Environment, MovementPattern, Position};
use crate::policy::{local_search_toward, oracle_decide, random_decide, AgentSpec, AgentState, Comm, Kind, Policy};
use crate::seed;
use crate::stats;

/// Seed the default movement patterns are generated from.
pub const DEFAULT_PATTERN_SEED: u64 = 0x4c_414d_4244_412a; // "LAMBDA*"
pub const DEFAULT_PATTERN_LENGTH: usize = 64;
pub const DEFAULT_EPISODES: usize = 100;
pub const DEFAULT_SIDE: usize = 20;
pub const DEFAULT_ITERATIONS: u32 = 20;

/// Where the Good and Evil movement patterns come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternSource {
    /// Uniform draws over the nine actions; Good and Evil use independent
    /// sub-seeds of `seed`.
    Generated {
        length: usize,
        seed: u64,
    },
    Explicit {
        good: Vec<Action>,
        evil: Vec<Action>,
    },
}

impl Default for PatternSource {
    fn default() -> Self {
        PatternSource::Generated {
            length: DEFAULT_PATTERN_LENGTH,
            seed: DEFAULT_PATTERN_SEED,
        }
    }
}

impl PatternSource {
    pub fn build(&self) -> Result<(MovementPattern, MovementPattern)> {
        match self {
            PatternSource::Generated { length, seed } => Ok((
                MovementPattern::generated(*length, seed::derive(*seed, &[seed::TAG_PATTERN_GOOD]))?,
                MovementPattern::generated(*length, seed::derive(*seed, &[seed::TAG_PATTERN_EVIL]))?,
            )),
            PatternSource::Explicit { good, evil } => {
                Ok((MovementPattern::new(good.clone())?, MovementPattern::new(evil.clone())?))
            }
        }
    }
}

/// Fixed initial positions, bypassing the random initialisation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub good: Position,
    pub evil: Position,
    /// `(agent id, position)`; every roster id must appear.
    pub agents: Vec<(u32, Position)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub side: usize,
    pub roster: Vec<AgentSpec>,
    pub iterations: u32,
    pub patterns: PatternSource,
    /// Donor range for talking; `None` shares across the whole group.
    pub talking_range: Option<usize>,
    /// Let Random agents also draw `Stay`.
    pub random_includes_stay: bool,
    pub placement: Option<Placement>,
    pub record_trajectory: bool,
}

impl EpisodeConfig {
    pub fn new(side: usize, roster: Vec<AgentSpec>, iterations: u32) -> Self {
        Self {
            side,
            roster,
            iterations,
            patterns: PatternSource::default(),
            talking_range: None,
            random_includes_stay: false,
            placement: None,
            record_trajectory: false,
        }
    }

    /// Roster with ids `0..n` assigned in order from `(kind, count)` terms.
    pub fn roster_from_counts(terms: &[(Kind, usize)]) -> Vec<AgentSpec> {
        terms
            .iter()
            .flat_map(|&(kind, count)| std::iter::repeat_n(kind, count))
            .enumerate()
            .map(|(id, kind)| AgentSpec::new(id as u32, kind))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        validate_side(self.side)?;
        if self.roster.is_empty() {
            return Err(Error::Config("roster must contain at least one agent".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        let mut ids: Vec<u32> = self.roster.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("agent ids must be unique".into()));
        }
        if let Some(p) = &self.placement {
            let mut placed: Vec<u32> = p.agents.iter().map(|&(id, _)| id).collect();
            placed.sort_unstable();
            if placed != ids {
                return Err(Error::Config("placement must position every agent exactly once".into()));
            }
        }
        Ok(())
    }

    /// Agent counts per kind, in kind order.
    pub fn composition(&self) -> Vec<(Kind, usize)> {
        let mut counts: BTreeMap<Kind, usize> = BTreeMap::new();
        for a in &self.roster {
            *counts.entry(a.kind).or_default() += 1;
        }
        counts.into_iter().collect()
    }
}

/// Per-agent, per-iteration rewards of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardLog {
    /// Agents in ascending id order; row `j` of `rewards` belongs to
    /// `agents[j]`.
    pub agents: Vec<AgentSpec>,
    pub rewards: Vec<Vec<f64>>,
    /// Positions after each iteration, when requested.
    pub trajectory: Option<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub agents: Vec<Vec<Position>>,
    pub good: Vec<Position>,
    pub evil: Vec<Position>,
}

impl RewardLog {
    pub fn iterations(&self) -> usize {
        self.rewards.first().map_or(0, Vec::len)
    }

    /// Mean reward of the agents of one kind, if any are present.
    pub fn kind_mean(&self, kind: Kind) -> Option<f64> {
        let rows: Vec<&Vec<f64>> = self
            .agents
            .iter()
            .zip(&self.rewards)
            .filter(|(a, _)| a.kind == kind)
            .map(|(_, r)| r)
            .collect();
        if rows.is_empty() {
            return None;
        }
        let total: f64 = rows.iter().flat_map(|r| r.iter()).sum();
        Some(total / (rows.len() * self.iterations()) as f64)
    }
}

/// Total reward over all agents and iterations divided by `n * iterations`.
pub fn group_score(log: &RewardLog) -> f64 {
    let total: f64 = log.rewards.iter().flat_map(|r| r.iter()).sum();
    total / (log.rewards.len() * log.iterations()) as f64
}

fn random_cell<R: Rng>(rng: &mut R, side: usize) -> Position {
    Position::from_index(rng.random_range(0..side * side), side)
}

fn initial_world(
    config: &EpisodeConfig,
    roster: &[AgentSpec],
    episode_seed: u64,
) -> Result<(Environment, Vec<AgentState>)> {
    let (good_pattern, evil_pattern) = config.patterns.build()?;
    let side = config.side;
    if let Some(p) = &config.placement {
        let env = Environment::new(side, p.good, p.evil, good_pattern, evil_pattern)?;
        let states = roster
            .iter()
            .map(|a| {
                let pos = p.agents.iter().find(|&&(id, _)| id == a.id).expect("validated").1;
                if pos.x >= side || pos.y >= side {
                    return Err(Error::Config(format!("agent {} placed outside the grid", a.id)));
                }
                Ok(AgentState::new(a.id, pos))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((env, states));
    }
    let mut rng = seed::stream(episode_seed, &[seed::TAG_ENV]);
    let good = random_cell(&mut rng, side);
    let evil = loop {
        let c = random_cell(&mut rng, side);
        if c != good {
            break c;
        }
    };
    let env = Environment::new(side, good, evil, good_pattern, evil_pattern)?;
    let states = roster
        .iter()
        .map(|a| {
            let mut rng = seed::stream(episode_seed, &[seed::TAG_SPAWN, u64::from(a.id)]);
            AgentState::new(a.id, random_cell(&mut rng, side))
        })
        .collect();
    Ok((env, states))
}

#[allow(clippy::too_many_arguments)]
fn decide(
    config: &EpisodeConfig,
    spec: &AgentSpec,
    me: &AgentState,
    env: &Environment,
    states: &[AgentState],
    sightings: &[Sighting],
    iteration: u32,
    episode_seed: u64,
) -> Action {
    let mut rng = seed::agent_stream(episode_seed, spec.id, iteration);
    let side = config.side;
    let own = || {
        &sightings
            .iter()
            .find(|s| s.id == spec.id)
            .expect("observed")
            .observation
    };
    match spec.policy() {
        Policy::Random => random_decide(&mut rng, config.random_includes_stay),
        Policy::Oracle => oracle_decide(env, me),
        Policy::LocalSearch => {
            let info = match spec.comm() {
                Comm::Talking => talking_exchange(sightings, spec.id, config.talking_range, side),
                Comm::Stigmergy => stigmergy_exchange(sightings, spec.id, &mut rng),
                Comm::Imitation => {
                    // the first iteration has no action history to copy
                    if iteration > 0 {
                        if let Some(a) = imitation_select(states, spec.id, side, &mut rng) {
                            return a;
                        }
                    }
                    SharedInfo::solo(own().clone())
                }
                Comm::None => SharedInfo::solo(own().clone()),
            };
            local_search_toward(&info.best_cells(), me, side, &mut rng)
        }
    }
}

/// Runs one episode. Agents are processed by ascending id and every random
/// draw is keyed by `(episode_seed, agent id, iteration)`, so the roster's
/// list order does not affect the outcome.
pub fn run_episode(config: &EpisodeConfig, episode_seed: u64) -> Result<RewardLog> {
    config.validate()?;
    let mut roster = config.roster.clone();
    roster.sort_by_key(|a| a.id);
    let (mut env, mut states) = initial_world(config, &roster, episode_seed)?;
    let n = roster.len();
    let iterations = config.iterations as usize;
    let mut rewards = vec![Vec::with_capacity(iterations); n];
    let mut trajectory = config.record_trajectory.then(Trajectory::default);

    for iteration in 0..config.iterations {
        let sightings: Vec<Sighting> = states
            .iter()
            .map(|s| Sighting {
                id: s.id,
                observation: env.observe(s.pos),
            })
            .collect();
        let actions: Vec<Action> = roster
            .iter()
            .zip(&states)
            .map(|(spec, me)| decide(config, spec, me, &env, &states, &sightings, iteration, episode_seed))
            .collect();
        for (state, action) in states.iter_mut().zip(actions) {
            state.pos = apply_action(state.pos, action, config.side);
            state.last_action = action;
        }
        env = env.stepped();
        for (row, state) in rewards.iter_mut().zip(&states) {
            row.push(env.reward_at(state.pos));
        }
        if let Some(t) = trajectory.as_mut() {
            t.agents.push(states.iter().map(|s| s.pos).collect());
            t.good.push(env.good());
            t.evil.push(env.evil());
        }
    }
    Ok(RewardLog {
        agents: roster,
        rewards,
        trajectory,
    })
}

/// Score of one episode, with per-kind subgroup means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub score: f64,
    pub kind_means: BTreeMap<Kind, f64>,
}

impl EpisodeSummary {
    pub fn from_log(log: &RewardLog) -> Self {
        let kind_means = Kind::ALL
            .iter()
            .filter_map(|&k| log.kind_mean(k).map(|m| (k, m)))
            .collect();
        Self {
            score: group_score(log),
            kind_means,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub mean: f64,
    pub std_dev: f64,
    pub episode_count: usize,
    pub master_seed: u64,
    pub config: EpisodeConfig,
    /// Indexed by episode number.
    pub episodes: Vec<EpisodeSummary>,
}

impl GroupScore {
    pub fn scores(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.score).collect()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.episode_count as f64).sqrt()
    }

    /// Per-episode mean reward of one kind's subgroup.
    pub fn kind_scores(&self, kind: Kind) -> Option<Vec<f64>> {
        self.episodes.iter().map(|e| e.kind_means.get(&kind).copied()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Episodes on the rayon pool; identical results to `Sequential`.
    /// Without the `parallel` feature this runs sequentially.
    #[default]
    Parallel,
}

fn map_episodes<T, F>(count: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// Runs `episodes` independent episodes; episode `k` uses seed
/// `episode_seed(master_seed, k)`.
pub fn evaluate(config: &EpisodeConfig, episodes: usize, master_seed: u64) -> Result<GroupScore> {
    evaluate_with(config, episodes, master_seed, Execution::default())
}

pub fn evaluate_with(config: &EpisodeConfig, episodes: usize, master_seed: u64, exec: Execution) -> Result<GroupScore> {
    config.validate()?;
    if episodes == 0 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    let summaries = map_episodes(episodes, exec, |k| {
        run_episode(config, seed::episode_seed(master_seed, k as u64)).map(|log| EpisodeSummary::from_log(&log))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = summaries.iter().map(|s| s.score).collect();
    Ok(GroupScore {
        mean: stats::mean(&scores),
        std_dev: stats::std_dev(&scores),
        episode_count: episodes,
        master_seed,
        config: config.clone(),
        episodes: summaries,
    })
}

/// Composition-weighted mean of same-size homogeneous scores.
pub fn weighted_average_baseline(homo: &BTreeMap<Kind, f64>, composition: &[(Kind, usize)]) -> Result<f64> {
    let n: usize = composition.iter().map(|&(_, c)| c).sum();
    if n == 0 {
        return Err(Error::Config("composition is empty".into()));
    }
    let mut total = 0.0;
    for &(kind, count) in composition {
        let score = homo.get(&kind).ok_or_else(|| Error::MissingKind(kind.to_string()))?;
        total += count as f64 * score;
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::reward_alphabet;

    fn p(x: usize, y: usize) -> Position {
        Position { x, y }
    }

    fn log_of(rewards: Vec<Vec<f64>>) -> RewardLog {
        RewardLog {
            agents: (0..rewards.len() as u32).map(|i| AgentSpec::new(i, Kind::R)).collect(),
            rewards,
            trajectory: None,
        }
    }

    #[test]
    fn group_score_arithmetic() {
        assert_eq!(group_score(&log_of(vec![vec![0.0; 5]; 3])), 0.0);
        assert!((group_score(&log_of(vec![vec![0.8, 0.5]])) - 0.65).abs() < 1e-12);
        assert_eq!(group_score(&log_of(vec![vec![1.0, 1.0], vec![-1.0, -1.0]])), 0.0);
    }

    #[test]
    fn random_agent_rewards_stay_in_alphabet() {
        let config = EpisodeConfig::new(20, vec![AgentSpec::new(0, Kind::R)], 20);
        let alphabet = reward_alphabet();
        for s in 0..20 {
            let log = run_episode(&config, s).unwrap();
            assert_eq!(log.iterations(), 20);
            assert!(log.rewards[0].iter().all(|r| alphabet.contains(r)));
        }
    }

    #[test]
    fn oracle_closes_on_stationary_good() {
        let mut config = EpisodeConfig::new(20, vec![AgentSpec::new(0, Kind::O)], 12);
        config.patterns = PatternSource::Explicit {
            good: vec![Action::Stay],
            evil: vec![Action::Stay],
        };
        config.placement = Some(Placement {
            good: p(10, 10),
            evil: p(0, 0),
            agents: vec![(0, p(4, 10))],
        });
        let log = run_episode(&config, 1).unwrap();
        for (i, &r) in log.rewards[0].iter().enumerate() {
            let iteration = i + 1;
            let expected = match iteration {
                1 => 0.0,
                2 => 0.0,
                3 => 0.1,
                4 => 0.5,
                5 => 0.8,
                _ => 1.0,
            };
            assert_eq!(r, expected, "iteration {iteration}");
        }
    }

    #[test]
    fn episodes_are_reproducible() {
        let roster = EpisodeConfig::roster_from_counts(&[
            (Kind::SL, 3),
            (Kind::TL, 2),
            (Kind::IL, 2),
            (Kind::O, 1),
            (Kind::R, 1),
        ]);
        let config = EpisodeConfig::new(12, roster, 15);
        assert_eq!(run_episode(&config, 5).unwrap(), run_episode(&config, 5).unwrap());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let roster = vec![AgentSpec::new(0, Kind::R)];
        assert!(run_episode(&EpisodeConfig::new(4, roster.clone(), 5), 0).is_err());
        assert!(run_episode(&EpisodeConfig::new(10, vec![], 5), 0).is_err());
        assert!(run_episode(&EpisodeConfig::new(10, roster.clone(), 0), 0).is_err());
        let dup = vec![AgentSpec::new(0, Kind::R), AgentSpec::new(0, Kind::O)];
        assert!(run_episode(&EpisodeConfig::new(10, dup, 5), 0).is_err());
        assert!(evaluate(&EpisodeConfig::new(10, roster, 5), 0, 1).is_err());
    }

    #[test]
    fn single_episode_has_zero_spread() {
        let config = EpisodeConfig::new(10, EpisodeConfig::roster_from_counts(&[(Kind::SL, 3)]), 10);
        let score = evaluate(&config, 1, 3).unwrap();
        let log = run_episode(&config, seed::episode_seed(3, 0)).unwrap();
        assert_eq!(score.mean, group_score(&log));
        assert_eq!(score.std_dev, 0.0);
    }

    #[test]
    fn more_episodes_keep_the_prefix() {
        let config = EpisodeConfig::new(
            10,
            EpisodeConfig::roster_from_counts(&[(Kind::TL, 2), (Kind::R, 2)]),
            10,
        );
        let short = evaluate(&config, 8, 21).unwrap();
        let long = evaluate(&config, 16, 21).unwrap();
        assert_eq!(short.scores()[..], long.scores()[..8]);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let config = EpisodeConfig::new(
            10,
            EpisodeConfig::roster_from_counts(&[(Kind::SL, 4), (Kind::O, 1)]),
            10,
        );
        let a = evaluate_with(&config, 12, 4, Execution::Sequential).unwrap();
        let b = evaluate_with(&config, 12, 4, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn baseline_examples() {
        let homo = BTreeMap::from([(Kind::SL, 0.4), (Kind::TL, 0.6)]);
        let b = weighted_average_baseline(&homo, &[(Kind::SL, 19), (Kind::TL, 1)]).unwrap();
        assert!((b - 0.41).abs() < 1e-12);
        assert_eq!(weighted_average_baseline(&homo, &[(Kind::TL, 20)]).unwrap(), 0.6);
        let half = weighted_average_baseline(&homo, &[(Kind::SL, 10), (Kind::TL, 10)]).unwrap();
        let brute: f64 = (0..20).map(|i| if i < 10 { 0.4 } else { 0.6 }).sum::<f64>() / 20.0;
        assert!((half - brute).abs() < 1e-12);
        assert!((half - 0.5).abs() < 1e-12);
        assert!(matches!(
            weighted_average_baseline(&homo, &[(Kind::O, 1)]),
            Err(Error::MissingKind(_))
        ));
    }
}

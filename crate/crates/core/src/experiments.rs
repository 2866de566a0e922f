//! Parameter sweeps and homogeneous/heterogeneous comparisons.
//!
//! Every point of a sweep is evaluated with the same master seed and the
//! same movement patterns, so episode `k` of one point and episode `k` of
//! another start from the same object placement and the same agent spawns
//! for shared agent ids. Differences between points are therefore paired.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{
    evaluate, weighted_average_baseline, EpisodeConfig, GroupScore, PatternSource, DEFAULT_EPISODES,
    DEFAULT_ITERATIONS, DEFAULT_SIDE,
};
use crate::grid::{entropy_bits, MovementPattern};
use crate::notation::GroupNotation;
use crate::policy::Kind;
use crate::stats::{self, Difference};

/// Default sweep grids.
pub const DEFAULT_SIDES: [usize; 5] = [10, 15, 20, 25, 30];
pub const DEFAULT_SIZES: [usize; 6] = [10, 20, 30, 40, 50, 60];
pub const DEFAULT_ITERATION_COUNTS: [u32; 6] = [10, 20, 50, 100, 200, 500];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Composition,
    GroupSize,
    EnvironmentComplexity,
    EvaluationTime,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Composition => "composition",
            Axis::GroupSize => "size",
            Axis::EnvironmentComplexity => "complexity",
            Axis::EvaluationTime => "time",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "composition" => Ok(Axis::Composition),
            "size" | "group-size" => Ok(Axis::GroupSize),
            "complexity" | "environment" | "environment-complexity" => Ok(Axis::EnvironmentComplexity),
            "time" | "iterations" | "evaluation-time" => Ok(Axis::EvaluationTime),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// Parameters shared by every point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub side: usize,
    pub iterations: u32,
    pub episodes: usize,
    pub master_seed: u64,
    pub patterns: PatternSource,
    pub talking_range: Option<usize>,
    pub random_includes_stay: bool,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            side: DEFAULT_SIDE,
            iterations: DEFAULT_ITERATIONS,
            episodes: DEFAULT_EPISODES,
            master_seed: 0,
            patterns: PatternSource::default(),
            talking_range: None,
            random_includes_stay: false,
        }
    }
}

impl Protocol {
    pub fn config(&self, group: &GroupNotation) -> EpisodeConfig {
        let mut c = EpisodeConfig::new(self.side, group.roster(), self.iterations);
        c.patterns = self.patterns.clone();
        c.talking_range = self.talking_range;
        c.random_includes_stay = self.random_includes_stay;
        c
    }
}

/// Heterogeneous score against the composition-weighted homogeneous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub value: f64,
    /// Hetero minus baseline, paired by episode.
    pub difference: Difference,
    /// Per kind: subgroup mean inside the heterogeneous group minus the
    /// kind's homogeneous score, paired by episode.
    pub by_kind: Vec<KindComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindComparison {
    pub kind: Kind,
    pub hetero_mean: f64,
    pub homo_mean: f64,
    pub improvement: Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub group: GroupNotation,
    pub axis_value: f64,
    pub entropy_bits: f64,
    pub complexity_bits: f64,
    pub pattern_digest: String,
    pub score: GroupScore,
    pub baseline: Option<Baseline>,
}

impl SweepPoint {
    pub fn side(&self) -> usize {
        self.score.config.side
    }

    pub fn iterations(&self) -> u32 {
        self.score.config.iterations
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub episodes_per_point: usize,
    pub master_seed: u64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn axis_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.axis_value).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.score.mean).collect()
    }

    /// Spearman correlation of mean score against the axis value.
    pub fn spearman(&self) -> f64 {
        stats::spearman(&self.axis_values(), &self.means())
    }

    /// Paired difference `point[a] - point[b]` over episodes.
    pub fn difference(&self, a: usize, b: usize) -> Difference {
        Difference::paired(&self.points[a].score.scores(), &self.points[b].score.scores())
    }
}

/// Both patterns, concatenated, compressed: an estimate of the task's
/// Kolmogorov complexity in bits.
pub fn pattern_complexity_bits(patterns: &PatternSource) -> Result<f64> {
    let (good, evil) = patterns.build()?;
    let both: Vec<_> = good.actions().iter().chain(evil.actions()).copied().collect();
    Ok(crate::grid::complexity_bits(&MovementPattern::new(both)?))
}

/// Digest identifying the pair of patterns.
pub fn pattern_digest(patterns: &PatternSource) -> Result<String> {
    let (good, evil) = patterns.build()?;
    Ok(format!("{}:{}", &good.digest()[..16], &evil.digest()[..16]))
}

fn point(protocol: &Protocol, group: &GroupNotation, axis_value: f64) -> Result<SweepPoint> {
    let config = protocol.config(group);
    let score = evaluate(&config, protocol.episodes, protocol.master_seed)?;
    Ok(SweepPoint {
        group: group.clone(),
        axis_value,
        entropy_bits: entropy_bits(protocol.side),
        complexity_bits: pattern_complexity_bits(&protocol.patterns)?,
        pattern_digest: pattern_digest(&protocol.patterns)?,
        score,
        baseline: None,
    })
}

fn strictly_increasing<T: PartialOrd + Copy>(values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one point".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sweep points must be strictly increasing".into()));
    }
    Ok(())
}

/// One point per group, all of the same size, under one protocol.
pub fn sweep_composition(groups: &[GroupNotation], protocol: &Protocol) -> Result<SweepResult> {
    let expected = groups
        .first()
        .ok_or_else(|| Error::Config("composition sweep needs at least one group".into()))?
        .total();
    for g in groups {
        if g.total() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: g.total(),
            });
        }
    }
    let points = groups
        .iter()
        .enumerate()
        .map(|(i, g)| point(protocol, g, i as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(result(Axis::Composition, protocol, points))
}

/// Scales `ratio` (for example `SL9&TL1`) to a group of `size` agents.
pub fn scale_group(ratio: &GroupNotation, size: usize) -> Result<GroupNotation> {
    let unit = ratio.total();
    if size == 0 || !size.is_multiple_of(unit) {
        return Err(Error::RatioInfeasible {
            ratio: ratio.to_string(),
            size,
        });
    }
    let factor = size / unit;
    GroupNotation::new(ratio.terms().iter().map(|&(k, c)| (k, c * factor)).collect())
}

/// Group sizes at a fixed kind ratio.
pub fn sweep_group_size(ratio: &GroupNotation, sizes: &[usize], protocol: &Protocol) -> Result<SweepResult> {
    strictly_increasing(sizes)?;
    let groups = sizes
        .iter()
        .map(|&s| scale_group(ratio, s))
        .collect::<Result<Vec<_>>>()?;
    let points = groups
        .iter()
        .zip(sizes)
        .map(|(g, &s)| point(protocol, g, s as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(result(Axis::GroupSize, protocol, points))
}

/// Grid sides, which set the search-space entropy.
pub fn sweep_environment(group: &GroupNotation, sides: &[usize], protocol: &Protocol) -> Result<SweepResult> {
    strictly_increasing(sides)?;
    let points = sides
        .iter()
        .map(|&side| {
            let p = Protocol {
                side,
                ..protocol.clone()
            };
            point(&p, group, side as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(result(Axis::EnvironmentComplexity, protocol, points))
}

/// Iterations per episode.
pub fn sweep_time(group: &GroupNotation, iteration_counts: &[u32], protocol: &Protocol) -> Result<SweepResult> {
    strictly_increasing(iteration_counts)?;
    let points = iteration_counts
        .iter()
        .map(|&iterations| {
            let p = Protocol {
                iterations,
                ..protocol.clone()
            };
            point(&p, group, f64::from(iterations))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(result(Axis::EvaluationTime, protocol, points))
}

/// Each group against the weighted mean of same-size homogeneous groups of
/// its kinds. Homogeneous groups are evaluated once per (kind, size).
pub fn compare_homo_hetero(groups: &[GroupNotation], protocol: &Protocol) -> Result<SweepResult> {
    let mut homo: BTreeMap<(Kind, usize), GroupScore> = BTreeMap::new();
    let mut points = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        let n = g.total();
        for &(kind, _) in g.terms() {
            if let Entry::Vacant(slot) = homo.entry((kind, n)) {
                let single = GroupNotation::new(vec![(kind, n)])?;
                slot.insert(evaluate(
                    &protocol.config(&single),
                    protocol.episodes,
                    protocol.master_seed,
                )?);
            }
        }
        let mut p = point(protocol, g, i as f64)?;
        let homo_of = |kind: Kind| -> Result<&GroupScore> {
            homo.get(&(kind, n)).ok_or_else(|| Error::MissingKind(kind.to_string()))
        };
        let means: BTreeMap<Kind, f64> = g
            .terms()
            .iter()
            .map(|&(k, _)| Ok((k, homo_of(k)?.mean)))
            .collect::<Result<_>>()?;
        let value = weighted_average_baseline(&means, g.terms())?;
        let per_episode: Vec<f64> = (0..protocol.episodes)
            .map(|e| {
                let scores: BTreeMap<Kind, f64> = g
                    .terms()
                    .iter()
                    .map(|&(k, _)| Ok((k, homo_of(k)?.episodes[e].score)))
                    .collect::<Result<_>>()?;
                weighted_average_baseline(&scores, g.terms())
            })
            .collect::<Result<_>>()?;
        let by_kind = g
            .terms()
            .iter()
            .map(|&(kind, _)| {
                let hetero = p.score.kind_scores(kind).expect("kind present in group");
                let homo_scores = homo_of(kind)?.scores();
                Ok(KindComparison {
                    kind,
                    hetero_mean: stats::mean(&hetero),
                    homo_mean: stats::mean(&homo_scores),
                    improvement: Difference::paired(&hetero, &homo_scores),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        p.baseline = Some(Baseline {
            value,
            difference: Difference::paired(&p.score.scores(), &per_episode),
            by_kind,
        });
        points.push(p);
    }
    Ok(result(Axis::Composition, protocol, points))
}

fn result(axis: Axis, protocol: &Protocol, points: Vec<SweepPoint>) -> SweepResult {
    SweepResult {
        axis,
        episodes_per_point: protocol.episodes,
        master_seed: protocol.master_seed,
        points,
    }
}

/// Declarative sweep, as read from a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Group notations. Composition sweeps and comparisons use all of them;
    /// the other axes use the first (for size sweeps, as a ratio).
    pub groups: Vec<String>,
    /// Axis values; defaults to the standard grid for the axis.
    #[serde(default)]
    pub points: Vec<u64>,
    #[serde(default)]
    pub compare: bool,
    #[serde(flatten)]
    pub protocol: Protocol,
}

impl SweepSpec {
    pub fn run(&self) -> Result<SweepResult> {
        let groups = self
            .groups
            .iter()
            .map(|g| GroupNotation::parse(g))
            .collect::<Result<Vec<_>>>()?;
        let first = groups
            .first()
            .ok_or_else(|| Error::Config("sweep needs at least one group".into()))?;
        let protocol = &self.protocol;
        match self.axis {
            Axis::Composition if self.compare => compare_homo_hetero(&groups, protocol),
            Axis::Composition => sweep_composition(&groups, protocol),
            Axis::GroupSize => {
                let sizes: Vec<usize> = if self.points.is_empty() {
                    DEFAULT_SIZES.to_vec()
                } else {
                    self.points.iter().map(|&v| v as usize).collect()
                };
                sweep_group_size(first, &sizes, protocol)
            }
            Axis::EnvironmentComplexity => {
                let sides: Vec<usize> = if self.points.is_empty() {
                    DEFAULT_SIDES.to_vec()
                } else {
                    self.points.iter().map(|&v| v as usize).collect()
                };
                sweep_environment(first, &sides, protocol)
            }
            Axis::EvaluationTime => {
                let counts: Vec<u32> = if self.points.is_empty() {
                    DEFAULT_ITERATION_COUNTS.to_vec()
                } else {
                    self.points
                        .iter()
                        .map(|&v| u32::try_from(v).map_err(|_| Error::Config(format!("iteration count {v} too large"))))
                        .collect::<Result<_>>()?
                };
                sweep_time(first, &counts, protocol)
            }
        }
    }
}

//! Command-line front end.
//!
//! Every flag has a same-named key in the optional TOML file passed with
//! `--config`; flags given on the command line win over file values.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{PatternSource, DEFAULT_PATTERN_LENGTH, DEFAULT_PATTERN_SEED};
use crate::experiments::{pattern_complexity_bits, Axis, Protocol, SweepResult, SweepSpec};
use crate::grid::{entropy_bits, validate_side};
use crate::notation::GroupNotation;
use crate::report::{self, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "groupiq",
    version,
    about = "Score heterogeneous agent groups on a toroidal grid world"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one group.
    Run(Settings),
    /// Sweep one axis: size, complexity, time or composition.
    Sweep(Settings),
    /// Compare heterogeneous groups with the weighted homogeneous baseline.
    Compare(Settings),
    /// Print the entropy and pattern complexity of a configuration.
    Complexity(Settings),
}

/// Flags shared by all subcommands; also the schema of `--config` files.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Group notation such as SL9&O1; repeat for several groups.
    #[arg(long = "group", value_name = "NOTATION")]
    #[serde(default)]
    pub group: Vec<String>,
    /// Sweep axis: size, complexity, time or composition.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated axis values; defaults to the standard grid.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub points: Vec<u64>,
    /// Grid side m.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Iterations per episode.
    #[arg(long)]
    pub iterations: Option<u32>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Master seed for placements and agent randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Length of the generated Good and Evil movement patterns.
    #[arg(long)]
    pub pattern_length: Option<usize>,
    /// Seed of the generated movement patterns.
    #[arg(long)]
    pub pattern_seed: Option<u64>,
    /// Chebyshev range for talking; unlimited when absent.
    #[arg(long)]
    pub talking_range: Option<usize>,
    /// Let random agents stay in place.
    #[arg(long)]
    pub random_stay: Option<bool>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write an SVG chart next to the CSV (default true).
    #[arg(long)]
    pub chart: Option<bool>,
    /// TOML file with any of the keys above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Settings {
    /// Fills unset fields from `base`.
    pub fn or(self, base: Settings) -> Settings {
        Settings {
            group: if self.group.is_empty() { base.group } else { self.group },
            axis: self.axis.or(base.axis),
            points: if self.points.is_empty() {
                base.points
            } else {
                self.points
            },
            grid: self.grid.or(base.grid),
            iterations: self.iterations.or(base.iterations),
            episodes: self.episodes.or(base.episodes),
            seed: self.seed.or(base.seed),
            pattern_length: self.pattern_length.or(base.pattern_length),
            pattern_seed: self.pattern_seed.or(base.pattern_seed),
            talking_range: self.talking_range.or(base.talking_range),
            random_stay: self.random_stay.or(base.random_stay),
            out: self.out.or(base.out),
            chart: self.chart.or(base.chart),
            config: self.config,
        }
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn resolved(self) -> Result<Settings> {
        match &self.config {
            Some(path) => {
                let file = Settings::load(path)?;
                Ok(self.or(file))
            }
            None => Ok(self),
        }
    }

    pub fn protocol(&self) -> Protocol {
        let d = Protocol::default();
        Protocol {
            side: self.grid.unwrap_or(d.side),
            iterations: self.iterations.unwrap_or(d.iterations),
            episodes: self.episodes.unwrap_or(d.episodes),
            master_seed: self.seed.unwrap_or(d.master_seed),
            patterns: PatternSource::Generated {
                length: self.pattern_length.unwrap_or(DEFAULT_PATTERN_LENGTH),
                seed: self.pattern_seed.unwrap_or(DEFAULT_PATTERN_SEED),
            },
            talking_range: self.talking_range,
            random_includes_stay: self.random_stay.unwrap_or(d.random_includes_stay),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn groups(&self) -> Result<Vec<GroupNotation>> {
        if self.group.is_empty() {
            return Err(Error::Config("at least one --group is required".into()));
        }
        self.group.iter().map(|g| GroupNotation::parse(g)).collect()
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Io(_) => EXIT_IO,
                Error::Csv(ref c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run(s) => {
            let s = s.resolved()?;
            let groups = s.groups()?;
            if groups.len() != 1 {
                return Err(Error::Config("run takes exactly one --group".into()));
            }
            let spec = SweepSpec {
                axis: Axis::Composition,
                groups: s.group.clone(),
                points: Vec::new(),
                compare: false,
                protocol: s.protocol(),
            };
            let result = spec.run()?;
            let p = &result.points[0];
            writeln!(
                out,
                "{}: mean {} std {} over {} episodes (m={}, iterations={})",
                p.group,
                report::sig6(p.score.mean),
                report::sig6(p.score.std_dev),
                p.score.episode_count,
                p.side(),
                p.iterations()
            )?;
            emit(out, &s, "run", &spec, &result)
        }
        Command::Sweep(s) => {
            let s = s.resolved()?;
            let axis: Axis = s
                .axis
                .as_deref()
                .ok_or_else(|| Error::Config("sweep needs --axis".into()))?
                .parse()?;
            s.groups()?;
            let spec = SweepSpec {
                axis,
                groups: s.group.clone(),
                points: s.points.clone(),
                compare: false,
                protocol: s.protocol(),
            };
            let result = spec.run()?;
            for p in &result.points {
                writeln!(
                    out,
                    "{} = {}\t{}\tmean {}\tstd {}",
                    axis,
                    report::sig6(p.axis_value),
                    p.group,
                    report::sig6(p.score.mean),
                    report::sig6(p.score.std_dev)
                )?;
            }
            if result.points.len() > 1 {
                writeln!(out, "spearman rho = {}", report::sig6(result.spearman()))?;
            }
            emit(out, &s, &format!("sweep-{axis}"), &spec, &result)
        }
        Command::Compare(s) => {
            let s = s.resolved()?;
            s.groups()?;
            let spec = SweepSpec {
                axis: Axis::Composition,
                groups: s.group.clone(),
                points: Vec::new(),
                compare: true,
                protocol: s.protocol(),
            };
            let result = spec.run()?;
            for p in &result.points {
                let b = p.baseline.as_ref().expect("comparison points carry a baseline");
                let (lo, hi) = b.difference.interval95();
                writeln!(
                    out,
                    "{}\tmean {}\tbaseline {}\tgain {} (95% CI {} .. {})",
                    p.group,
                    report::sig6(p.score.mean),
                    report::sig6(b.value),
                    report::sig6(b.difference.estimate),
                    report::sig6(lo),
                    report::sig6(hi)
                )?;
            }
            emit(out, &s, "compare", &spec, &result)
        }
        Command::Complexity(s) => {
            let s = s.resolved()?;
            let protocol = s.protocol();
            validate_side(protocol.side)?;
            writeln!(out, "grid {0}x{0}", protocol.side)?;
            writeln!(out, "entropy H = {:.2} bits", entropy_bits(protocol.side))?;
            writeln!(
                out,
                "pattern complexity K ~ {} bits (compressed Good and Evil patterns)",
                pattern_complexity_bits(&protocol.patterns)?
            )?;
            Ok(())
        }
    }
}

fn emit(out: &mut dyn Write, s: &Settings, stem: &str, spec: &SweepSpec, result: &SweepResult) -> Result<()> {
    let dir = s.out_dir();
    fs::create_dir_all(&dir).map_err(|e| with_path(e, &dir))?;
    let mut manifest = RunManifest::new(stem, spec, spec.protocol.master_seed)?;
    let csv = dir.join(format!("{stem}.csv"));
    report::write_csv(result, &csv).map_err(|e| match e {
        Error::Io(io) => with_path(io, &csv),
        other => other,
    })?;
    manifest.record(&csv)?;
    if s.chart.unwrap_or(true) {
        let svg = dir.join(format!("{stem}.svg"));
        report::emit_chart(result, &svg)?;
        manifest.record(&svg)?;
    }
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    manifest.write(&manifest_path)?;
    for f in &manifest.outputs {
        writeln!(out, "wrote {}", f.path.display())?;
    }
    writeln!(out, "wrote {}", manifest_path.display())?;
    Ok(())
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let file = Settings {
            grid: Some(15),
            episodes: Some(9),
            group: vec!["SL2".into()],
            ..Settings::default()
        };
        let flags = Settings {
            episodes: Some(3),
            ..Settings::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.grid, Some(15));
        assert_eq!(merged.episodes, Some(3));
        assert_eq!(merged.group, vec!["SL2".to_string()]);
    }

    #[test]
    fn config_keys_mirror_flags() {
        let s: Settings = toml::from_str(
            "group = [\"SL9&O1\"]\ngrid = 20\niterations = 20\nepisodes = 5\nseed = 7\npattern-length = 32\nchart = false\n",
        )
        .unwrap();
        let p = s.protocol();
        assert_eq!((p.side, p.iterations, p.episodes, p.master_seed), (20, 20, 5, 7));
        assert!(matches!(p.patterns, PatternSource::Generated { length: 32, .. }));
        assert!(toml::from_str::<Settings>("gird = 3").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_cli(["groupiq", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_cli(["groupiq", "run", "--grid", "x"], &mut o, &mut e), EXIT_USAGE);
    }
}

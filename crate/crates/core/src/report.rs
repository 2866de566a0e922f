//! Result files: CSV tables, SVG trend charts and run manifests.
//!
//! CSV columns, in order:
//! `axis, axis_value, group, m, n, iterations, episodes, entropy_bits,
//! complexity_bits, mean, std_dev, baseline, seed`. Floats carry six
//! significant digits; `baseline` is empty unless the point was compared
//! against homogeneous groups. Nothing time-dependent goes into the CSV;
//! the only timestamp lives in the manifest, outside its digest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{Axis, SweepResult};

pub const CSV_COLUMNS: [&str; 13] = [
    "axis",
    "axis_value",
    "group",
    "m",
    "n",
    "iterations",
    "episodes",
    "entropy_bits",
    "complexity_bits",
    "mean",
    "std_dev",
    "baseline",
    "seed",
];

/// One CSV line, numeric fields as read back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub axis: String,
    pub axis_value: f64,
    pub group: String,
    pub m: usize,
    pub n: usize,
    pub iterations: u32,
    pub episodes: usize,
    pub entropy_bits: f64,
    pub complexity_bits: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub baseline: Option<f64>,
    pub seed: u64,
}

/// Renders `x` with six significant digits in its shortest form.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

pub fn rows(result: &SweepResult) -> Vec<Row> {
    result
        .points
        .iter()
        .map(|p| Row {
            axis: result.axis.name().to_string(),
            axis_value: p.axis_value,
            group: p.group.to_string(),
            m: p.side(),
            n: p.group.total(),
            iterations: p.iterations(),
            episodes: p.score.episode_count,
            entropy_bits: p.entropy_bits,
            complexity_bits: p.complexity_bits,
            mean: p.score.mean,
            std_dev: p.score.std_dev,
            baseline: p.baseline.as_ref().map(|b| b.value),
            seed: result.master_seed,
        })
        .collect()
}

pub fn csv_string(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in rows(result) {
        w.write_record([
            r.axis,
            sig6(r.axis_value),
            r.group,
            r.m.to_string(),
            r.n.to_string(),
            r.iterations.to_string(),
            r.episodes.to_string(),
            sig6(r.entropy_bits),
            sig6(r.complexity_bits),
            sig6(r.mean),
            sig6(r.std_dev),
            r.baseline.map(sig6).unwrap_or_default(),
            r.seed.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, csv_string(result)?)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<Row>, _>>()?;
    Ok(rows)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Provenance record written next to every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// sha256 of the canonical JSON of every parameter that affects results.
    pub config_digest: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputFile>,
    /// Seconds since the Unix epoch; not covered by any digest.
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize, master_seed: u64) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?;
        // serde_json maps keep keys sorted, so this rendering is canonical.
        let canonical = serde_json::to_vec(&config).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_digest: sha256_hex(&canonical),
            master_seed,
            config,
            outputs: Vec::new(),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        })
    }

    pub fn record(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(OutputFile {
            path: path.to_path_buf(),
            sha256: file_digest(path)?,
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(path, json + "\n")?;
        Ok(())
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

struct Frame {
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo < 1e-9 {
            hi = lo + 1.0;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            y_min: if lo < 0.0 { lo - pad } else { 0.0 },
            y_max: hi + pad,
        }
    }

    fn y(&self, v: f64) -> f64 {
        let plot = HEIGHT - TOP - BOTTOM;
        TOP + plot * (self.y_max - v) / (self.y_max - self.y_min)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(svg: &mut String, frame: &Frame, title: &str, x_label: &str) {
    let bottom = HEIGHT - BOTTOM;
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{bottom}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{bottom}" x2="{}" y2="{bottom}" stroke="black"/>"#,
        WIDTH - RIGHT
    );
    for i in 0..=5 {
        let v = frame.y_min + (frame.y_max - frame.y_min) * f64::from(i) / 5.0;
        let y = frame.y(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end" font-size="11">{:.3}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0,
            v
        );
    }
    if frame.y_min < 0.0 {
        let y = frame.y(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
            WIDTH - RIGHT
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">mean reward per agent and iteration</text>"#,
        (TOP + bottom) / 2.0,
        (TOP + bottom) / 2.0
    );
}

fn error_bar(svg: &mut String, frame: &Frame, x: f64, mean: f64, sd: f64) {
    let (y0, y1) = (frame.y(mean - sd), frame.y(mean + sd));
    let _ = writeln!(
        svg,
        r#"<path d="M{x:.1} {y0:.1}V{y1:.1}M{:.1} {y0:.1}H{:.1}M{:.1} {y1:.1}H{:.1}" stroke="black" fill="none"/>"#,
        x - 4.0,
        x + 4.0,
        x - 4.0,
        x + 4.0
    );
}

/// Renders a sweep as a standalone SVG document: bars for composition
/// sweeps (paired with the homogeneous baseline when present), lines for
/// the other axes. Error bars span one standard deviation.
pub fn chart_svg(result: &SweepResult) -> Result<String> {
    if result.points.is_empty() {
        return Err(Error::Config("cannot chart an empty result".into()));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let extent = result.points.iter().flat_map(|p| {
        let sd = p.score.std_dev;
        let b = p.baseline.as_ref().map(|b| b.value).unwrap_or(p.score.mean);
        [p.score.mean - sd, p.score.mean + sd, b]
    });
    let frame = Frame::new(extent);
    let plot_w = WIDTH - LEFT - RIGHT;
    let bottom = HEIGHT - BOTTOM;
    match result.axis {
        Axis::Composition => {
            axes(&mut svg, &frame, "Group score by composition", "group");
            let slot = plot_w / result.points.len() as f64;
            let paired = result.points.iter().any(|p| p.baseline.is_some());
            let bar_w = if paired { slot * 0.35 } else { slot * 0.6 };
            let zero = frame.y(0.0);
            for (i, p) in result.points.iter().enumerate() {
                let centre = LEFT + slot * (i as f64 + 0.5);
                let x = if paired { centre - bar_w } else { centre - bar_w / 2.0 };
                let y = frame.y(p.score.mean);
                let _ = writeln!(
                    svg,
                    r#"<rect class="score" x="{x:.1}" y="{:.1}" width="{bar_w:.1}" height="{:.1}" fill="{}"/>"#,
                    y.min(zero),
                    (y - zero).abs(),
                    PALETTE[0]
                );
                error_bar(&mut svg, &frame, x + bar_w / 2.0, p.score.mean, p.score.std_dev);
                if let Some(b) = &p.baseline {
                    let yb = frame.y(b.value);
                    let _ = writeln!(
                        svg,
                        r#"<rect class="baseline" x="{centre:.1}" y="{:.1}" width="{bar_w:.1}" height="{:.1}" fill="{}"/>"#,
                        yb.min(zero),
                        (yb - zero).abs(),
                        PALETTE[1]
                    );
                }
                let _ = writeln!(
                    svg,
                    r#"<text x="{centre:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
                    bottom + 16.0,
                    escape(&p.group.to_string())
                );
            }
            if paired {
                legend(
                    &mut svg,
                    &[("heterogeneous", PALETTE[0]), ("weighted homogeneous", PALETTE[1])],
                );
            }
        }
        axis => {
            let label = match axis {
                Axis::GroupSize => "number of agents",
                Axis::EnvironmentComplexity => "search-space entropy H (bits)",
                _ => "iterations",
            };
            let group = &result.points[0].group;
            let title = format!("{group}: score vs {}", axis.name());
            axes(&mut svg, &frame, &title, label);
            let xs: Vec<f64> = result
                .points
                .iter()
                .map(|p| match axis {
                    Axis::EnvironmentComplexity => p.entropy_bits,
                    _ => p.axis_value,
                })
                .collect();
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let sx = |x: f64| {
                if hi > lo {
                    LEFT + 20.0 + (plot_w - 40.0) * (x - lo) / (hi - lo)
                } else {
                    LEFT + plot_w / 2.0
                }
            };
            let mut d = String::new();
            for (i, (p, &x)) in result.points.iter().zip(&xs).enumerate() {
                let _ = write!(
                    d,
                    "{}{:.1} {:.1}",
                    if i == 0 { "M" } else { "L" },
                    sx(x),
                    frame.y(p.score.mean)
                );
            }
            let _ = writeln!(
                svg,
                r#"<path class="score" d="{d}" stroke="{}" stroke-width="2" fill="none"/>"#,
                PALETTE[0]
            );
            for (p, &x) in result.points.iter().zip(&xs) {
                let cx = sx(x);
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{cx:.1}" cy="{:.1}" r="3" fill="{}"/>"#,
                    frame.y(p.score.mean),
                    PALETTE[0]
                );
                error_bar(&mut svg, &frame, cx, p.score.mean, p.score.std_dev);
                let tick = if axis == Axis::EnvironmentComplexity {
                    format!("{:.1}", p.entropy_bits)
                } else {
                    sig6(p.axis_value)
                };
                let _ = writeln!(
                    svg,
                    r#"<text class="tick" x="{cx:.1}" y="{:.1}" text-anchor="middle" font-size="11">{tick}</text>"#,
                    bottom + 16.0
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn legend(svg: &mut String, entries: &[(&str, &str)]) {
    for (i, (label, colour)) in entries.iter().enumerate() {
        let x = WIDTH - RIGHT - 180.0;
        let y = TOP + 6.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{y}" width="12" height="12" fill="{colour}"/><text x="{}" y="{}" font-size="12">{label}</text>"#,
            x + 18.0,
            y + 10.0
        );
    }
}

pub fn emit_chart(result: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, chart_svg(result)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{compare_homo_hetero, sweep_composition, sweep_environment, Protocol};
    use crate::notation::GroupNotation;

    fn protocol(episodes: usize) -> Protocol {
        Protocol {
            episodes,
            master_seed: 11,
            ..Protocol::default()
        }
    }

    fn single() -> SweepResult {
        sweep_composition(&[GroupNotation::parse("SL9&O1").unwrap()], &protocol(5)).unwrap()
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(17.287_712_379), "17.2877");
        assert_eq!(sig6(-0.000_123_456_78), "-0.000123457");
        assert_eq!(sig6(20.0), "20");
        assert_eq!(sig6(1_234_567.0), "1234570");
    }

    #[test]
    fn single_point_csv_has_header_and_one_row() {
        let text = csv_string(&single()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[1].starts_with("composition,0,SL9&O1,20,10,20,5,17.2877,"));
        assert!(lines[1].ends_with(",,11"));
    }

    #[test]
    fn csv_round_trip_to_printed_precision() {
        let result = compare_homo_hetero(&[GroupNotation::parse("SL1&TL1").unwrap()], &protocol(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&result, &path).unwrap();
        let back = read_csv(&path).unwrap();
        let orig = rows(&result);
        assert_eq!(back.len(), orig.len());
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-6 * a.abs().max(b.abs()).max(1e-300);
        for (b, o) in back.iter().zip(&orig) {
            assert_eq!(
                (&b.axis, &b.group, b.m, b.n, b.iterations, b.episodes, b.seed),
                (&o.axis, &o.group, o.m, o.n, o.iterations, o.episodes, o.seed)
            );
            for (x, y) in [
                (b.axis_value, o.axis_value),
                (b.entropy_bits, o.entropy_bits),
                (b.complexity_bits, o.complexity_bits),
                (b.mean, o.mean),
                (b.std_dev, o.std_dev),
                (b.baseline.unwrap(), o.baseline.unwrap()),
            ] {
                assert!(close(x, y), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn single_point_chart_is_one_bar() {
        let svg = chart_svg(&single()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(r#"class="score""#).count(), 1);
        assert_eq!(svg.matches("<path d=").count(), 1);
    }

    #[test]
    fn compare_chart_pairs_bars() {
        let groups = ["SL1&TL1", "SL1&O1"].map(|g| GroupNotation::parse(g).unwrap());
        let svg = chart_svg(&compare_homo_hetero(&groups, &protocol(3)).unwrap()).unwrap();
        assert_eq!(svg.matches(r#"class="score""#).count(), 2);
        assert_eq!(svg.matches(r#"class="baseline""#).count(), 2);
    }

    #[test]
    fn environment_chart_uses_entropy_ticks() {
        let g = GroupNotation::parse("SL2").unwrap();
        let r = sweep_environment(&g, &[10, 20, 30], &protocol(2)).unwrap();
        let svg = chart_svg(&r).unwrap();
        assert!(svg.contains("entropy H (bits)"));
        for tick in ["13.3", "17.3", "19.6"] {
            assert!(svg.contains(&format!(">{tick}</text>")), "missing tick {tick}");
        }
    }

    #[test]
    fn manifest_digest_ignores_timestamp() {
        let a = RunManifest::new("run", &protocol(3), 3).unwrap();
        let mut b = RunManifest::new("run", &protocol(3), 3).unwrap();
        b.created_unix += 100;
        assert_eq!(a.config_digest, b.config_digest);
        let c = RunManifest::new("run", &protocol(4), 3).unwrap();
        assert_ne!(a.config_digest, c.config_digest);
    }
}

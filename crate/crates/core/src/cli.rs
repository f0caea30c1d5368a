//! Command-line front end: builds a topology from a file or a preset, runs
//! one experiment and renders the result as CSV or JSON.
//!
//! Output is a pure function of the configuration: sweeps run in parallel
//! but rows are emitted in configuration order, and every random choice is
//! drawn from the seed.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::binning::{build_binning, round_trip_failures, verify_binning_property, BinningError};
use crate::protocol_sim::{
    default_one_hop, interference_accounting, payload_demo, run_distance_regulated, PayloadError, SimError,
    SimulationTrace,
};
use crate::rate_analysis::{
    allcast_rate_bound, max_achievable_rate, theorem1_conditions, RateError, RateReport, BOUND_NOTE, DEFAULT_TOLERANCE,
};
use crate::topology::{
    distance_ordering_check, parse_topology_with, ring_one_hop, GainFunction, Topology, TopologyError,
};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: &str = "1.0";

/// Fraction of the largest admissible rate used by `--rate auto` when
/// simulating.
pub const AUTO_RATE_FRACTION: f64 = 0.999;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Binning(#[from] BinningError),
    #[error(transparent)]
    Payload(#[from] PayloadError),
}

impl CliError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
            Self::Topology(TopologyError::Parse { .. }) => "topology_parse",
            Self::Topology(TopologyError::NotLineOrdered)
            | Self::Rate(RateError::Topology(TopologyError::NotLineOrdered)) => "not_line_ordered",
            Self::Topology(TopologyError::NotRegular(_))
            | Self::Rate(RateError::Topology(TopologyError::NotRegular(_))) => "not_regular",
            Self::Topology(_) | Self::Rate(RateError::Topology(_)) | Self::Simulation(SimError::Topology(_)) => {
                "invalid_topology"
            }
            Self::Rate(_) => "rate",
            Self::Simulation(_) => "simulation",
            Self::Binning(_) => "binning",
            Self::Payload(_) => "payload",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    RegularLine,
    /// Random gaps drawn from the seed, or `--positions`.
    Line,
    Ring,
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateChoice {
    Auto,
    Fixed(f64),
}

fn parse_rate(s: &str) -> Result<RateChoice, String> {
    if s == "auto" {
        return Ok(RateChoice::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected `auto` or a number, got {s:?}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(RateChoice::Fixed(v))
    } else {
        Err(format!("rate must be finite and nonnegative, got {v}"))
    }
}

fn parse_gain(s: &str) -> Result<GainFunction, String> {
    s.parse().map_err(|e: TopologyError| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct TopologyArgs {
    /// Topology file (`nodes`, then `pos` or `dist` rows).
    #[arg(long, conflicts_with = "preset")]
    pub topology: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Spacing between adjacent nodes (chord length for ring and arc).
    #[arg(long, default_value_t = 1.0)]
    pub d0: f64,
    /// pl:<alpha> | exp:<gamma> | const (power gain d^-alpha, e^-gamma d, 1).
    #[arg(long, default_value = "pl:2", value_parser = parse_gain)]
    pub gain: GainFunction,
    /// Transmit power in watts.
    #[arg(long, default_value_t = 10.0)]
    pub power: f64,
    /// Noise power in watts.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Explicit coordinates for the `line` preset.
    #[arg(long, value_delimiter = ',')]
    pub positions: Option<Vec<f64>>,
    /// Radius of the `arc` preset; defaults to 2 (n-1) d0.
    #[arg(long)]
    pub arc_radius: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Rate benchmark, largest rate meeting the line conditions, and the
    /// per-constraint margins.
    Analyze {
        #[command(flatten)]
        topology: TopologyArgs,
        /// Rate at which to report the conditions; `auto` uses the largest
        /// admissible rate.
        #[arg(long, default_value = "auto", value_parser = parse_rate)]
        rate: RateChoice,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Block-by-block relay simulation with the distance-regulated schedule.
    Simulate {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, default_value = "auto", value_parser = parse_rate)]
        rate: RateChoice,
        #[arg(long, default_value_t = 8)]
        blocks: usize,
        /// Also write the per-block trace here (same format).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Replay the run with integer messages of this alphabet size.
        #[arg(long)]
        payload_size: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Benchmark and largest admissible rate over a grid of node counts and
    /// gains.
    Sweep {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Gains to sweep; defaults to `--gain`.
        #[arg(long, value_delimiter = ';', value_parser = parse_gain)]
        gain_list: Vec<GainFunction>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive check of modular-sum binning over small alphabets.
    BinDemo {
        /// Largest number of binned messages.
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        /// Largest alphabet size.
        #[arg(long, default_value_t = 6)]
        size_max: u64,
        /// Check a single tuple instead, e.g. `3,5`.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Parser)]
#[command(name = "omnirelay", version, about = "Omnidirectional relay analysis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where the network comes from.
#[derive(Debug, Clone)]
pub enum TopologySource {
    File(PathBuf),
    Preset(Preset),
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub source: TopologySource,
    pub n: usize,
    pub d0: f64,
    pub gain: GainFunction,
    pub power: f64,
    pub noise: f64,
    pub positions: Option<Vec<f64>>,
    pub arc_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (topology, output) = match &cli.command {
            Command::Analyze { topology, output, .. }
            | Command::Simulate { topology, output, .. }
            | Command::Sweep { topology, output, .. } => (Some(topology.clone()), output.clone()),
            Command::BinDemo { output, .. } => (None, output.clone()),
        };
        let t = topology.unwrap_or_else(|| TopologyArgs {
            topology: None,
            preset: Some(Preset::RegularLine),
            n: 2,
            d0: 1.0,
            gain: GainFunction::power_law(2.0).expect("valid exponent"),
            power: 1.0,
            noise: 1.0,
            positions: None,
            arc_radius: None,
        });
        let source = match (&t.topology, t.preset) {
            (Some(path), _) => TopologySource::File(path.clone()),
            (None, Some(p)) => TopologySource::Preset(p),
            (None, None) => TopologySource::Preset(Preset::RegularLine),
        };
        if let Command::Sweep { n_list, .. } = &cli.command {
            if n_list.is_empty() {
                return Err(CliError::Config("sweep needs a nonempty --n-list".into()));
            }
            if matches!(source, TopologySource::File(_)) {
                return Err(CliError::Config("sweep works on presets, not topology files".into()));
            }
        }
        if let Command::BinDemo { k_max, size_max, .. } = &cli.command {
            if *k_max == 0 || *size_max == 0 {
                return Err(CliError::Config(
                    "bin-demo needs --k-max and --size-max of at least 1".into(),
                ));
            }
        }
        Ok(Self {
            command: cli.command,
            source,
            n: t.n,
            d0: t.d0,
            gain: t.gain,
            power: t.power,
            noise: t.noise,
            positions: t.positions,
            arc_radius: t.arc_radius,
            out: output.out,
            format: output.format,
            seed: output.seed,
        })
    }

    fn build_topology(&self, n: usize, gain: &GainFunction) -> Result<Topology, CliError> {
        let preset = match &self.source {
            TopologySource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                return Ok(parse_topology_with(&text, (gain.clone(), self.power, self.noise))?);
            }
            TopologySource::Preset(p) => *p,
        };
        let (g, p, z) = (gain.clone(), self.power, self.noise);
        let topology = match preset {
            Preset::RegularLine => Topology::regular_line(n, self.d0, g, p, z)?,
            Preset::Line => {
                let xs = match &self.positions {
                    Some(xs) => xs.clone(),
                    None => {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                        let mut x = 0.0;
                        (0..n)
                            .map(|k| {
                                if k > 0 {
                                    x += self.d0 * rng.random_range(0.5..1.5);
                                }
                                x
                            })
                            .collect()
                    }
                };
                Topology::line(xs, g, p, z)?
            }
            Preset::Ring => Topology::ring(n, self.d0, g, p, z)?.with_one_hop(ring_one_hop(n))?,
            Preset::Arc => {
                let radius = self.arc_radius.unwrap_or(2.0 * (n.max(2) - 1) as f64 * self.d0);
                Topology::arc(n, self.d0, radius, g, p, z)?
            }
        };
        Ok(topology)
    }

    fn topology(&self) -> Result<Topology, CliError> {
        self.build_topology(self.n, &self.gain)
    }
}

fn rate6(v: f64) -> String {
    format!("{v:.6}")
}

fn to_json_text(mut value: Value, command: &str) -> String {
    if let Value::Object(map) = &mut value {
        map.insert("spec_version".into(), json!(SCHEMA_VERSION));
        map.insert("command".into(), json!(command));
    }
    let mut text = serde_json::to_string_pretty(&value).expect("json values serialize");
    text.push('\n');
    text
}

/// Runs the experiment and returns the report text. When the configuration
/// names an output path the report is written there as well.
pub fn run(config: &ExperimentConfig) -> Result<String, CliError> {
    let text = match &config.command {
        Command::Analyze { rate, .. } => analyze(config, *rate)?,
        Command::Simulate {
            rate,
            blocks,
            trace,
            payload_size,
            ..
        } => simulate(config, *rate, *blocks, trace.as_ref(), *payload_size)?,
        Command::Sweep { n_list, gain_list, .. } => sweep(config, n_list, gain_list)?,
        Command::BinDemo {
            k_max, size_max, sizes, ..
        } => bin_demo(config, *k_max, *size_max, sizes.as_deref())?,
    };
    if let Some(path) = &config.out {
        write_file(path, &text)?;
    }
    Ok(text)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn analyze(config: &ExperimentConfig, rate: RateChoice) -> Result<String, CliError> {
    let topo = config.topology()?;
    let best = max_achievable_rate(&topo, DEFAULT_TOLERANCE)?;
    let at = match rate {
        RateChoice::Auto => best.rate,
        RateChoice::Fixed(v) => v,
    };
    let report = theorem1_conditions(&topo, at)?;
    let (binding, margin) = report.binding();
    let hash = topo.content_hash();
    Ok(match config.format {
        Format::Csv => {
            let mut out = String::from(
                "n,topology_hash,rate_bound,max_rate,max_rate_limited_by,rate,verdict,binding_constraint,binding_margin\n",
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                topo.node_count(),
                hash,
                rate6(best.bound),
                rate6(best.rate),
                best.binding,
                rate6(at),
                report.verdict,
                binding,
                rate6(margin)
            );
            out
        }
        Format::Json => to_json_text(
            json!({
                "n": topo.node_count(),
                "topology_hash": hash,
                "rate_bound": rate6(best.bound),
                "rate_bound_note": BOUND_NOTE,
                "max_rate": rate6(best.rate),
                "max_rate_limited_by": best.binding,
                "bisection_steps": best.steps,
                "rate": rate6(at),
                "verdict": report.verdict,
                "binding_constraint": binding,
                "binding_margin": rate6(margin),
                "order": report.order.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "constraints": constraint_rows(&report),
            }),
            "analyze",
        ),
    })
}

fn constraint_rows(report: &RateReport) -> Vec<Value> {
    let mut rows = vec![json!({
        "id": "bound",
        "holds": report.bound_check.holds,
        "margin": rate6(report.bound_check.margin()),
    })];
    rows.extend(report.pairs.iter().map(|p| {
        json!({
            "id": p.constraint,
            "node": p.node + 1,
            "holds": p.holds(),
            "joint_margin": rate6(p.joint.margin()),
            "split_margin": rate6(p.split.margin()),
        })
    }));
    rows
}

/// Rate for `--rate auto`: a hair below the largest rate meeting the line
/// conditions, or below the benchmark when the network has no line ordering.
fn auto_rate(topo: &Topology) -> Result<(f64, &'static str), CliError> {
    if distance_ordering_check(topo).is_some() {
        Ok((
            AUTO_RATE_FRACTION * max_achievable_rate(topo, DEFAULT_TOLERANCE)?.rate,
            "max_rate",
        ))
    } else {
        Ok((AUTO_RATE_FRACTION * allcast_rate_bound(topo)?, "rate_bound"))
    }
}

fn simulate(
    config: &ExperimentConfig,
    rate: RateChoice,
    blocks: usize,
    trace_path: Option<&PathBuf>,
    payload_size: Option<u64>,
) -> Result<String, CliError> {
    let topo = config.topology()?;
    let (rate, rate_source) = match rate {
        RateChoice::Auto => auto_rate(&topo)?,
        RateChoice::Fixed(v) => (v, "fixed"),
    };
    let one_hop = default_one_hop(&topo)?;
    let trace = run_distance_regulated(&topo, &one_hop, rate, blocks)?;
    let payload = payload_size
        .map(|size| payload_demo(&trace, &[size], config.seed))
        .transpose()?;

    if let Some(path) = trace_path {
        let text = match config.format {
            Format::Csv => trace.to_csv(),
            Format::Json => to_json_text(trace.to_json(), "simulate-trace"),
        };
        write_file(path, &text)?;
    }
    Ok(simulation_summary(config, &topo, &trace, rate, rate_source, payload))
}

fn simulation_summary(
    config: &ExperimentConfig,
    topo: &Topology,
    trace: &SimulationTrace,
    rate: f64,
    rate_source: &str,
    payload: Option<crate::protocol_sim::PayloadReport>,
) -> String {
    let n = trace.node_count();
    let interference = interference_accounting(trace);
    let failures = trace.failures();
    let per_node: Vec<(usize, usize)> = (0..n)
        .map(|i| (i, failures.iter().filter(|(node, _)| *node == i).count()))
        .collect();
    let ids = |set: &crate::topology::NodeSet| set.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(" ");
    match config.format {
        Format::Csv => {
            let mut out = String::from(
                "node,rate,blocks,failures,first_failure,completion_block,sum_rate_condition,undecoded,interference_power\n",
            );
            for (i, count) in per_node {
                let first = failures.iter().find(|(node, _)| *node == i).map(|(_, b)| *b);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    i + 1,
                    rate6(rate),
                    trace.block_count(),
                    count,
                    first.map_or(String::new(), |b| b.to_string()),
                    trace.completion_block(i).map_or(String::new(), |b| b.to_string()),
                    trace.sum_rate_conditions()[i],
                    ids(&interference[i].undecoded),
                    interference[i].power
                );
            }
            out
        }
        Format::Json => {
            let nodes: Vec<Value> = per_node
                .iter()
                .map(|&(i, count)| {
                    json!({
                        "node": i + 1,
                        "failures": count,
                        "completion_block": trace.completion_block(i),
                        "earliest_full_knowledge": trace.earliest_full_knowledge(i),
                        "sum_rate_condition": trace.sum_rate_conditions()[i],
                        "undecoded": interference[i].undecoded.iter().map(|j| j + 1).collect::<Vec<_>>(),
                        "interference_power": interference[i].power,
                    })
                })
                .collect();
            to_json_text(
                json!({
                    "n": n,
                    "topology_hash": topo.content_hash(),
                    "rate": rate6(rate),
                    "rate_source": rate_source,
                    "blocks": trace.block_count(),
                    "all_succeeded": trace.all_succeeded(),
                    "first_failure_block": trace.first_failure(),
                    "warnings": trace.warnings(),
                    "nodes": nodes,
                    "payload": payload,
                }),
                "simulate",
            )
        }
    }
}

struct SweepRow {
    n: usize,
    gain: String,
    hash: String,
    bound: f64,
    max_rate: f64,
    pass: bool,
}

fn sweep(config: &ExperimentConfig, n_list: &[usize], gain_list: &[GainFunction]) -> Result<String, CliError> {
    let gains: Vec<GainFunction> = if gain_list.is_empty() {
        vec![config.gain.clone()]
    } else {
        gain_list.to_vec()
    };
    let mut n_sorted = n_list.to_vec();
    n_sorted.sort_unstable();
    n_sorted.dedup();
    let grid: Vec<(usize, usize)> = (0..gains.len())
        .flat_map(|g| n_sorted.iter().map(move |&n| (g, n)))
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(g, n)| -> Result<SweepRow, CliError> {
            let topo = config.build_topology(n, &gains[g])?;
            let best = max_achievable_rate(&topo, DEFAULT_TOLERANCE)?;
            let pass = theorem1_conditions(&topo, AUTO_RATE_FRACTION * best.bound)?.verdict;
            Ok(SweepRow {
                n,
                gain: gains[g].to_string(),
                hash: topo.content_hash(),
                bound: best.bound,
                max_rate: best.rate,
                pass,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(match config.format {
        Format::Csv => {
            let mut out = String::from("n,gain,topology_hash,rate_bound,max_rate,pass\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.n,
                    r.gain,
                    r.hash,
                    rate6(r.bound),
                    rate6(r.max_rate),
                    r.pass
                );
            }
            out
        }
        Format::Json => to_json_text(
            json!({
                "rate_bound_note": BOUND_NOTE,
                "rows": rows.iter().map(|r| json!({
                    "n": r.n,
                    "gain": r.gain,
                    "topology_hash": r.hash,
                    "rate_bound": rate6(r.bound),
                    "max_rate": rate6(r.max_rate),
                    "pass": r.pass,
                })).collect::<Vec<_>>(),
            }),
            "sweep",
        ),
    })
}

struct BinRow {
    sizes: Vec<u64>,
    vectors: u64,
    failures: u64,
    property: bool,
}

/// Every tuple of alphabet sizes with up to `k_max` entries in
/// `1..=size_max`, in lexicographic order within each length.
fn size_tuples(k_max: usize, size_max: u64) -> Vec<Vec<u64>> {
    let mut all = Vec::new();
    let mut layer: Vec<Vec<u64>> = vec![Vec::new()];
    for _ in 0..k_max {
        layer = layer
            .into_iter()
            .flat_map(|t| {
                (1..=size_max).map(move |s| {
                    let mut next = t.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

fn bin_demo(config: &ExperimentConfig, k_max: usize, size_max: u64, sizes: Option<&[u64]>) -> Result<String, CliError> {
    let tuples = match sizes {
        Some(s) => vec![s.to_vec()],
        None => size_tuples(k_max, size_max),
    };
    let rows: Vec<BinRow> = tuples
        .into_par_iter()
        .map(|sizes| -> Result<BinRow, CliError> {
            let binning = build_binning(&sizes)?;
            Ok(BinRow {
                vectors: binning.vector_count(),
                failures: round_trip_failures(&binning)?,
                property: verify_binning_property(&binning)?,
                sizes,
            })
        })
        .collect::<Result<_, _>>()?;
    let tuples = rows.len();
    let vectors: u64 = rows.iter().map(|r| r.vectors).sum();
    let failures: u64 = rows.iter().map(|r| r.failures).sum();
    let property = rows.iter().all(|r| r.property);
    let round_trips: u64 = rows.iter().map(|r| r.vectors * r.sizes.len() as u64).sum();
    Ok(match config.format {
        Format::Csv => {
            let mut out = String::from("tuples,vectors,round_trips,failures,property_holds\n");
            let _ = writeln!(out, "{tuples},{vectors},{round_trips},{failures},{property}");
            out
        }
        Format::Json => to_json_text(
            json!({
                "tuples": tuples,
                "vectors": vectors,
                "round_trips": round_trips,
                "failures": failures,
                "property_holds": property,
                "failing_tuples": rows.iter().filter(|r| r.failures > 0 || !r.property).map(|r| r.sizes.clone()).collect::<Vec<_>>(),
            }),
            "bin-demo",
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> ExperimentConfig {
        let mut argv = vec!["omnirelay"];
        argv.extend_from_slice(args);
        ExperimentConfig::from_cli(Cli::try_parse_from(argv).unwrap()).unwrap()
    }

    #[test]
    fn analyze_regular_line() {
        let out = run(&config(&["analyze", "--preset", "regular-line", "--n", "6"])).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        let cols: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cols[0], "6");
        let bound: f64 = cols[2].parse().unwrap();
        let max: f64 = cols[3].parse().unwrap();
        assert!((bound - max).abs() <= 2e-6);
    }

    #[test]
    fn simulate_at_zero_rate() {
        let out = run(&config(&["simulate", "--n", "4", "--rate", "0", "--blocks", "6"])).unwrap();
        let rows: Vec<&str> = out.lines().skip(1).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("0")));
    }

    #[test]
    fn sweep_rows_follow_configuration_order() {
        let out = run(&config(&["sweep", "--n-list", "4,2,3", "--format", "json"])).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["spec_version"], SCHEMA_VERSION);
        let ns: Vec<u64> = v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["n"].as_u64().unwrap())
            .collect();
        assert_eq!(ns, vec![2, 3, 4]);
    }

    #[test]
    fn bin_demo_small() {
        // 3 + 9 tuples; 6 + 36 vectors; 6 * 1 + 36 * 2 round trips
        let out = run(&config(&["bin-demo", "--k-max", "2", "--size-max", "3"])).unwrap();
        assert_eq!(out.lines().nth(1), Some("12,42,78,0,true"));
    }

    #[test]
    fn size_tuple_enumeration() {
        let t = size_tuples(2, 2);
        assert_eq!(
            t,
            vec![vec![1], vec![2], vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]
        );
    }

    #[test]
    fn error_codes() {
        let ring = config(&["analyze", "--preset", "ring", "--n", "6"]);
        assert_eq!(run(&ring).unwrap_err().code(), "not_line_ordered");
        let missing = config(&["analyze", "--topology", "/nonexistent/topology.txt"]);
        assert_eq!(run(&missing).unwrap_err().code(), "io");
        let tiny = config(&["analyze", "--n", "1"]);
        assert_eq!(run(&tiny).unwrap_err().code(), "invalid_topology");
        assert!(parse_rate("fast").is_err());
        assert!(parse_rate("-1").is_err());
    }
}

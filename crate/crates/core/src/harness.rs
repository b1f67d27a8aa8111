//! Experiment sweeps: samples × routing layers × static tolerances × ROR
//! modes, averaged per set of samples.
//!
//! Each sample is capillarized once up to the largest layer of the range;
//! the pattern for a smaller layer cap `L` is the first `L` layers plus a
//! min-cost route of whatever flow they leave. A sample that fails at any
//! layer is dropped from every layer, so all layer curves average over the
//! same samples.

use crate::capillary::{capillarize, LayerStats, Provenance, RoutingPattern};
use crate::fec::{FecError, FecParams};
use crate::manet::{self, ManetConfig, ManetError};
use crate::netmodel::{self, EndpointPair, NetError, Network, NodeId};
use crate::ror::{rate_pattern, RorError, RorMode, StaticTolerance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Manet(#[from] ManetError),
    #[error(transparent)]
    Fec(#[from] FecError),
    #[error(transparent)]
    Ror(#[from] RorError),
}

impl HarnessError {
    /// Errors caused by bad input rather than by a failed run.
    pub fn is_validation(&self) -> bool {
        !matches!(self, HarnessError::Io { .. })
    }
}

/// Where the networks of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SampleSource {
    Manet(ManetConfig),
    Preset {
        name: String,
        seed: u64,
    },
    /// Network or sample documents; relative paths resolve against the
    /// config file's directory.
    Files(Vec<PathBuf>),
}

fn default_layers() -> [usize; 2] {
    [1, 10]
}

/// `0.036, 0.039, …, 0.078`.
pub fn default_tolerances() -> Vec<f64> {
    (0..15).map(|k| (36 + 3 * k) as f64 / 1000.0).collect()
}

fn default_modes() -> Vec<RorMode> {
    vec![RorMode::Short, RorMode::Large]
}

fn default_sets() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub samples: SampleSource,
    /// Inclusive `[first, last]` layer caps.
    #[serde(default = "default_layers")]
    pub layers: [usize; 2],
    #[serde(default = "default_tolerances")]
    pub tolerances: Vec<f64>,
    #[serde(default)]
    pub fec: FecParams,
    #[serde(default = "default_modes")]
    pub modes: Vec<RorMode>,
    /// Number of contiguous sample sets to average separately.
    #[serde(default = "default_sets")]
    pub sets: usize,
    /// Fixed endpoints for every sample; drawn per sample when absent.
    #[serde(default)]
    pub source: Option<NodeId>,
    #[serde(default)]
    pub sink: Option<NodeId>,
    #[serde(default)]
    pub endpoint_seed: u64,
}

impl ExperimentConfig {
    pub fn new(samples: SampleSource) -> Self {
        ExperimentConfig {
            samples,
            layers: default_layers(),
            tolerances: default_tolerances(),
            fec: FecParams::default(),
            modes: default_modes(),
            sets: default_sets(),
            source: None,
            sink: None,
            endpoint_seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and anchors relative sample paths at its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = read(path)?;
        let mut cfg = Self::from_json(&text)?;
        if let SampleSource::Files(files) = &mut cfg.samples {
            let base = path.parent().unwrap_or(Path::new("."));
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.validate_sweep()?;
        match &self.samples {
            SampleSource::Manet(m) => m.validate()?,
            SampleSource::Preset { name, seed } => {
                ManetConfig::preset(name, *seed)?;
            }
            SampleSource::Files(f) if f.is_empty() => {
                return Err(HarnessError::Config("no network files listed".into()))
            }
            SampleSource::Files(_) => {}
        }
        Ok(())
    }

    /// Checks everything except the sample source.
    pub fn validate_sweep(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        let [first, last] = self.layers;
        if first == 0 || first > last {
            return bad("layers must be [first, last] with 1 <= first <= last");
        }
        if self.tolerances.is_empty() {
            return bad("tolerance grid is empty");
        }
        for &t in &self.tolerances {
            StaticTolerance::new(t)?;
        }
        if self.modes.is_empty() {
            return bad("no ROR modes selected");
        }
        if self.sets == 0 {
            return bad("sets must be at least 1");
        }
        if self.source.is_some() != self.sink.is_some() {
            return bad("source and sink must be given together");
        }
        Ok(())
    }

    fn modes(&self) -> Vec<RorMode> {
        let mut modes = Vec::new();
        for &m in &self.modes {
            if !modes.contains(&m) {
                modes.push(m);
            }
        }
        modes
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Accepts either a bare network document or a MANET sample document.
pub fn parse_network_or_sample(text: &str) -> Result<Network, NetError> {
    match netmodel::load_network(text) {
        Ok(net) => Ok(net),
        Err(net_err) => manet::load_sample(text)
            .map(|s| s.network)
            .map_err(|_| net_err),
    }
}

pub fn load_network_file(path: &Path) -> Result<Network, HarnessError> {
    parse_network_or_sample(&read(path)?).map_err(|e| HarnessError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_samples(source: &SampleSource) -> Result<Vec<Network>, HarnessError> {
    let from_manet = |cfg: &ManetConfig| -> Result<Vec<Network>, HarnessError> {
        Ok(manet::generate_samples(cfg)?
            .into_iter()
            .map(|s| s.network)
            .collect())
    };
    match source {
        SampleSource::Manet(cfg) => from_manet(cfg),
        SampleSource::Preset { name, seed } => from_manet(&ManetConfig::preset(name, *seed)?),
        SampleSource::Files(files) => files.iter().map(|f| load_network_file(f)).collect(),
    }
}

/// ROR of one sample's pattern at one layer cap, tolerance and mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RorPoint {
    pub layer: usize,
    pub t: f64,
    pub mode: RorMode,
    pub ror: f64,
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub index: usize,
    pub endpoints: EndpointPair,
    pub points: Vec<RorPoint>,
    pub layer_stats: Vec<LayerStats>,
    /// Patterns per layer cap, first to last.
    pub patterns: Vec<RoutingPattern>,
}

#[derive(Debug, Clone)]
pub enum SampleOutcome {
    Done(SampleRun),
    Dropped { index: usize, reason: String },
}

impl SampleOutcome {
    pub fn run(&self) -> Option<&SampleRun> {
        match self {
            SampleOutcome::Done(r) => Some(r),
            SampleOutcome::Dropped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RorRow {
    pub set: usize,
    pub layer: usize,
    pub t: f64,
    pub mode: RorMode,
    pub mean_ror: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuntRow {
    pub layer: usize,
    pub n_samples: usize,
    pub mean_factor: f64,
    pub mean_iterations: f64,
    pub mean_bottlenecks: f64,
    pub mean_initial_suspects: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub ror_rows: Vec<RorRow>,
    pub hunt_rows: Vec<HuntRow>,
    pub samples: Vec<SampleOutcome>,
}

impl ExperimentResults {
    pub fn dropped(&self) -> usize {
        self.samples.iter().filter(|s| s.run().is_none()).count()
    }

    pub fn ror_csv(&self) -> String {
        let mut out = String::from("set,layer,t,mode,mean_ror,n_samples\n");
        for r in &self.ror_rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.set,
                r.layer,
                r.t,
                r.mode.as_str(),
                r.mean_ror,
                r.n_samples
            );
        }
        out
    }

    pub fn hunting_csv(&self) -> String {
        let mut out = String::from(
            "layer,n_samples,mean_factor,mean_iterations,mean_bottlenecks,mean_initial_suspects\n",
        );
        for r in &self.hunt_rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.layer,
                r.n_samples,
                r.mean_factor,
                r.mean_iterations,
                r.mean_bottlenecks,
                r.mean_initial_suspects
            );
        }
        out
    }
}

/// Set (1-based) of sample `index` when `total` samples are split into
/// `sets` contiguous chunks; the last chunk takes the remainder.
pub fn set_of(index: usize, total: usize, sets: usize) -> usize {
    let chunk = (total / sets).max(1);
    (index / chunk).min(sets - 1) + 1
}

fn run_sample(
    index: usize,
    net: &Network,
    cfg: &ExperimentConfig,
    modes: &[RorMode],
    tolerances: &[StaticTolerance],
) -> Result<SampleRun, String> {
    let endpoints = match (cfg.source, cfg.sink) {
        (Some(s), Some(t)) => net.endpoints(s, t).map_err(|e| e.to_string())?,
        _ => manet::pick_endpoints(net, cfg.endpoint_seed.wrapping_add(index as u64))
            .map_err(|e| e.to_string())?,
    };
    let [first, last] = cfg.layers;
    let trace = capillarize(net, endpoints, last).map_err(|e| e.to_string())?;
    let mut points = Vec::new();
    let mut patterns = Vec::new();
    for layer in first..=last {
        let pattern = trace.pattern_at(layer).map_err(|e| e.to_string())?;
        for &mode in modes {
            for &t in tolerances {
                let report =
                    rate_pattern(&pattern, t, mode, &cfg.fec).map_err(|e| e.to_string())?;
                points.push(RorPoint {
                    layer,
                    t: t.value(),
                    mode,
                    ror: report.ror,
                });
            }
        }
        patterns.push(pattern);
    }
    Ok(SampleRun {
        index,
        endpoints,
        points,
        layer_stats: trace.stats(),
        patterns,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults, HarnessError> {
    cfg.validate()?;
    let networks = load_samples(&cfg.samples)?;
    run_on_networks(cfg, &networks)
}

/// Runs the sweep of `cfg` on already loaded networks (`cfg.samples` is
/// ignored).
pub fn run_on_networks(
    cfg: &ExperimentConfig,
    networks: &[Network],
) -> Result<ExperimentResults, HarnessError> {
    cfg.validate_sweep()?;
    let modes = cfg.modes();
    let tolerances: Vec<StaticTolerance> = cfg
        .tolerances
        .iter()
        .map(|&t| StaticTolerance::new(t))
        .collect::<Result<_, _>>()?;

    let samples: Vec<SampleOutcome> = networks
        .par_iter()
        .enumerate()
        .map(
            |(index, net)| match run_sample(index, net, cfg, &modes, &tolerances) {
                Ok(run) => SampleOutcome::Done(run),
                Err(reason) => SampleOutcome::Dropped { index, reason },
            },
        )
        .collect();

    let total = networks.len();
    let [first, last] = cfg.layers;
    let mut ror_rows = Vec::new();
    for set in 1..=cfg.sets {
        let members: Vec<&SampleRun> = samples
            .iter()
            .filter_map(SampleOutcome::run)
            .filter(|r| set_of(r.index, total, cfg.sets) == set)
            .collect();
        if members.is_empty() {
            continue;
        }
        for &mode in &modes {
            for t in &tolerances {
                for layer in first..=last {
                    let sum: f64 = members
                        .iter()
                        .flat_map(|r| &r.points)
                        .filter(|p| p.layer == layer && p.mode == mode && p.t == t.value())
                        .map(|p| p.ror)
                        .sum();
                    ror_rows.push(RorRow {
                        set,
                        layer,
                        t: t.value(),
                        mode,
                        mean_ror: sum / members.len() as f64,
                        n_samples: members.len(),
                    });
                }
            }
        }
    }

    let mut hunt_rows = Vec::new();
    for layer in 1..=last {
        let stats: Vec<&LayerStats> = samples
            .iter()
            .filter_map(SampleOutcome::run)
            .filter_map(|r| r.layer_stats.iter().find(|s| s.layer == layer))
            .collect();
        if stats.is_empty() {
            continue;
        }
        let n = stats.len() as f64;
        let mean = |f: &dyn Fn(&LayerStats) -> f64| stats.iter().map(|s| f(s)).sum::<f64>() / n;
        hunt_rows.push(HuntRow {
            layer,
            n_samples: stats.len(),
            mean_factor: mean(&|s| s.factor),
            mean_iterations: mean(&|s| s.hunt_iterations as f64),
            mean_bottlenecks: mean(&|s| s.bottlenecks as f64),
            mean_initial_suspects: mean(&|s| s.suspect_counts.first().copied().unwrap_or(0) as f64),
        });
    }

    Ok(ExperimentResults {
        ror_rows,
        hunt_rows,
        samples,
    })
}

/// Graphviz rendering: bottleneck links solid, residual links dashed,
/// loads to five decimals.
pub fn export_dot(pattern: &RoutingPattern) -> String {
    let mut out = String::from("digraph capillary {\n");
    let factors: Vec<String> = pattern.factors.iter().map(|f| format!("{f:.5}")).collect();
    let _ = writeln!(out, "  // factors: [{}]", factors.join(", "));
    let _ = writeln!(
        out,
        "  {} [shape=doublecircle, xlabel=\"source\"];",
        pattern.source
    );
    let _ = writeln!(
        out,
        "  {} [shape=doublecircle, xlabel=\"sink\"];",
        pattern.sink
    );
    for l in &pattern.links {
        let (style, layer) = match l.provenance {
            Provenance::Layer(n) => ("solid", format!("layer {n}")),
            Provenance::Residual => ("dashed", "residual".to_string()),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{:.5}\", style={}, comment=\"{}\"];",
            l.from, l.to, l.load, style, layer
        );
    }
    out.push_str("}\n");
    out
}

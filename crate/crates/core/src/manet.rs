//! Random-walk mobile ad-hoc network samples.
//!
//! Nodes start uniformly at random in a rectangle. Every timeframe each
//! node moves a fixed distance in a uniformly random direction and is
//! folded back into the rectangle by reflection at its borders. Two nodes
//! are linked in a frame when they lie within the coverage radius of each
//! other.
//!
//! All randomness comes from one [`ChaCha8Rng`] seeded with the config
//! seed, so a config always yields the same frames.

use crate::netmodel::{component_labels, EndpointPair, NetError, Network, NetworkDoc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Generator identity recorded in every sample's metadata.
pub const RNG_NAME: &str = "ChaCha8Rng/rand_chacha-0.3";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManetError {
    #[error("invalid MANET config: {0}")]
    InvalidConfig(String),
    #[error("unknown preset {0:?} (known: desk, n300, n115, n120)")]
    UnknownPreset(String),
    #[error("network has {0} nodes; at least 2 are needed to pick endpoints")]
    TooFewNodes(usize),
    #[error("no pair of nodes is connected")]
    NoConnectedPair,
    #[error("malformed sample document: {0}")]
    Parse(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManetConfig {
    pub node_count: usize,
    /// `[width, height]`.
    pub area: [f64; 2],
    pub coverage_radius: f64,
    pub step_length: f64,
    pub timeframes: usize,
    pub seed: u64,
}

impl ManetConfig {
    pub fn validate(&self) -> Result<(), ManetError> {
        let bad = |msg: &str| Err(ManetError::InvalidConfig(msg.to_string()));
        if self.node_count == 0 {
            return bad("node_count must be positive");
        }
        if self.timeframes == 0 {
            return bad("timeframes must be positive");
        }
        if !(self.area[0] > 0.0 && self.area[1] > 0.0) || !self.area.iter().all(|v| v.is_finite()) {
            return bad("area dimensions must be positive and finite");
        }
        if !(self.step_length > 0.0 && self.step_length.is_finite()) {
            return bad("step_length must be positive and finite");
        }
        if !(self.coverage_radius >= 0.0 && self.coverage_radius.is_finite()) {
            return bad("coverage_radius must be nonnegative and finite");
        }
        Ok(())
    }

    /// Mean node degree expected for uniformly placed nodes, border
    /// effects included.
    pub fn expected_mean_degree(&self) -> f64 {
        (self.node_count as f64 - 1.0)
            * pair_link_probability(self.area[0], self.area[1], self.coverage_radius)
    }

    /// Named presets. The radius is solved so the expected mean degree hits
    /// the target.
    ///
    /// | name  | nodes | frames | mean degree |
    /// |-------|-------|--------|-------------|
    /// | desk  | 40    | 30     | 8           |
    /// | n300  | 300   | 200    | 17          |
    /// | n115  | 115   | 300    | 17          |
    /// | n120  | 120   | 150    | 17          |
    pub fn preset(name: &str, seed: u64) -> Result<Self, ManetError> {
        let (node_count, timeframes, degree) = match name {
            "desk" => (40, 30, 8.0),
            "n300" => (300, 200, 17.0),
            "n115" => (115, 300, 17.0),
            "n120" => (120, 150, 17.0),
            other => return Err(ManetError::UnknownPreset(other.to_string())),
        };
        let area = [100.0, 100.0];
        Ok(ManetConfig {
            node_count,
            area,
            coverage_radius: radius_for_mean_degree(node_count, area, degree),
            step_length: 2.0,
            timeframes,
            seed,
        })
    }
}

/// Probability that two uniform points of a `w × h` rectangle are within
/// `r` of each other. Exact for `r <= min(w, h)`; clamped to 1 beyond the
/// diagonal.
pub fn pair_link_probability(w: f64, h: f64, r: f64) -> f64 {
    if r * r >= w * w + h * h {
        return 1.0;
    }
    let r = r.min(w.min(h));
    ((PI * r * r * w * h - 4.0 / 3.0 * r.powi(3) * (w + h) + r.powi(4) / 2.0) / (w * w * h * h))
        .clamp(0.0, 1.0)
}

/// Coverage radius giving the requested expected mean degree.
pub fn radius_for_mean_degree(node_count: usize, area: [f64; 2], degree: f64) -> f64 {
    let target = degree / (node_count as f64 - 1.0).max(1.0);
    let (mut lo, mut hi) = (0.0, area[0].min(area[1]));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pair_link_probability(area[0], area[1], mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn reflect(v: f64, max: f64) -> f64 {
    let folded = v.rem_euclid(2.0 * max);
    if folded > max {
        2.0 * max - folded
    } else {
        folded
    }
}

/// State of a running random walk.
#[derive(Debug, Clone)]
pub struct RandomWalk {
    cfg: ManetConfig,
    rng: ChaCha8Rng,
    positions: Vec<(f64, f64)>,
    frame: usize,
}

impl RandomWalk {
    pub fn new(cfg: &ManetConfig) -> Result<Self, ManetError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let [w, h] = cfg.area;
        let positions = (0..cfg.node_count)
            .map(|_| (rng.gen::<f64>() * w, rng.gen::<f64>() * h))
            .collect();
        Ok(RandomWalk {
            cfg: cfg.clone(),
            rng,
            positions,
            frame: 0,
        })
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    /// Moves every node one step. Returns the positions before folding
    /// back into the area.
    pub fn advance(&mut self) -> Vec<(f64, f64)> {
        let [w, h] = self.cfg.area;
        let step = self.cfg.step_length;
        let mut unfolded = Vec::with_capacity(self.positions.len());
        for p in &mut self.positions {
            let angle = self.rng.gen::<f64>() * 2.0 * PI;
            let raw = (p.0 + step * angle.cos(), p.1 + step * angle.sin());
            unfolded.push(raw);
            *p = (reflect(raw.0, w), reflect(raw.1, h));
        }
        self.frame += 1;
        unfolded
    }

    /// Proximity graph of the current frame.
    pub fn network(&self) -> Network {
        let r = self.cfg.coverage_radius;
        let pos = &self.positions;
        let mut links = Vec::new();
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                if (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1) <= r {
                    links.push((i, j));
                }
            }
        }
        Network::new(pos.len(), &links, Some(pos.clone())).expect("proximity graph is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleMetadata {
    pub seed: u64,
    pub config: ManetConfig,
    pub frame_index: usize,
    pub rng_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManetSample {
    pub metadata: SampleMetadata,
    pub network: Network,
}

pub fn generate_samples(cfg: &ManetConfig) -> Result<Vec<ManetSample>, ManetError> {
    let mut walk = RandomWalk::new(cfg)?;
    let mut out = Vec::with_capacity(cfg.timeframes);
    for frame in 0..cfg.timeframes {
        if frame > 0 {
            walk.advance();
        }
        out.push(ManetSample {
            metadata: SampleMetadata {
                seed: cfg.seed,
                config: cfg.clone(),
                frame_index: frame,
                rng_name: RNG_NAME.to_string(),
            },
            network: walk.network(),
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    metadata: SampleMetadata,
    network: NetworkDoc,
}

/// `{"metadata": {...}, "network": <network document>}`.
pub fn save_sample(sample: &ManetSample) -> String {
    serde_json::to_string(&SampleDoc {
        metadata: sample.metadata.clone(),
        network: NetworkDoc::from_network(&sample.network),
    })
    .expect("sample serializes")
}

pub fn load_sample(document: &str) -> Result<ManetSample, ManetError> {
    let doc: SampleDoc =
        serde_json::from_str(document).map_err(|e| ManetError::Parse(e.to_string()))?;
    Ok(ManetSample {
        metadata: doc.metadata,
        network: doc.network.into_network()?,
    })
}

/// A uniformly random ordered pair of distinct connected nodes.
///
/// Draws random pairs up to `node_count²` times; if all of them miss, one
/// of the connected pairs is chosen directly, so the call only fails when
/// no connected pair exists.
pub fn pick_endpoints(net: &Network, seed: u64) -> Result<EndpointPair, ManetError> {
    let n = net.node_count();
    if n < 2 {
        return Err(ManetError::TooFewNodes(n));
    }
    let comp = component_labels(n, net.links().iter().copied());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n.saturating_mul(n) {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if s != t && comp[s] == comp[t] {
            return Ok(EndpointPair { source: s, sink: t });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).map(move |t| (s, t)))
        .filter(|&(s, t)| s != t && comp[s] == comp[t])
        .collect();
    if pairs.is_empty() {
        return Err(ManetError::NoConnectedPair);
    }
    let (source, sink) = pairs[rng.gen_range(0..pairs.len())];
    Ok(EndpointPair { source, sink })
}

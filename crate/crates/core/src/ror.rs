//! Redundancy Overall Requirement of a routing pattern.
//!
//! When a link carrying the fraction `r` of the stream fails, the receiver
//! sees a loss rate of `r`. The sender already streams blocks sized for a
//! static tolerance `t`; the ROR adds up, over every link whose failure
//! would exceed that tolerance, the relative rate increase needed to
//! compensate for it. Links carrying the whole stream cannot be protected
//! by any amount of FEC and are left out.

use crate::capillary::{RoutingPattern, EPS_LOAD};
use crate::fec::{fec_block_size, FecError, FecParams, LossRate};
use crate::netmodel::NodeId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RorError {
    #[error("static tolerance must lie in [0, 1), got {0}")]
    InvalidTolerance(f64),
    #[error("failure time must be >= 0 and packet rate > 0 (got D = {d}, P = {p})")]
    InvalidVolume { d: f64, p: f64 },
    #[error(transparent)]
    Fec(#[from] FecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum RorMode {
    /// Short playback buffer: MDS blocks of `M` source packets.
    Short,
    /// Very large blocks: `FEC_p = M / (1 - p)`.
    Large,
}

impl RorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RorMode::Short => "short",
            RorMode::Large => "large",
        }
    }
}

impl std::str::FromStr for RorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "short" => Ok(RorMode::Short),
            "large" => Ok(RorMode::Large),
            other => Err(format!(
                "unknown mode {other:?} (expected \"short\" or \"large\")"
            )),
        }
    }
}

/// Loss rate the default stream already absorbs.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StaticTolerance(f64);

impl StaticTolerance {
    pub fn new(t: f64) -> Result<Self, RorError> {
        if !(0.0..1.0).contains(&t) {
            return Err(RorError::InvalidTolerance(t));
        }
        Ok(StaticTolerance(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub i: NodeId,
    pub j: NodeId,
    pub load: f64,
    pub overhead: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// The link carries the entire stream.
    EntireTraffic,
    /// Its failure stays within the static tolerance.
    BelowTolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub i: NodeId,
    pub j: NodeId,
    pub load: f64,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RorReport {
    pub ror: f64,
    pub mode: RorMode,
    pub t: f64,
    pub contributions: Vec<Contribution>,
    pub excluded: Vec<Exclusion>,
}

impl RorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Sum of `P_l / P - 1` over the given per-failure rate ratios.
pub fn ror_from_rates(ratios: impl IntoIterator<Item = f64>) -> f64 {
    ratios.into_iter().map(|r| r - 1.0).sum()
}

fn rate(
    pattern: &RoutingPattern,
    t: StaticTolerance,
    mode: RorMode,
    mut overhead: impl FnMut(f64) -> Result<f64, RorError>,
) -> Result<RorReport, RorError> {
    let mut contributions = Vec::new();
    let mut excluded = Vec::new();
    for l in &pattern.links {
        let reason = if l.load >= 1.0 - EPS_LOAD {
            Some(ExclusionReason::EntireTraffic)
        } else if l.load <= t.0 {
            Some(ExclusionReason::BelowTolerance)
        } else {
            None
        };
        match reason {
            Some(reason) => excluded.push(Exclusion {
                i: l.from,
                j: l.to,
                load: l.load,
                reason,
            }),
            None => contributions.push(Contribution {
                i: l.from,
                j: l.to,
                load: l.load,
                overhead: overhead(l.load)?,
            }),
        }
    }
    Ok(RorReport {
        ror: contributions.iter().map(|c| c.overhead).sum(),
        mode,
        t: t.0,
        contributions,
        excluded,
    })
}

/// ROR with MDS blocks of `params.m()` source packets: each contributing
/// link adds `FEC_r / FEC_t - 1`.
pub fn ror_short_buffer(
    pattern: &RoutingPattern,
    t: StaticTolerance,
    params: &FecParams,
) -> Result<RorReport, RorError> {
    let base = fec_block_size(LossRate::new(t.0)?, params)? as f64;
    rate(pattern, t, RorMode::Short, |r| {
        Ok(fec_block_size(LossRate::new(r)?, params)? as f64 / base - 1.0)
    })
}

/// ROR with very large blocks: each contributing link adds
/// `(1 - t) / (1 - r) - 1`.
pub fn ror_large_blocks(pattern: &RoutingPattern, t: StaticTolerance) -> RorReport {
    rate(pattern, t, RorMode::Large, |r| {
        Ok((1.0 - t.0) / (1.0 - r) - 1.0)
    })
    .expect("large-block overheads are infallible")
}

pub fn rate_pattern(
    pattern: &RoutingPattern,
    t: StaticTolerance,
    mode: RorMode,
    params: &FecParams,
) -> Result<RorReport, RorError> {
    match mode {
        RorMode::Short => ror_short_buffer(pattern, t, params),
        RorMode::Large => Ok(ror_large_blocks(pattern, t)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficVolume {
    /// Total single-link failure time over the session, seconds.
    pub failure_time: f64,
    /// Packets per second.
    pub packet_rate: f64,
}

impl TrafficVolume {
    pub fn new(failure_time: f64, packet_rate: f64) -> Result<Self, RorError> {
        if !(failure_time >= 0.0 && packet_rate > 0.0) {
            return Err(RorError::InvalidVolume {
                d: failure_time,
                p: packet_rate,
            });
        }
        Ok(TrafficVolume {
            failure_time,
            packet_rate,
        })
    }
}

/// Adaptive redundant packets sent over the session: `D · P · ROR`.
pub fn redundant_packet_volume(vol: TrafficVolume, ror: f64) -> f64 {
    vol.failure_time * vol.packet_rate * ror
}

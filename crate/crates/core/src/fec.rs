//! FEC block sizing for an MDS erasure code on a random-loss channel.
//!
//! A block of `N` packets carrying `M` source packets fails to decode when
//! more than `N - M` packets are lost. [`fec_block_size`] scans `N` upward
//! from `M` until that probability drops to the acceptable decoding error
//! rate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper limit on the block length searched by [`fec_block_size`].
pub const MAX_BLOCK_LEN: u64 = 1_000_000;

/// Relative slack when comparing a failure probability against the DER.
/// A probability equal to the DER satisfies it; the slack absorbs the
/// rounding in e.g. `0.1^5` versus `1e-5`.
const DER_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FecError {
    #[error("source packets per block must be at least 1")]
    ZeroSourcePackets,
    #[error("decoding error rate must lie in (0, 1), got {0}")]
    InvalidDer(f64),
    #[error("loss rate must lie in [0, 1), got {0}")]
    InvalidLossRate(f64),
    #[error("no block length up to {cap} reaches DER {der} at loss rate {p} with M = {m}")]
    BlockCapExceeded { p: f64, m: u32, der: f64, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FecParamsRepr")]
pub struct FecParams {
    m: u32,
    der: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FecParamsRepr {
    m: u32,
    der: f64,
}

impl TryFrom<FecParamsRepr> for FecParams {
    type Error = FecError;

    fn try_from(r: FecParamsRepr) -> Result<Self, FecError> {
        FecParams::new(r.m, r.der)
    }
}

impl FecParams {
    pub fn new(m: u32, der: f64) -> Result<Self, FecError> {
        if m == 0 {
            return Err(FecError::ZeroSourcePackets);
        }
        if !(der > 0.0 && der < 1.0) {
            return Err(FecError::InvalidDer(der));
        }
        Ok(FecParams { m, der })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn der(&self) -> f64 {
        self.der
    }
}

impl Default for FecParams {
    /// 20 source packets per block, DER of 1e-5.
    fn default() -> Self {
        FecParams { m: 20, der: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LossRate(f64);

impl LossRate {
    pub fn new(p: f64) -> Result<Self, FecError> {
        if !(0.0..1.0).contains(&p) {
            return Err(FecError::InvalidLossRate(p));
        }
        Ok(LossRate(p))
    }

    pub fn p(self) -> f64 {
        self.0
    }

    pub fn q(self) -> f64 {
        1.0 - self.0
    }
}

/// Probability that a block of `n` packets loses more than `n - m` of
/// them. Requires `n >= m >= 1`.
///
/// Terms of the binomial tail are generated in log space by the ratio
/// recurrence, starting from `p^n` and walking down to `n - m + 1` losses,
/// so nothing overflows and nothing is subtracted.
pub fn decoding_failure_prob(n: u64, m: u64, loss: LossRate) -> f64 {
    assert!(m >= 1 && n >= m, "need n >= m >= 1 (n = {n}, m = {m})");
    let p = loss.p();
    if p == 0.0 {
        return 0.0;
    }
    let ln_odds = (loss.q() / p).ln();
    let mut ln_term = n as f64 * p.ln();
    let mut total = ln_term.exp();
    let lowest = n - m + 1;
    let mut losses = n;
    while losses > lowest {
        // C(n, k-1)/C(n, k) = k / (n - k + 1)
        ln_term += (losses as f64 / (n - losses + 1) as f64).ln() + ln_odds;
        losses -= 1;
        total += ln_term.exp();
    }
    total.clamp(0.0, 1.0)
}

fn meets_der(delta: f64, der: f64) -> bool {
    delta <= der * (1.0 + DER_SLACK)
}

/// Smallest block length `N >= M` whose decoding failure probability is
/// at most the DER.
pub fn fec_block_size(loss: LossRate, params: &FecParams) -> Result<u64, FecError> {
    let m = params.m as u64;
    let mut n = m;
    while n <= MAX_BLOCK_LEN {
        if meets_der(decoding_failure_prob(n, m, loss), params.der) {
            return Ok(n);
        }
        n += 1;
    }
    Err(FecError::BlockCapExceeded {
        p: loss.p(),
        m: params.m,
        der: params.der,
        cap: MAX_BLOCK_LEN,
    })
}

/// `FEC_p / M`: how much the sender's rate grows to protect against loss `p`.
pub fn rate_increase_factor(loss: LossRate, params: &FecParams) -> Result<f64, FecError> {
    Ok(fec_block_size(loss, params)? as f64 / params.m as f64)
}

/// CSV table of rate increase factors: rows `p = 0.01 ..= 0.50`, one
/// column per `M = 1 ..= m_max`.
pub fn rate_increase_table(der: f64, m_max: u32) -> Result<String, FecError> {
    let params: Vec<FecParams> = (1..=m_max)
        .map(|m| FecParams::new(m, der))
        .collect::<Result<_, _>>()?;
    if params.is_empty() {
        return Err(FecError::ZeroSourcePackets);
    }
    let mut out = String::from("p");
    for m in 1..=m_max {
        out.push_str(&format!(",M={m}"));
    }
    out.push('\n');
    for step in 1..=50u32 {
        let loss = LossRate::new(step as f64 / 100.0)?;
        out.push_str(&format!("{:.2}", loss.p()));
        for pr in &params {
            out.push_str(&format!(",{:.6}", rate_increase_factor(loss, pr)?));
        }
        out.push('\n');
    }
    Ok(out)
}

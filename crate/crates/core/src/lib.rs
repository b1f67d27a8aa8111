//! Capillary multi-path routing and its rating by redundancy overall
//! requirement (ROR).
//!
//! - [`netmodel`]: undirected unit-capacity networks and their JSON form.
//! - [`lp`]: the dense simplex solver every flow problem is stated in.
//! - [`capillary`]: layer-by-layer max-flow construction with bottleneck
//!   hunting and min-cost completion of the remaining flow.
//! - [`fec`]: MDS block sizing from the binomial decoding failure
//!   probability.
//! - [`ror`]: short-buffer and large-block ROR of a routing pattern.
//! - [`manet`]: random-walk mobile ad-hoc network samples.
//! - [`harness`]: sweeps over samples, layers and tolerances; CSV and DOT
//!   output.

pub mod capillary;
pub mod fec;
pub mod harness;
pub mod lp;
pub mod manet;
pub mod netmodel;
pub mod ror;

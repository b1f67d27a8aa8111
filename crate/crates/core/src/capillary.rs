//! Layered capillary routing.
//!
//! Each layer is a bounded multi-source/multi-sink problem: every node `i`
//! must emit `f_i · F` units of flow (negative for sinks) over unit
//! capacity undirected links, and `F` is maximized. Links that stay
//! saturated in every optimal solution are the layer's bottlenecks; they
//! are removed, the flow they carried is folded into the coefficients of
//! their end nodes, and the next layer is solved on what remains. Once all
//! coefficients vanish the whole flow is enclosed in bottlenecks. If the
//! layer cap is hit first, the remaining flow is routed by a min-cost
//! solution.
//!
//! Every undirected link carries two nonnegative arc flows; its load is
//! their sum and is capped at 1.
//!
//! Minimizing the maximal link load directly (shrinking a shared upper
//! bound layer after layer) describes the same patterns, but its loads
//! shrink geometrically with depth and the programs become numerically
//! infeasible, so it is not offered here.

use crate::lp::{self, Direction, LinearProgram, LpError, LpStatus, Relation, Var};
use crate::netmodel::{component_labels, EndpointPair, Link, NetError, Network, NodeId};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A link counts as saturated when its load is within this of 1.
pub const EPS_LOAD: f64 = 1e-6;
/// Coefficients smaller than this in magnitude are zero.
pub const EPS_ZERO: f64 = 1e-9;
pub const DEFAULT_MAX_LAYERS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapillaryError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("nodes {nodes:?} must exchange {imbalance} units of flow with the rest of the network but are cut off from it")]
    Disconnected { nodes: Vec<NodeId>, imbalance: f64 },
    #[error("layer problem has no sources or sinks")]
    NoFlow,
    #[error("flow-out coefficients sum to {0}, not zero")]
    Unbalanced(f64),
    #[error("layer {layer} has flow increase factor {factor} < 1")]
    FactorBelowOne { layer: usize, factor: f64 },
    #[error("{stage} program unexpectedly {status:?}")]
    UnexpectedStatus {
        stage: &'static str,
        status: LpStatus,
    },
    #[error("at least one layer is required")]
    NoLayers,
    #[error("coefficient vector has {got} entries for {expected} nodes")]
    CoefficientCount { expected: usize, got: usize },
    #[error("link ({a}, {b}) is not part of the layer problem")]
    UnknownLink { a: NodeId, b: NodeId },
}

pub type Result<T> = std::result::Result<T, CapillaryError>;

/// The flow-out problem of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerProblem {
    layer: usize,
    node_count: usize,
    links: Vec<Link>,
    flow_out: Vec<f64>,
}

impl LayerProblem {
    /// Layer 1: `+1` at the source, `-1` at the sink.
    pub fn initial(net: &Network, ends: EndpointPair) -> Self {
        let mut flow_out = vec![0.0; net.node_count()];
        flow_out[ends.source] = 1.0;
        flow_out[ends.sink] = -1.0;
        LayerProblem {
            layer: 1,
            node_count: net.node_count(),
            links: net.links().to_vec(),
            flow_out,
        }
    }

    pub fn new(
        layer: usize,
        node_count: usize,
        mut links: Vec<Link>,
        flow_out: Vec<f64>,
    ) -> Result<Self> {
        links.sort_unstable();
        links.dedup();
        if flow_out.len() != node_count {
            return Err(CapillaryError::CoefficientCount {
                expected: node_count,
                got: flow_out.len(),
            });
        }
        let total: f64 = flow_out.iter().sum();
        let scale: f64 = flow_out.iter().map(|f| f.abs()).sum();
        if total.abs() > EPS_ZERO * (1.0 + scale) {
            return Err(CapillaryError::Unbalanced(total));
        }
        for l in &links {
            if l.b >= node_count {
                return Err(NetError::DanglingNode {
                    index: 0,
                    node: l.b,
                    node_count,
                }
                .into());
            }
        }
        Ok(LayerProblem {
            layer,
            node_count,
            links,
            flow_out,
        })
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn flow_out(&self) -> &[f64] {
        &self.flow_out
    }

    /// True once no node is a source or sink any more.
    pub fn is_exhausted(&self) -> bool {
        self.flow_out.iter().all(|f| f.abs() < EPS_ZERO)
    }

    /// Fails if some group of nodes connected by the remaining links has a
    /// nonzero coefficient total: its demand could never be routed.
    fn check_routable(&self) -> Result<()> {
        let labels = component_labels(self.node_count, self.links.iter().copied());
        let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut sums = vec![0.0; groups];
        let mut mags = vec![0.0; groups];
        for (node, &f) in self.flow_out.iter().enumerate() {
            sums[labels[node]] += f;
            mags[labels[node]] += f.abs();
        }
        for g in 0..groups {
            if sums[g].abs() > EPS_LOAD * (1.0 + mags[g]) {
                let nodes = (0..self.node_count).filter(|&n| labels[n] == g).collect();
                return Err(CapillaryError::Disconnected {
                    nodes,
                    imbalance: sums[g],
                });
            }
        }
        Ok(())
    }
}

/// Arc flows on one undirected link. `forward` runs `a -> b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFlow {
    pub link: Link,
    pub forward: f64,
    pub backward: f64,
}

impl LinkFlow {
    pub fn load(&self) -> f64 {
        self.forward + self.backward
    }

    pub fn net(&self) -> f64 {
        self.forward - self.backward
    }

    /// Direction of the net flow, `(from, to)`.
    pub fn orientation(&self) -> (NodeId, NodeId) {
        if self.net() >= 0.0 {
            (self.link.a, self.link.b)
        } else {
            (self.link.b, self.link.a)
        }
    }
}

/// A removed bottleneck and the direction its flow ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bottleneck {
    pub from: NodeId,
    pub to: NodeId,
}

impl Bottleneck {
    pub fn link(&self) -> Link {
        Link::new(self.from, self.to)
    }
}

#[derive(Debug, Clone)]
pub struct MaxFlow {
    /// Flow increase factor `F`.
    pub factor: f64,
    /// One entry per link of the problem, same order.
    pub flows: Vec<LinkFlow>,
}

impl MaxFlow {
    /// Indices of links loaded to capacity; the hunting loop starts here.
    pub fn saturated(&self) -> Vec<usize> {
        saturated(&self.flows, 0..self.flows.len())
    }
}

fn saturated(flows: &[LinkFlow], among: impl IntoIterator<Item = usize>) -> Vec<usize> {
    among
        .into_iter()
        .filter(|&k| flows[k].load() >= 1.0 - EPS_LOAD)
        .collect()
}

#[derive(Debug, Clone)]
pub struct BottleneckHunt {
    pub bottlenecks: Vec<Bottleneck>,
    /// Number of load minimizations performed.
    pub iterations: usize,
    /// Suspect-list length going into each minimization.
    pub suspect_counts: Vec<usize>,
    /// Flows at the final minimization.
    pub flows: Vec<LinkFlow>,
}

enum Factor {
    Free,
    Fixed(f64),
}

struct FlowProgram {
    lp: LinearProgram,
    arcs: Vec<(Var, Var)>,
    factor: Option<Var>,
}

impl FlowProgram {
    fn new(p: &LayerProblem, direction: Direction, factor: Factor) -> Self {
        let mut lp = LinearProgram::new(direction);
        let arcs: Vec<(Var, Var)> = p
            .links
            .iter()
            .map(|_| {
                (
                    lp.add_var(0.0, f64::INFINITY),
                    lp.add_var(0.0, f64::INFINITY),
                )
            })
            .collect();
        for &(fw, bw) in &arcs {
            lp.add_constraint([(fw, 1.0), (bw, 1.0)], Relation::Le, 1.0);
        }
        let factor_var = match factor {
            Factor::Free => Some(lp.add_var(0.0, f64::INFINITY)),
            Factor::Fixed(_) => None,
        };
        let mut incident: Vec<Vec<(Var, f64)>> = vec![Vec::new(); p.node_count];
        for (l, &(fw, bw)) in p.links.iter().zip(&arcs) {
            incident[l.a].push((fw, 1.0));
            incident[l.a].push((bw, -1.0));
            incident[l.b].push((fw, -1.0));
            incident[l.b].push((bw, 1.0));
        }
        for (node, mut terms) in incident.into_iter().enumerate() {
            let f = p.flow_out[node];
            let rhs = match (&factor, factor_var) {
                (Factor::Free, Some(v)) => {
                    if f != 0.0 {
                        terms.push((v, -f));
                    }
                    0.0
                }
                (Factor::Fixed(scale), _) => f * scale,
                _ => unreachable!(),
            };
            if terms.is_empty() {
                continue;
            }
            lp.add_constraint(terms, Relation::Eq, rhs);
        }
        FlowProgram {
            lp,
            arcs,
            factor: factor_var,
        }
    }

    fn minimize_load_of(&mut self, links: impl IntoIterator<Item = usize>) {
        let mut terms = Vec::new();
        for k in links {
            let (fw, bw) = self.arcs[k];
            terms.push((fw, 1.0));
            terms.push((bw, 1.0));
        }
        self.lp.set_objective(terms);
    }

    fn solve(
        &self,
        p: &LayerProblem,
        stage: &'static str,
    ) -> Result<(f64, Option<f64>, Vec<LinkFlow>)> {
        let sol = lp::solve(&self.lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(CapillaryError::UnexpectedStatus {
                stage,
                status: sol.status,
            });
        }
        let flows = p
            .links
            .iter()
            .zip(&self.arcs)
            .map(|(&link, &(fw, bw))| LinkFlow {
                link,
                forward: sol.value(fw),
                backward: sol.value(bw),
            })
            .collect();
        Ok((sol.objective, self.factor.map(|v| sol.value(v)), flows))
    }
}

/// Maximizes the proportional flow of the layer.
pub fn maximize_flow(p: &LayerProblem) -> Result<MaxFlow> {
    if p.is_exhausted() {
        return Err(CapillaryError::NoFlow);
    }
    p.check_routable()?;
    let mut prog = FlowProgram::new(p, Direction::Maximize, Factor::Free);
    let fvar = prog.factor.expect("free factor");
    prog.lp.set_objective([(fvar, 1.0)]);
    let (_, factor, flows) = prog.solve(p, "max-flow")?;
    let factor = factor.expect("free factor");
    if factor <= EPS_LOAD {
        // routable groups always admit some positive flow
        return Err(CapillaryError::UnexpectedStatus {
            stage: "max-flow",
            status: LpStatus::Infeasible,
        });
    }
    Ok(MaxFlow { factor, flows })
}

/// Smallest total load of the links `subset` (indices into `p.links()`)
/// over all flows meeting the layer's demands scaled by `factor`.
pub fn min_total_load(
    p: &LayerProblem,
    factor: f64,
    subset: &[usize],
) -> Result<(f64, Vec<LinkFlow>)> {
    let mut prog = FlowProgram::new(p, Direction::Minimize, Factor::Fixed(factor));
    prog.minimize_load_of(subset.iter().copied());
    let (objective, _, flows) = prog.solve(p, "load minimization")?;
    Ok((objective, flows))
}

/// Narrows `suspects` (indices into `p.links()`) down to the links that
/// stay saturated in every flow of size `factor`.
pub fn hunt_bottlenecks(
    p: &LayerProblem,
    factor: f64,
    suspects: &[usize],
) -> Result<BottleneckHunt> {
    let mut suspects = suspects.to_vec();
    let mut suspect_counts = Vec::new();
    loop {
        suspect_counts.push(suspects.len());
        let (_, flows) = min_total_load(p, factor, &suspects)?;
        let kept = saturated(&flows, suspects.iter().copied());
        if kept.len() == suspects.len() {
            let bottlenecks = kept
                .iter()
                .map(|&k| {
                    let (from, to) = flows[k].orientation();
                    Bottleneck { from, to }
                })
                .collect();
            return Ok(BottleneckHunt {
                bottlenecks,
                iterations: suspect_counts.len(),
                suspect_counts,
                flows,
            });
        }
        suspects = kept;
    }
}

/// Removes the bottlenecks and folds the flow they carried into the
/// coefficients of their end nodes.
pub fn next_layer(
    p: &LayerProblem,
    factor: f64,
    bottlenecks: &[Bottleneck],
) -> Result<LayerProblem> {
    let mut removed = Vec::with_capacity(bottlenecks.len());
    for b in bottlenecks {
        let link = b.link();
        if p.links.binary_search(&link).is_err() {
            return Err(CapillaryError::UnknownLink { a: b.from, b: b.to });
        }
        removed.push(link);
    }
    let mut flow_out: Vec<f64> = p.flow_out.iter().map(|f| f * factor).collect();
    for b in bottlenecks {
        flow_out[b.to] += 1.0;
        flow_out[b.from] -= 1.0;
    }
    let links: Vec<Link> = p
        .links
        .iter()
        .copied()
        .filter(|l| !removed.contains(l))
        .collect();
    let mut degree = vec![0usize; p.node_count];
    for l in &links {
        degree[l.a] += 1;
        degree[l.b] += 1;
    }
    for (f, &d) in flow_out.iter_mut().zip(&degree) {
        // a node with no links left has routed everything through its bottlenecks
        if d == 0 || f.abs() < EPS_ZERO {
            *f = 0.0;
        }
    }
    Ok(LayerProblem {
        layer: p.layer + 1,
        node_count: p.node_count,
        links,
        flow_out,
    })
}

/// Routes the remaining demand at unit scale with the least total load.
pub fn complete_min_cost(p: &LayerProblem) -> Result<Vec<LinkFlow>> {
    if p.is_exhausted() {
        return Ok(p
            .links
            .iter()
            .map(|&link| LinkFlow {
                link,
                forward: 0.0,
                backward: 0.0,
            })
            .collect());
    }
    p.check_routable()?;
    let all: Vec<usize> = (0..p.links.len()).collect();
    Ok(min_total_load(p, 1.0, &all)?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// Bottleneck of this layer (1-based).
    Layer(usize),
    /// Carried by the min-cost completion.
    Residual,
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Provenance::Layer(l) => s.serialize_u64(*l as u64),
            Provenance::Residual => s.serialize_str("residual"),
        }
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Layer(usize),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Layer(0) => Err(serde::de::Error::custom("layers are numbered from 1")),
            Repr::Layer(l) => Ok(Provenance::Layer(l)),
            Repr::Tag(t) if t == "residual" => Ok(Provenance::Residual),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "layer must be an integer or \"residual\", got {t:?}"
            ))),
        }
    }
}

/// A link of a finished route, oriented along its flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternLink {
    #[serde(rename = "i")]
    pub from: NodeId,
    #[serde(rename = "j")]
    pub to: NodeId,
    /// Fraction of the end-to-end flow, in (0, 1].
    pub load: f64,
    #[serde(rename = "layer")]
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoutingPattern {
    pub source: NodeId,
    pub sink: NodeId,
    /// `F^1 .. F^L`.
    pub factors: Vec<f64>,
    pub links: Vec<PatternLink>,
}

impl RoutingPattern {
    pub fn endpoints(&self) -> EndpointPair {
        EndpointPair {
            source: self.source,
            sink: self.sink,
        }
    }

    /// Net outflow per node, for nodes `0..node_count`.
    pub fn node_balance(&self, node_count: usize) -> Vec<f64> {
        let mut balance = vec![0.0; node_count];
        for l in &self.links {
            balance[l.from] += l.load;
            balance[l.to] -= l.load;
        }
        balance
    }

    /// Largest deviation from a unit source-to-sink flow.
    pub fn conservation_error(&self) -> f64 {
        let n = self
            .links
            .iter()
            .map(|l| l.from.max(l.to) + 1)
            .chain([self.source + 1, self.sink + 1])
            .max()
            .unwrap_or(0);
        let mut balance = self.node_balance(n);
        balance[self.source] -= 1.0;
        balance[self.sink] += 1.0;
        balance.iter().fold(0.0f64, |m, b| m.max(b.abs()))
    }

    /// Real load carried by the bottlenecks of `layer`.
    pub fn layer_load(&self, layer: usize) -> Option<f64> {
        if layer == 0 || layer > self.factors.len() {
            return None;
        }
        Some(1.0 / self.factors[..layer].iter().product::<f64>())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pattern serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerStats {
    pub layer: usize,
    pub factor: f64,
    pub bottlenecks: usize,
    pub hunt_iterations: usize,
    pub suspect_counts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LayerRecord {
    pub problem: LayerProblem,
    pub max_flow: MaxFlow,
    pub hunt: BottleneckHunt,
}

impl LayerRecord {
    pub fn stats(&self) -> LayerStats {
        LayerStats {
            layer: self.problem.layer,
            factor: self.max_flow.factor,
            bottlenecks: self.hunt.bottlenecks.len(),
            hunt_iterations: self.hunt.iterations,
            suspect_counts: self.hunt.suspect_counts.clone(),
        }
    }
}

/// The layers of one capillarization, from which the pattern capped at
/// any number of layers can be completed.
#[derive(Debug, Clone)]
pub struct CapillaryTrace {
    endpoints: EndpointPair,
    layers: Vec<LayerRecord>,
    remainder: LayerProblem,
}

/// Builds up to `max_layers` layers.
pub fn capillarize(net: &Network, ends: EndpointPair, max_layers: usize) -> Result<CapillaryTrace> {
    if max_layers == 0 {
        return Err(CapillaryError::NoLayers);
    }
    let ends = EndpointPair::new(ends.source, ends.sink, net.node_count())?;
    if !net.connected(ends.source, ends.sink) {
        let comp = net.components();
        let nodes = (0..net.node_count())
            .filter(|&n| comp[n] == comp[ends.source])
            .collect();
        return Err(CapillaryError::Disconnected {
            nodes,
            imbalance: 1.0,
        });
    }
    let mut problem = LayerProblem::initial(net, ends);
    let mut layers = Vec::new();
    while layers.len() < max_layers && !problem.is_exhausted() {
        let max_flow = maximize_flow(&problem)?;
        if max_flow.factor < 1.0 - EPS_LOAD {
            return Err(CapillaryError::FactorBelowOne {
                layer: problem.layer,
                factor: max_flow.factor,
            });
        }
        let hunt = hunt_bottlenecks(&problem, max_flow.factor, &max_flow.saturated())?;
        let next = next_layer(&problem, max_flow.factor, &hunt.bottlenecks)?;
        layers.push(LayerRecord {
            problem: std::mem::replace(&mut problem, next),
            max_flow,
            hunt,
        });
    }
    Ok(CapillaryTrace {
        endpoints: ends,
        layers,
        remainder: problem,
    })
}

impl CapillaryTrace {
    pub fn layers(&self) -> &[LayerRecord] {
        &self.layers
    }

    pub fn endpoints(&self) -> EndpointPair {
        self.endpoints
    }

    /// True if every unit of flow is enclosed in some layer's bottlenecks.
    pub fn is_complete(&self) -> bool {
        self.remainder.is_exhausted()
    }

    pub fn stats(&self) -> Vec<LayerStats> {
        self.layers.iter().map(LayerRecord::stats).collect()
    }

    /// The pattern after `layers` layers with the rest routed at min cost.
    /// Asking for more layers than were built returns the full pattern.
    pub fn pattern_at(&self, layers: usize) -> Result<RoutingPattern> {
        let used = layers.min(self.layers.len());
        let mut factors = Vec::with_capacity(used);
        let mut links = Vec::new();
        let mut scale = 1.0;
        for rec in &self.layers[..used] {
            scale *= rec.max_flow.factor;
            factors.push(rec.max_flow.factor);
            let load = 1.0 / scale;
            links.extend(rec.hunt.bottlenecks.iter().map(|b| PatternLink {
                from: b.from,
                to: b.to,
                load,
                provenance: Provenance::Layer(rec.problem.layer),
            }));
        }
        let residual = if used < self.layers.len() {
            &self.layers[used].problem
        } else {
            &self.remainder
        };
        for flow in complete_min_cost(residual)? {
            let load = flow.load();
            if load < EPS_ZERO {
                continue;
            }
            let (from, to) = flow.orientation();
            links.push(PatternLink {
                from,
                to,
                load: flow.net().abs() / scale,
                provenance: Provenance::Residual,
            });
        }
        links.sort_by_key(|l| (l.provenance, l.from, l.to));
        Ok(RoutingPattern {
            source: self.endpoints.source,
            sink: self.endpoints.sink,
            factors,
            links,
        })
    }
}

/// Capillary routing capped at `max_layers`, with per-layer statistics.
pub fn build_capillary(
    net: &Network,
    ends: EndpointPair,
    max_layers: usize,
) -> Result<(RoutingPattern, Vec<LayerStats>)> {
    let trace = capillarize(net, ends, max_layers)?;
    Ok((trace.pattern_at(max_layers)?, trace.stats()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::fixtures::{diamond, diamond_with_chord, path3};

    fn ends(s: NodeId, t: NodeId) -> EndpointPair {
        EndpointPair { source: s, sink: t }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9
    }

    #[test]
    fn diamond_max_flow_saturates_everything() {
        let p = LayerProblem::initial(&diamond(), ends(0, 3));
        let mf = maximize_flow(&p).unwrap();
        assert!(close(mf.factor, 2.0));
        assert!(mf.flows.iter().all(|f| close(f.load(), 1.0)));
        assert_eq!(mf.saturated(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn path_max_flow_is_one() {
        let p = LayerProblem::initial(&path3(), ends(0, 2));
        let mf = maximize_flow(&p).unwrap();
        assert!(close(mf.factor, 1.0));
        assert!(mf.flows.iter().all(|f| close(f.load(), 1.0)));
    }

    #[test]
    fn disconnected_source_is_named() {
        let net = Network::new(4, &[(0, 1), (2, 3)], None).unwrap();
        let p = LayerProblem::initial(&net, ends(0, 3));
        match maximize_flow(&p).unwrap_err() {
            CapillaryError::Disconnected { nodes, imbalance } => {
                assert_eq!(nodes, vec![0, 1]);
                assert!(close(imbalance, 1.0));
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            capillarize(&net, ends(0, 3), 3),
            Err(CapillaryError::Disconnected { .. })
        ));
    }

    #[test]
    fn exhausted_problem_has_no_max_flow() {
        let net = diamond();
        let p = LayerProblem::new(2, 4, net.links().to_vec(), vec![0.0; 4]).unwrap();
        assert_eq!(maximize_flow(&p).unwrap_err(), CapillaryError::NoFlow);
    }

    #[test]
    fn unbalanced_coefficients_rejected() {
        let net = diamond();
        let err =
            LayerProblem::new(1, 4, net.links().to_vec(), vec![1.0, 0.0, 0.0, -0.5]).unwrap_err();
        assert!(matches!(err, CapillaryError::Unbalanced(_)));
    }

    #[test]
    fn diamond_hunt_keeps_all_four() {
        let p = LayerProblem::initial(&diamond(), ends(0, 3));
        let mf = maximize_flow(&p).unwrap();
        let hunt = hunt_bottlenecks(&p, mf.factor, &mf.saturated()).unwrap();
        assert_eq!(hunt.iterations, 1);
        assert_eq!(hunt.suspect_counts, vec![4]);
        let mut b = hunt.bottlenecks.clone();
        b.sort();
        assert_eq!(
            b,
            vec![
                Bottleneck { from: 0, to: 1 },
                Bottleneck { from: 0, to: 2 },
                Bottleneck { from: 1, to: 3 },
                Bottleneck { from: 2, to: 3 },
            ]
        );
    }

    #[test]
    fn chord_is_not_a_bottleneck() {
        let net = diamond_with_chord();
        let p = LayerProblem::initial(&net, ends(0, 3));
        let mf = maximize_flow(&p).unwrap();
        assert!(close(mf.factor, 2.0));
        // whatever the max-flow basis, a circulation on the chord is optional
        let all: Vec<usize> = (0..p.links().len()).collect();
        let hunt = hunt_bottlenecks(&p, mf.factor, &all).unwrap();
        let mut links: Vec<Link> = hunt.bottlenecks.iter().map(Bottleneck::link).collect();
        links.sort();
        assert_eq!(
            links,
            vec![
                Link::new(0, 1),
                Link::new(0, 2),
                Link::new(1, 3),
                Link::new(2, 3)
            ]
        );
        assert_eq!(hunt.suspect_counts, vec![5, 4]);
    }

    #[test]
    fn sink_filled_by_two_bottlenecks_becomes_neutral() {
        let net = diamond();
        let p = LayerProblem::initial(&net, ends(0, 3));
        let next = next_layer(
            &p,
            2.0,
            &[Bottleneck { from: 1, to: 3 }, Bottleneck { from: 2, to: 3 }],
        )
        .unwrap();
        assert_eq!(next.flow_out()[3], 0.0);
        assert_eq!(next.flow_out()[0], 2.0);
        assert_eq!(next.flow_out()[1], -1.0);
        assert_eq!(next.flow_out()[2], -1.0);
        assert_eq!(next.links(), &[Link::new(0, 1), Link::new(0, 2)]);
        assert_eq!(next.layer(), 2);
    }

    #[test]
    fn relay_feeding_a_bottleneck_becomes_sink() {
        let p = LayerProblem::initial(&path3(), ends(0, 2));
        let next = next_layer(&p, 1.0, &[Bottleneck { from: 1, to: 2 }]).unwrap();
        assert_eq!(next.flow_out(), &[1.0, -1.0, 0.0]);
    }

    #[test]
    fn diamond_terminates_after_one_layer() {
        let p = LayerProblem::initial(&diamond(), ends(0, 3));
        let mf = maximize_flow(&p).unwrap();
        let hunt = hunt_bottlenecks(&p, mf.factor, &mf.saturated()).unwrap();
        let next = next_layer(&p, mf.factor, &hunt.bottlenecks).unwrap();
        assert!(next.is_exhausted());
        assert!(next.links().is_empty());
    }

    #[test]
    fn unknown_bottleneck_rejected() {
        let p = LayerProblem::initial(&path3(), ends(0, 2));
        assert!(matches!(
            next_layer(&p, 1.0, &[Bottleneck { from: 0, to: 2 }]),
            Err(CapillaryError::UnknownLink { a: 0, b: 2 })
        ));
    }

    #[test]
    fn min_cost_of_nothing_is_zero() {
        let net = diamond();
        let p = LayerProblem::new(3, 4, net.links().to_vec(), vec![0.0; 4]).unwrap();
        let flows = complete_min_cost(&p).unwrap();
        assert_eq!(flows.len(), 4);
        assert!(flows.iter().all(|f| f.load() == 0.0));
    }

    #[test]
    fn min_cost_on_single_route() {
        let p = LayerProblem::new(2, 3, path3().links().to_vec(), vec![0.5, 0.0, -0.5]).unwrap();
        let flows = complete_min_cost(&p).unwrap();
        for f in flows {
            assert!(close(f.load(), 0.5));
            assert!(close(f.net(), 0.5));
        }
    }

    #[test]
    fn min_cost_split_does_not_matter() {
        // two disjoint 2-hop routes 0-1-3 and 0-2-3
        let p =
            LayerProblem::new(2, 4, diamond().links().to_vec(), vec![0.5, 0.0, 0.0, -0.5]).unwrap();
        let flows = complete_min_cost(&p).unwrap();
        let cost: f64 = flows.iter().map(LinkFlow::load).sum();
        // every split x + (0.5 - x) over both routes costs 2 * 0.5
        for x in [0.0, 0.1, 0.25, 0.5] {
            assert!(close(cost, 2.0 * x + 2.0 * (0.5 - x)));
        }
    }

    #[test]
    fn diamond_pattern() {
        let (pattern, stats) = build_capillary(&diamond(), ends(0, 3), DEFAULT_MAX_LAYERS).unwrap();
        assert_eq!(stats.len(), 1);
        assert!(close(stats[0].factor, 2.0));
        assert_eq!(stats[0].bottlenecks, 4);
        assert_eq!(stats[0].hunt_iterations, 1);
        assert_eq!(pattern.links.len(), 4);
        for l in &pattern.links {
            assert!(close(l.load, 0.5));
            assert_eq!(l.provenance, Provenance::Layer(1));
        }
        assert!(pattern.conservation_error() < 1e-9);
    }

    #[test]
    fn path_pattern_is_single_path() {
        let (pattern, stats) = build_capillary(&path3(), ends(0, 2), 10).unwrap();
        assert_eq!(stats.len(), 1);
        assert!(close(pattern.factors[0], 1.0));
        assert_eq!(
            pattern
                .links
                .iter()
                .map(|l| (l.from, l.to))
                .collect::<Vec<_>>(),
            vec![(0, 1), (1, 2)]
        );
        assert!(pattern.links.iter().all(|l| close(l.load, 1.0)));
    }

    /// 0 splits to 1 and 2; 1 goes straight to the sink 3, 2 forks again
    /// over 4 and 5. Layer 1 pins 0-1, 0-2, 1-3 at 1/2; layer 2 splits the
    /// rest in quarters.
    fn layered_graph() -> Network {
        Network::new(
            6,
            &[(0, 1), (0, 2), (1, 3), (2, 4), (4, 3), (2, 5), (5, 3)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn two_layer_construction() {
        let trace = capillarize(&layered_graph(), ends(0, 3), 10).unwrap();
        assert_eq!(trace.layers().len(), 2);
        let stats = trace.stats();
        assert!(close(stats[0].factor, 2.0));
        assert_eq!(stats[0].bottlenecks, 3);
        assert!(close(stats[1].factor, 2.0));
        assert_eq!(stats[1].bottlenecks, 4);
        let second = &trace.layers()[1].problem;
        assert_eq!(second.flow_out(), &[0.0, 0.0, 1.0, -1.0, 0.0, 0.0]);
        let p = trace.pattern_at(10).unwrap();
        for l in &p.links {
            let want = match l.provenance {
                Provenance::Layer(1) => 0.5,
                Provenance::Layer(2) => 0.25,
                other => panic!("{other:?}"),
            };
            assert!(close(l.load, want));
        }
    }

    #[test]
    fn capped_pattern_uses_residual_completion() {
        let net = layered_graph();
        let trace = capillarize(&net, ends(0, 3), 10).unwrap();
        for cap in 1..=trace.layers().len() + 1 {
            let p = trace.pattern_at(cap).unwrap();
            assert!(p.conservation_error() < 1e-6, "cap {cap}");
            for l in &p.links {
                assert!(l.load > 0.0 && l.load <= 1.0 + EPS_LOAD);
            }
        }
        assert!(trace.is_complete());
        let full = trace.pattern_at(10).unwrap();
        assert!(full
            .links
            .iter()
            .all(|l| l.provenance != Provenance::Residual));
        let first = trace.pattern_at(1).unwrap();
        if trace.layers().len() > 1 {
            assert!(first
                .links
                .iter()
                .any(|l| l.provenance == Provenance::Residual));
        }
    }

    #[test]
    fn bottleneck_loads_shrink_with_depth() {
        let trace = capillarize(&layered_graph(), ends(0, 3), 10).unwrap();
        let p = trace.pattern_at(10).unwrap();
        let loads: Vec<f64> = (1..=p.factors.len())
            .map(|l| p.layer_load(l).unwrap())
            .collect();
        assert!(loads.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{loads:?}");
    }

    #[test]
    fn zero_layer_cap_rejected() {
        assert_eq!(
            capillarize(&diamond(), ends(0, 3), 0).unwrap_err(),
            CapillaryError::NoLayers
        );
    }

    #[test]
    fn pattern_json_round_trip() {
        let (pattern, _) = build_capillary(&layered_graph(), ends(0, 3), 1).unwrap();
        let text = pattern.to_json();
        assert!(text.contains("\"residual\""));
        assert_eq!(RoutingPattern::from_json(&text).unwrap(), pattern);
        let bad = text.replace("\"residual\"", "\"later\"");
        assert!(RoutingPattern::from_json(&bad).is_err());
    }
}

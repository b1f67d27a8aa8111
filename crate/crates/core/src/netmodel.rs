//! Undirected unit-capacity networks and their JSON form.
//!
//! A [`Network`] is immutable once built. Links are stored canonically:
//! each pair has the smaller node id first and the list is sorted, so two
//! networks with the same link set compare equal and serialize to the same
//! bytes.

use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};
use thiserror::Error;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("malformed network document: {0}")]
    Parse(String),
    #[error("network must have at least one node")]
    NoNodes,
    #[error("link #{index} is a self-loop on node {node}")]
    SelfLoop { index: usize, node: NodeId },
    #[error("link #{index} ({a}, {b}) duplicates an earlier link")]
    DuplicateLink { index: usize, a: NodeId, b: NodeId },
    #[error("link #{index} references node {node}, but the network has {node_count} nodes")]
    DanglingNode {
        index: usize,
        node: NodeId,
        node_count: usize,
    },
    #[error("expected {expected} positions (one per node), got {got}")]
    PositionCount { expected: usize, got: usize },
    #[error("position #{index} is not finite")]
    NonFinitePosition { index: usize },
    #[error("endpoint {node} is out of range for a network of {node_count} nodes")]
    EndpointOutOfRange { node: NodeId, node_count: usize },
    #[error("source and sink must differ (both are {0})")]
    SameEndpoints(NodeId),
}

/// Undirected link, always stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
}

impl Link {
    /// Canonical link between two distinct nodes.
    pub fn new(x: NodeId, y: NodeId) -> Self {
        debug_assert_ne!(x, y);
        if x < y {
            Link { a: x, b: y }
        } else {
            Link { a: y, b: x }
        }
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.a == node || self.b == node
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    node_count: usize,
    links: Vec<Link>,
    positions: Option<Vec<(f64, f64)>>,
}

impl Network {
    /// Validates and canonicalizes. Errors name the offending link by its
    /// index in `links`.
    pub fn new(
        node_count: usize,
        links: &[(NodeId, NodeId)],
        positions: Option<Vec<(f64, f64)>>,
    ) -> Result<Self, NetError> {
        if node_count == 0 {
            return Err(NetError::NoNodes);
        }
        let mut seen = HashSet::with_capacity(links.len());
        let mut canonical = Vec::with_capacity(links.len());
        for (index, &(x, y)) in links.iter().enumerate() {
            for node in [x, y] {
                if node >= node_count {
                    return Err(NetError::DanglingNode {
                        index,
                        node,
                        node_count,
                    });
                }
            }
            if x == y {
                return Err(NetError::SelfLoop { index, node: x });
            }
            let link = Link::new(x, y);
            if !seen.insert(link) {
                return Err(NetError::DuplicateLink { index, a: x, b: y });
            }
            canonical.push(link);
        }
        canonical.sort_unstable();
        if let Some(pos) = &positions {
            if pos.len() != node_count {
                return Err(NetError::PositionCount {
                    expected: node_count,
                    got: pos.len(),
                });
            }
            if let Some(index) = pos
                .iter()
                .position(|p| !p.0.is_finite() || !p.1.is_finite())
            {
                return Err(NetError::NonFinitePosition { index });
            }
        }
        Ok(Network {
            node_count,
            links: canonical,
            positions,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Links in canonical order.
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }

    pub fn adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for l in &self.links {
            adj[l.a].push(l.b);
            adj[l.b].push(l.a);
        }
        adj
    }

    /// Connected-component label per node; labels are dense and assigned
    /// in order of the smallest node id of each component.
    pub fn components(&self) -> Vec<usize> {
        component_labels(self.node_count, self.links.iter().copied())
    }

    pub fn connected(&self, x: NodeId, y: NodeId) -> bool {
        let comp = self.components();
        comp[x] == comp[y]
    }

    pub fn endpoints(&self, source: NodeId, sink: NodeId) -> Result<EndpointPair, NetError> {
        EndpointPair::new(source, sink, self.node_count)
    }
}

/// Component labels for an arbitrary link subset over `node_count` nodes.
pub(crate) fn component_labels(
    node_count: usize,
    links: impl IntoIterator<Item = Link>,
) -> Vec<usize> {
    let mut adj = vec![Vec::new(); node_count];
    for l in links {
        adj[l.a].push(l.b);
        adj[l.b].push(l.a);
    }
    let mut label = vec![usize::MAX; node_count];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..node_count {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointPair {
    pub source: NodeId,
    pub sink: NodeId,
}

impl EndpointPair {
    pub fn new(source: NodeId, sink: NodeId, node_count: usize) -> Result<Self, NetError> {
        for node in [source, sink] {
            if node >= node_count {
                return Err(NetError::EndpointOutOfRange { node, node_count });
            }
        }
        if source == sink {
            return Err(NetError::SameEndpoints(source));
        }
        Ok(EndpointPair { source, sink })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NetworkDoc {
    nodes: usize,
    links: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 2]>>,
}

impl NetworkDoc {
    pub(crate) fn into_network(self) -> Result<Network, NetError> {
        let links: Vec<_> = self.links.iter().map(|l| (l[0], l[1])).collect();
        let positions = self
            .positions
            .map(|p| p.into_iter().map(|[x, y]| (x, y)).collect());
        Network::new(self.nodes, &links, positions)
    }

    pub(crate) fn from_network(net: &Network) -> Self {
        NetworkDoc {
            nodes: net.node_count,
            links: net.links.iter().map(|l| [l.a, l.b]).collect(),
            positions: net
                .positions
                .as_ref()
                .map(|p| p.iter().map(|&(x, y)| [x, y]).collect()),
        }
    }
}

pub fn load_network(document: &str) -> Result<Network, NetError> {
    let doc: NetworkDoc =
        serde_json::from_str(document).map_err(|e| NetError::Parse(e.to_string()))?;
    doc.into_network()
}

/// Canonical compact JSON. `load_network(&save_network(n)) == n`.
pub fn save_network(net: &Network) -> String {
    serde_json::to_string(&NetworkDoc::from_network(net)).expect("network serializes")
}

//! Heteroclinic networks as validated directed graphs.
//!
//! A network is a set of equilibrium nodes joined by directed connections.
//! Validation rejects self-loops (homoclinic connections), parallel duplicates
//! and, unless explicitly relaxed, graphs that are not strongly connected.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated heteroclinic network. Node order is the default spine order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HetNetJson", into = "HetNetJson")]
pub struct HetNet {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
    weak: bool,
}

#[derive(Serialize, Deserialize)]
struct HetNetJson {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    allow_weak: bool,
}

impl TryFrom<HetNetJson> for HetNet {
    type Error = Error;

    fn try_from(doc: HetNetJson) -> Result<Self> {
        let index: HashMap<&str, usize> =
            doc.nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (s, d) in &doc.edges {
            let si = *index.get(s.as_str()).ok_or_else(|| Error::UnknownNode(s.clone()))?;
            let di = *index.get(d.as_str()).ok_or_else(|| Error::UnknownNode(d.clone()))?;
            edges.push((si, di));
        }
        HetNet::build(doc.nodes, edges, doc.allow_weak)
    }
}

impl From<HetNet> for HetNetJson {
    fn from(net: HetNet) -> Self {
        HetNetJson {
            edges: net.edges.iter().map(|&(s, d)| (net.nodes[s].clone(), net.nodes[d].clone())).collect(),
            nodes: net.nodes,
            allow_weak: net.weak,
        }
    }
}

/// Out-degree statistics that size the almost-complete construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub out_degree: Vec<usize>,
    /// Nodes with one or two outgoing connections.
    pub n1: usize,
    /// Nodes with three or more outgoing connections.
    pub n2: usize,
}

impl HetNet {
    /// Builds and validates a strongly connected network.
    pub fn new(nodes: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(nodes, edges, false)
    }

    /// Builds a network, optionally skipping the strong-connectivity check.
    pub fn build(nodes: Vec<String>, edges: Vec<(usize, usize)>, allow_weak: bool) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Schema("network has no nodes".into()));
        }
        let mut seen_labels = HashMap::new();
        for (i, label) in nodes.iter().enumerate() {
            if seen_labels.insert(label.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate node label '{label}'")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &(s, d) in &edges {
            if s >= nodes.len() || d >= nodes.len() {
                return Err(Error::Schema(format!("edge ({s},{d}) out of range")));
            }
            if s == d {
                return Err(Error::Homoclinic(nodes[s].clone()));
            }
            if !seen.insert((s, d)) {
                return Err(Error::DuplicateEdge(nodes[s].clone(), nodes[d].clone()));
            }
        }
        let net = HetNet { nodes, edges, weak: allow_weak };
        if !allow_weak && !net.is_strongly_connected() {
            return Err(Error::NotStronglyConnected(net.unreachable_witness()));
        }
        Ok(net)
    }

    /// Convenience constructor from label pairs.
    pub fn from_labels(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let nodes: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
        let index: HashMap<&str, usize> =
            nodes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut idx_edges = Vec::with_capacity(edges.len());
        for (s, d) in edges {
            let si = *index.get(s).ok_or_else(|| Error::UnknownNode(s.to_string()))?;
            let di = *index.get(d).ok_or_else(|| Error::UnknownNode(d.to_string()))?;
            idx_edges.push((si, di));
        }
        Self::new(nodes, idx_edges)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// True when the strong-connectivity check was skipped at construction.
    pub fn is_weak_allowed(&self) -> bool {
        self.weak
    }

    pub fn label(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|s| s == label)
    }

    /// Indices of edges leaving `node`, in edge order.
    pub fn outgoing(&self, node: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == node).collect()
    }

    /// Indices of edges entering `node`, in edge order.
    pub fn incoming(&self, node: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].1 == node).collect()
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<bool> {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(s, d) in &self.edges {
            if forward {
                adj[s].push(d);
            } else {
                adj[d].push(s);
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Strong connectivity via forward and backward reachability from node 0.
    pub fn is_strongly_connected(&self) -> bool {
        self.reach(0, true).iter().all(|&b| b) && self.reach(0, false).iter().all(|&b| b)
    }

    fn unreachable_witness(&self) -> String {
        let fwd = self.reach(0, true);
        if let Some(v) = fwd.iter().position(|&b| !b) {
            return format!("no path {} -> {}", self.nodes[0], self.nodes[v]);
        }
        let bwd = self.reach(0, false);
        match bwd.iter().position(|&b| !b) {
            Some(v) => format!("no path {} -> {}", self.nodes[v], self.nodes[0]),
            None => "unknown".into(),
        }
    }

    /// Serializes to the `{"nodes":[..],"edges":[[src,dst]..]}` schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&HetNetJson::from(self.clone())).expect("network serialization cannot fail")
    }

    /// Single directed cycle `0 -> 1 -> .. -> n-1 -> 0` with labels `v0..`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParam("a cycle needs at least 2 nodes".into()));
        }
        let nodes = (0..n).map(|i| format!("v{i}")).collect();
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(nodes, edges)
    }
}

/// Parses and validates a network document, requiring strong connectivity.
pub fn parse_hetnet(text: &str) -> Result<HetNet> {
    parse_hetnet_with(text, false)
}

/// Parses a network document; `allow_weak` skips the strong-connectivity check.
pub fn parse_hetnet_with(text: &str, allow_weak: bool) -> Result<HetNet> {
    let mut doc: HetNetJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    doc.allow_weak |= allow_weak;
    HetNet::try_from(doc)
}

pub fn degree_profile(net: &HetNet) -> DegreeProfile {
    let mut out_degree = vec![0usize; net.num_nodes()];
    for &(s, _) in net.edges() {
        out_degree[s] += 1;
    }
    let n1 = out_degree.iter().filter(|&&d| d <= 2).count();
    let n2 = out_degree.len() - n1;
    DegreeProfile { out_degree, n1, n2 }
}

/// Deterministic DOT digraph: nodes in declaration order, one line per edge.
pub fn export_dot(net: &HetNet) -> String {
    let mut out = String::from("digraph hetnet {\n");
    for label in net.nodes() {
        let _ = writeln!(out, "  \"{label}\";");
    }
    for &(s, d) in net.edges() {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", net.label(s), net.label(d));
    }
    out.push_str("}\n");
    out
}

/// Networks that recur across tests, examples and the CLI.
pub mod samples {
    use super::HetNet;

    /// Three nodes a, b, c with two-cycles a<->b and b<->c.
    pub fn two_cycle_chain() -> HetNet {
        HetNet::from_labels(&["a", "b", "c"], &[("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")])
            .expect("fixed network is valid")
    }

    /// Hub h with connections to x, y, z and returns from each.
    pub fn fan_with_returns() -> HetNet {
        HetNet::from_labels(
            &["h", "x", "y", "z"],
            &[("h", "x"), ("h", "y"), ("h", "z"), ("x", "h"), ("y", "h"), ("z", "h")],
        )
        .expect("fixed network is valid")
    }

    /// Four two-cycles sharing the hub h.
    pub fn four_two_cycles() -> HetNet {
        HetNet::from_labels(
            &["h", "a", "b", "c", "d"],
            &[
                ("h", "a"),
                ("a", "h"),
                ("h", "b"),
                ("b", "h"),
                ("h", "c"),
                ("c", "h"),
                ("h", "d"),
                ("d", "h"),
            ],
        )
        .expect("fixed network is valid")
    }

    /// Double-next-neighbour network on `n` nodes labelled `1..=n`:
    /// node i sends to i+1 and i+2 (mod n), edges listed source by source.
    pub fn dnn(n: usize) -> HetNet {
        assert!(n >= 4, "double-next-neighbour networks need n >= 4");
        let nodes = (1..=n).map(|i| i.to_string()).collect();
        let mut edges = Vec::with_capacity(2 * n);
        for i in 0..n {
            edges.push((i, (i + 1) % n));
            edges.push((i, (i + 2) % n));
        }
        HetNet::new(nodes, edges).expect("dnn network is valid")
    }
}

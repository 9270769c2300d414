use serde::{Deserialize, Serialize};

use super::arc::{attach_span, same_page_distance};
use super::{
    adjust_crossings, alphas_q_with, assemble, assign_subspaces, build_arc2d, build_arc3d, choose_alphas_bookembed,
    AlphaTable, Arc, Arc2dSpec, Arc3dSpec, CrossingReport, LocalKind, RealizationConfig, SynthesizedField,
};
use crate::book::{arcs_cross, validate_embedding, BookEmbedding, SpineOrder};
use crate::ccn::{build_pn, build_q, Ccn, SubspaceId};
use crate::error::{Error, Result};
use crate::graph::{degree_profile, HetNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationMode {
    /// One 2D synchrony subspace per page of a book embedding.
    Book,
    /// Own 2D or 3D synchrony subspace per node.
    AlmostComplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    Planar,
    Spatial,
}

/// One realized arc of an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub edge: usize,
    pub source: usize,
    pub target: usize,
    pub subspace: SubspaceId,
    pub kind: ConnectionKind,
    /// Half-plane of a planar connection, 0 for spatial ones.
    pub half: i8,
    /// Departure angle of a spatial connection.
    pub angle: f64,
    pub doubled: bool,
    /// Index into the field's arc list.
    pub arc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRealization {
    pub node: usize,
    pub label: String,
    pub rho: f64,
    /// Synchrony subspaces in which the node is unstable.
    pub unstable: Vec<SubspaceId>,
}

/// A network realized as a coupled cell system with a synthesized coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub mode: RealizationMode,
    pub network: HetNet,
    pub ccn: Ccn,
    pub embedding: Option<BookEmbedding>,
    pub alphas: AlphaTable,
    pub rho: Vec<f64>,
    pub nodes: Vec<NodeRealization>,
    pub connections: Vec<Connection>,
    pub crossings: CrossingReport,
    pub field: SynthesizedField,
}

impl Realization {
    pub fn config(&self) -> &RealizationConfig {
        self.field.config()
    }

    /// Equilibrium of node `i` in the full cell state.
    pub fn equilibrium(&self, node: usize) -> Vec<f64> {
        vec![self.rho[node]; self.ccn.cells]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("realization serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Assigns each 2D arc a unique lane within its half-plane: arcs with shorter
/// runs between their stub ends get lower lanes, and arcs passing over a node
/// never use the lowest lane.
fn assign_lanes(specs: &mut [Arc2dSpec], rho: &[f64], cfg: &RealizationConfig) -> Result<()> {
    let spans: Vec<(f64, f64)> = specs.iter().map(|s| attach_span(s, cfg)).collect::<Result<_>>()?;
    for half in [1i8, -1] {
        let mut idx: Vec<usize> = (0..specs.len()).filter(|&i| specs[i].half == half).collect();
        let key = |i: usize| {
            let s = &specs[i];
            let (lo, hi) = (s.rho_s.min(s.rho_t), s.rho_s.max(s.rho_t));
            let over = rho.iter().any(|&r| r > lo + 1e-12 && r < hi - 1e-12);
            (over, (spans[i].1 - spans[i].0).abs(), s.edge, s.doubled)
        };
        idx.sort_by(|&a, &b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2)).then(ka.3.cmp(&kb.3))
        });
        let spans: Vec<bool> = idx.iter().map(|&i| key(i).0).collect();
        for (rank, &i) in idx.iter().enumerate() {
            let spans = spans[rank];
            specs[i].lane = if spans { rank.max(1) } else { rank };
        }
    }
    Ok(())
}

fn check_same_page(arcs: &[Arc], cfg: &RealizationConfig) -> Result<()> {
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            let (a, b) = (&arcs[i], &arcs[j]);
            if a.dim != 2 || b.dim != 2 || a.subspace != b.subspace || a.half != b.half || a.target == b.target {
                continue;
            }
            if same_page_distance(a, b) < 2.0 * cfg.tube_radius {
                return Err(Error::Synthesis(format!(
                    "arcs of edges {} and {} come too close inside {}",
                    a.edge, b.edge, a.subspace
                )));
            }
        }
    }
    Ok(())
}

fn finish(
    mode: RealizationMode,
    net: &HetNet,
    ccn: Ccn,
    embedding: Option<BookEmbedding>,
    alphas: AlphaTable,
    rho: Vec<f64>,
    unstable: Vec<Vec<SubspaceId>>,
    mut arcs: Vec<Arc>,
    kind: LocalKind,
    cfg: &RealizationConfig,
) -> Result<Realization> {
    let crossings = adjust_crossings(&mut arcs, cfg)?;
    check_same_page(&arcs, cfg)?;
    let connections = arcs
        .iter()
        .enumerate()
        .map(|(i, a)| Connection {
            edge: a.edge,
            source: a.source,
            target: a.target,
            subspace: a.subspace,
            kind: if a.dim == 2 { ConnectionKind::Planar } else { ConnectionKind::Spatial },
            half: a.half,
            angle: a.sector_angle,
            doubled: a.doubled,
            arc: i,
        })
        .collect();
    let nodes = unstable
        .into_iter()
        .enumerate()
        .map(|(v, unstable)| NodeRealization { node: v, label: net.label(v).to_string(), rho: rho[v], unstable })
        .collect();
    let field = assemble(&ccn, &alphas, &rho, kind, arcs, cfg)?;
    Ok(Realization { mode, network: net.clone(), ccn, embedding, alphas, rho, nodes, connections, crossings, field })
}

/// Realizes a network on P_k from a constrained book embedding with k pages.
///
/// A node with a single outgoing connection gets a mirrored copy of its arc
/// in the empty half of the same page whenever that copy crosses nothing.
pub fn realize_book(net: &HetNet, emb: &BookEmbedding, cfg: &RealizationConfig) -> Result<Realization> {
    cfg.validate()?;
    if emb.placements.len() != net.num_edges() {
        return Err(Error::Dimension { expected: net.num_edges(), got: emb.placements.len() });
    }
    let violations = validate_embedding(net, emb);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidParam(format!("embedding is not valid: {v}")));
    }
    let k = emb.pages;
    let ccn = build_pn(k)?;
    let alphas = choose_alphas_bookembed(net, emb)?;
    let spine = SpineOrder { order: emb.spine.order.clone(), spacing: cfg.spacing };
    let rho = spine.rho();
    let edges = net.edges();
    let mut specs = Vec::new();
    for (e, &(s, t)) in edges.iter().enumerate() {
        let p = emb.placements[e];
        let spec = Arc2dSpec {
            edge: e,
            source: s,
            target: t,
            rho_s: rho[s],
            rho_t: rho[t],
            alpha_s: alphas.row(s).to_vec(),
            alpha_t: alphas.row(t).to_vec(),
            slot: p.page,
            half: p.half,
            lane: 0,
            types: k,
            jogs: Vec::new(),
            doubled: false,
        };
        if net.outgoing(s).len() == 1 {
            let mirror_free = (0..edges.len()).all(|f| {
                let q = emb.placements[f];
                f == e || q.page != p.page || q.half != -p.half || !arcs_cross(&spine, edges[e], edges[f])
            });
            if mirror_free {
                specs.push(Arc2dSpec { half: -p.half, doubled: true, ..spec.clone() });
            }
        }
        specs.push(spec);
    }
    specs.sort_by_key(|s| (s.edge, s.doubled));
    assign_lanes(&mut specs, &rho, cfg)?;
    let arcs = specs.iter().map(|s| build_arc2d(s, cfg)).collect::<Result<Vec<_>>>()?;
    let unstable = (0..net.num_nodes())
        .map(|v| {
            let mut pages: Vec<usize> = net.outgoing(v).iter().map(|&e| emb.placements[e].page).collect();
            pages.sort_unstable();
            pages.dedup();
            pages.into_iter().map(SubspaceId::TwoD).collect()
        })
        .collect();
    finish(RealizationMode::Book, net, ccn, Some(emb.clone()), alphas, rho, unstable, arcs, LocalKind::Ball, cfg)
}

/// Realizes a network on Q(n1, n2): nodes with at most two outgoing
/// connections use their own 2D subspace, the others a 3D pair subspace.
pub fn realize_almost_complete(net: &HetNet, cfg: &RealizationConfig) -> Result<Realization> {
    cfg.validate()?;
    let profile = degree_profile(net);
    if profile.out_degree.contains(&0) {
        return Err(Error::InvalidParam("every node needs an outgoing connection".into()));
    }
    let ccn = build_q(profile.n1, profile.n2)?;
    let types = ccn.types;
    let assignment = assign_subspaces(&profile);
    let alphas = alphas_q_with(&profile, &assignment, cfg.hub_pair)?;
    let rho: Vec<f64> = (0..net.num_nodes()).map(|i| i as f64 * cfg.spacing).collect();
    let edges = net.edges();
    let mut specs = Vec::new();
    let mut hubs = Vec::new();
    for v in 0..net.num_nodes() {
        let out = net.outgoing(v);
        match assignment[v] {
            SubspaceId::TwoD(j) => {
                let make = |e: usize, half: i8, doubled: bool| Arc2dSpec {
                    edge: e,
                    source: v,
                    target: edges[e].1,
                    rho_s: rho[v],
                    rho_t: rho[edges[e].1],
                    alpha_s: alphas.row(v).to_vec(),
                    alpha_t: alphas.row(edges[e].1).to_vec(),
                    slot: j,
                    half,
                    lane: 0,
                    types,
                    jogs: Vec::new(),
                    doubled,
                };
                if out.len() == 1 {
                    specs.push(make(out[0], 1, false));
                    specs.push(make(out[0], -1, true));
                } else {
                    specs.push(make(out[0], 1, false));
                    specs.push(make(out[1], -1, false));
                }
            }
            SubspaceId::ThreeD(a, b) => hubs.push(Arc3dSpec {
                source: v,
                rho_s: rho[v],
                pair: (a, b),
                targets: out.iter().map(|&e| (e, edges[e].1, rho[edges[e].1])).collect(),
            }),
            SubspaceId::Full => unreachable!("assignment never uses the diagonal"),
        }
    }
    assign_lanes(&mut specs, &rho, cfg)?;
    let mut arcs = specs.iter().map(|s| build_arc2d(s, cfg)).collect::<Result<Vec<_>>>()?;
    for h in &hubs {
        arcs.extend(build_arc3d(h, cfg)?);
    }
    arcs.sort_by_key(|a| (a.edge, a.doubled));
    let unstable = assignment.iter().map(|&s| vec![s]).collect();
    finish(RealizationMode::AlmostComplete, net, ccn, None, alphas, rho, unstable, arcs, LocalKind::Cylinder, cfg)
}

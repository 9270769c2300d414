//! Constrained book embeddings of heteroclinic networks.
//!
//! Nodes sit on a spine; every edge lives in one page, in one of the page's
//! two half-planes. On top of the usual no-crossing rule, each node is purely
//! a source or purely a sink within a page, and sends at most one edge into
//! each half-plane of a page.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::HetNet;

/// Spine order: `order[r]` is the node at spine rank `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpineOrder {
    pub order: Vec<usize>,
    pub spacing: f64,
}

impl SpineOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &v in &order {
            if v >= order.len() || seen[v] {
                return Err(Error::InvalidParam("spine order is not a permutation".into()));
            }
            seen[v] = true;
        }
        Ok(SpineOrder { order, spacing: 1.0 })
    }

    pub fn identity(n: usize) -> Self {
        SpineOrder { order: (0..n).collect(), spacing: 1.0 }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    /// Spine rank of every node.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (r, &v) in self.order.iter().enumerate() {
            rank[v] = r;
        }
        rank
    }

    /// Spine coordinate ρ_i = rank · spacing for every node.
    pub fn rho(&self) -> Vec<f64> {
        self.ranks().into_iter().map(|r| r as f64 * self.spacing).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        SpineOrder { order, spacing: self.spacing }
    }
}

/// Page (1-based) and half-plane (+1 upper, −1 lower) of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePlacement {
    pub page: usize,
    pub half: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookEmbedding {
    pub spine: SpineOrder,
    /// Indexed by edge index of the network the embedding belongs to.
    pub placements: Vec<EdgePlacement>,
    pub pages: usize,
}

/// Which constraint a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// A node has both incoming and outgoing edges on one page.
    InOutExclusivity,
    /// A node has two outgoing edges on one half-plane of a page.
    OutgoingPerHalf,
    /// Two edges on one half-plane interleave along the spine.
    Crossing,
    /// Placement data is malformed (page out of range, bad half, missing edge).
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub page: usize,
    pub half: Option<i8>,
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rule = match self.rule {
            Rule::InOutExclusivity => "in/out exclusivity",
            Rule::OutgoingPerHalf => "outgoing per half-plane",
            Rule::Crossing => "crossing",
            Rule::Malformed => "malformed placement",
        };
        write!(f, "{rule} on page {}", self.page)?;
        if let Some(h) = self.half {
            write!(f, " half {h:+}")?;
        }
        write!(f, " (nodes {:?}, edges {:?})", self.nodes, self.edges)
    }
}

/// Interleaving test on spine ranks. Edges sharing an endpoint never cross.
pub fn arcs_cross(spine: &SpineOrder, e1: (usize, usize), e2: (usize, usize)) -> bool {
    let rank = spine.ranks();
    cross_by_rank(&rank, e1, e2)
}

fn cross_by_rank(rank: &[usize], e1: (usize, usize), e2: (usize, usize)) -> bool {
    let (a, b) = (rank[e1.0], rank[e1.1]);
    let (c, d) = (rank[e2.0], rank[e2.1]);
    if a == c || a == d || b == c || b == d {
        return false;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let inside = |x: usize| lo < x && x < hi;
    inside(c) != inside(d)
}

/// Lists every constraint violation; an empty list means the embedding is valid.
pub fn validate_embedding(net: &HetNet, emb: &BookEmbedding) -> Vec<Violation> {
    let mut out = Vec::new();
    let edges = net.edges();
    if emb.placements.len() != edges.len() || emb.spine.order.len() != net.num_nodes() {
        out.push(Violation {
            rule: Rule::Malformed,
            page: 0,
            half: None,
            nodes: vec![],
            edges: vec![],
        });
        return out;
    }
    for (e, p) in emb.placements.iter().enumerate() {
        if p.page == 0 || p.page > emb.pages || (p.half != 1 && p.half != -1) {
            out.push(Violation {
                rule: Rule::Malformed,
                page: p.page,
                half: Some(p.half),
                nodes: vec![edges[e].0, edges[e].1],
                edges: vec![e],
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let rank = emb.spine.ranks();
    for page in 1..=emb.pages {
        for v in 0..net.num_nodes() {
            let outs: Vec<usize> = (0..edges.len())
                .filter(|&e| emb.placements[e].page == page && edges[e].0 == v)
                .collect();
            let ins: Vec<usize> = (0..edges.len())
                .filter(|&e| emb.placements[e].page == page && edges[e].1 == v)
                .collect();
            if !outs.is_empty() && !ins.is_empty() {
                let mut es = outs.clone();
                es.extend(&ins);
                out.push(Violation {
                    rule: Rule::InOutExclusivity,
                    page,
                    half: None,
                    nodes: vec![v],
                    edges: es,
                });
            }
            for half in [1i8, -1] {
                let same: Vec<usize> =
                    outs.iter().copied().filter(|&e| emb.placements[e].half == half).collect();
                if same.len() > 1 {
                    out.push(Violation {
                        rule: Rule::OutgoingPerHalf,
                        page,
                        half: Some(half),
                        nodes: vec![v],
                        edges: same,
                    });
                }
            }
        }
        for half in [1i8, -1] {
            let here: Vec<usize> = (0..edges.len())
                .filter(|&e| emb.placements[e].page == page && emb.placements[e].half == half)
                .collect();
            for (i, &e1) in here.iter().enumerate() {
                for &e2 in &here[i + 1..] {
                    if cross_by_rank(&rank, edges[e1], edges[e2]) {
                        out.push(Violation {
                            rule: Rule::Crossing,
                            page,
                            half: Some(half),
                            nodes: vec![edges[e1].0, edges[e1].1, edges[e2].0, edges[e2].1],
                            edges: vec![e1, e2],
                        });
                    }
                }
            }
        }
    }
    out
}

/// Incremental feasibility state shared by the greedy and exact solvers.
struct PlacementState<'a> {
    edges: &'a [(usize, usize)],
    rank: Vec<usize>,
    n: usize,
    /// role[page][node]: 0 none, 1 source, 2 sink.
    role: Vec<Vec<u8>>,
    /// role_count[page][node] number of edges giving the node its role.
    role_count: Vec<Vec<u16>>,
    out_used: Vec<[Vec<bool>; 2]>,
    slots: Vec<[Vec<usize>; 2]>,
}

impl<'a> PlacementState<'a> {
    fn new(edges: &'a [(usize, usize)], rank: Vec<usize>, n: usize, max_pages: usize) -> Self {
        PlacementState {
            edges,
            rank,
            n,
            role: vec![vec![0; n]; max_pages],
            role_count: vec![vec![0; n]; max_pages],
            out_used: (0..max_pages).map(|_| [vec![false; n], vec![false; n]]).collect(),
            slots: (0..max_pages).map(|_| [Vec::new(), Vec::new()]).collect(),
        }
    }

    fn ensure_pages(&mut self, pages: usize) {
        while self.role.len() < pages {
            self.role.push(vec![0; self.n]);
            self.role_count.push(vec![0; self.n]);
            self.out_used.push([vec![false; self.n], vec![false; self.n]]);
            self.slots.push([Vec::new(), Vec::new()]);
        }
    }

    fn half_idx(half: i8) -> usize {
        if half > 0 {
            0
        } else {
            1
        }
    }

    fn can_place(&self, e: usize, page: usize, half: i8) -> bool {
        let (s, d) = self.edges[e];
        let h = Self::half_idx(half);
        if self.role[page][s] == 2 || self.role[page][d] == 1 {
            return false;
        }
        if self.out_used[page][h][s] {
            return false;
        }
        self.slots[page][h]
            .iter()
            .all(|&o| !cross_by_rank(&self.rank, self.edges[e], self.edges[o]))
    }

    fn place(&mut self, e: usize, page: usize, half: i8) {
        let (s, d) = self.edges[e];
        let h = Self::half_idx(half);
        self.role[page][s] = 1;
        self.role_count[page][s] += 1;
        self.role[page][d] = 2;
        self.role_count[page][d] += 1;
        self.out_used[page][h][s] = true;
        self.slots[page][h].push(e);
    }

    fn unplace(&mut self, e: usize, page: usize, half: i8) {
        let (s, d) = self.edges[e];
        let h = Self::half_idx(half);
        for v in [s, d] {
            self.role_count[page][v] -= 1;
            if self.role_count[page][v] == 0 {
                self.role[page][v] = 0;
            }
        }
        self.out_used[page][h][s] = false;
        let pos = self.slots[page][h].iter().rposition(|&x| x == e).expect("placed edge");
        self.slots[page][h].remove(pos);
    }
}

/// First-fit placement in edge order, trying both halves of every open page
/// before opening a new one.
pub fn greedy_embed(net: &HetNet, spine: &SpineOrder) -> BookEmbedding {
    let edges = net.edges();
    let mut st = PlacementState::new(edges, spine.ranks(), net.num_nodes(), 1);
    let mut pages = 0usize;
    let mut placements = Vec::with_capacity(edges.len());
    for e in 0..edges.len() {
        let mut chosen = None;
        'search: for page in 0..pages {
            for half in [1i8, -1] {
                if st.can_place(e, page, half) {
                    chosen = Some((page, half));
                    break 'search;
                }
            }
        }
        let (page, half) = chosen.unwrap_or_else(|| {
            pages += 1;
            st.ensure_pages(pages);
            (pages - 1, 1)
        });
        st.place(e, page, half);
        placements.push(EdgePlacement { page: page + 1, half });
    }
    BookEmbedding { spine: spine.clone(), placements, pages }
}

/// Outcome of the exact solver.
#[derive(Debug, Clone)]
pub struct Thickness {
    pub k: usize,
    pub embedding: BookEmbedding,
    /// False when the time limit stopped the search before proving optimality.
    pub optimal: bool,
}

/// Size bound for the exhaustive solver.
pub const EXACT_MAX_NODES: usize = 8;
pub const EXACT_MAX_EDGES: usize = 20;

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

struct Search<'a, 'b> {
    st: PlacementState<'a>,
    k: usize,
    assign: Vec<(usize, i8)>,
    deadline: Option<Instant>,
    ticks: u64,
    timed_out: bool,
    order: &'b [usize],
}

impl Search<'_, '_> {
    fn dfs(&mut self, idx: usize, used: usize) -> bool {
        if idx == self.order.len() {
            return true;
        }
        self.ticks += 1;
        if self.ticks % 1024 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            return false;
        }
        let e = self.order[idx];
        let limit = (used + 1).min(self.k);
        for page in 0..limit {
            let halves: &[i8] = if page == used { &[1] } else { &[1, -1] };
            for &half in halves {
                if self.st.can_place(e, page, half) {
                    self.st.place(e, page, half);
                    self.assign[e] = (page, half);
                    let new_used = used.max(page + 1);
                    if self.dfs(idx + 1, new_used) {
                        return true;
                    }
                    self.st.unplace(e, page, half);
                    if self.timed_out {
                        return false;
                    }
                }
            }
        }
        false
    }
}

/// Minimal page count over all spine orders (up to reversal) and placements.
///
/// Spines are scanned in lexicographic order for each candidate `k`, so the
/// returned embedding is the first optimal one in that order.
pub fn exact_thickness(net: &HetNet, max_pages: usize, time_limit: Duration) -> Result<Thickness> {
    let n = net.num_nodes();
    let edges = net.edges();
    if n > EXACT_MAX_NODES || edges.len() > EXACT_MAX_EDGES {
        return Err(Error::SizeGuard(format!(
            "exact solver limited to {EXACT_MAX_NODES} nodes / {EXACT_MAX_EDGES} edges"
        )));
    }
    let start = Instant::now();
    let deadline = start + time_limit;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = greedy_embed(net, &SpineOrder::identity(n));
    loop {
        if n < 2 || perm[0] < perm[n - 1] {
            let g = greedy_embed(net, &SpineOrder { order: perm.clone(), spacing: 1.0 });
            if g.pages < best.pages {
                best = g;
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }

    let mut out_deg = vec![0usize; n];
    for &(s, _) in edges {
        out_deg[s] += 1;
    }
    let mut lower = out_deg.iter().map(|d| d.div_ceil(2)).max().unwrap_or(0);
    // A node with both roles needs one page per role.
    let has_both = (0..n).any(|v| out_deg[v] > 0 && edges.iter().any(|&(_, d)| d == v));
    if has_both {
        lower = lower.max(2);
    }
    for v in 0..n {
        if edges.iter().any(|&(_, d)| d == v) {
            lower = lower.max(out_deg[v].div_ceil(2) + 1);
        }
    }

    let order: Vec<usize> = (0..edges.len()).collect();
    let mut k = lower.max(1);
    while k < best.pages {
        if k > max_pages {
            break;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            if n < 2 || perm[0] < perm[n - 1] {
                let spine = SpineOrder { order: perm.clone(), spacing: 1.0 };
                let mut search = Search {
                    st: PlacementState::new(edges, spine.ranks(), n, k),
                    k,
                    assign: vec![(0, 1); edges.len()],
                    deadline: Some(deadline),
                    ticks: 0,
                    timed_out: false,
                    order: &order,
                };
                if search.dfs(0, 0) {
                    let placements = search
                        .assign
                        .iter()
                        .map(|&(p, h)| EdgePlacement { page: p + 1, half: h })
                        .collect();
                    return Ok(Thickness {
                        k,
                        embedding: BookEmbedding { spine, placements, pages: k },
                        optimal: true,
                    });
                }
                if search.timed_out {
                    return Ok(Thickness { k: best.pages, embedding: best, optimal: false });
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        k += 1;
    }
    if best.pages > max_pages {
        return Err(Error::Infeasible(format!(
            "no constrained embedding with at most {max_pages} pages"
        )));
    }
    Ok(Thickness { k: best.pages, embedding: best, optimal: true })
}

/// Which pair of connections shares a page in the double-next-neighbour layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DnnMode {
    /// The two connections entering a node share a page.
    IncomingPairs,
    /// The two connections leaving a node share a page (one per half-plane).
    OutgoingPairs,
}

/// Explicit page assignment for the double-next-neighbour network on `n`
/// nodes (see [`crate::graph::samples::dnn`] for the matching edge order).
/// Half-planes are chosen by two-colouring each page's conflict graph.
pub fn dnn_embedding(n: usize, mode: DnnMode) -> Result<BookEmbedding> {
    if n < 4 {
        return Err(Error::InvalidParam("double-next-neighbour layout needs n >= 4".into()));
    }
    let net = crate::graph::samples::dnn(n);
    // Edge 2i is i -> i+1, edge 2i+1 is i -> i+2 (0-based nodes).
    let mut page = vec![0usize; 2 * n];
    match mode {
        DnnMode::IncomingPairs => {
            for i in 0..n - 2 {
                page[2 * i] = i % 3 + 1;
                page[2 * i + 1] = (i + 1) % 3 + 1;
            }
            // node n-2 -> n-1 shares the page of n-3 -> n-1.
            let k = page[2 * (n - 3) + 1];
            page[2 * (n - 2)] = k;
            let (returns, last) = match k {
                1 => (4, 5),
                2 => (3, 1),
                _ => (4, 1),
            };
            page[2 * (n - 2) + 1] = returns; // n-2 -> 0
            page[2 * (n - 1)] = returns; // n-1 -> 0
            page[2 * (n - 1) + 1] = last; // n-1 -> 1
        }
        DnnMode::OutgoingPairs => {
            let targets = |i: usize| [(i + 1) % n, (i + 2) % n];
            let mut node_page = vec![0usize; n];
            let mut opened = 3;
            for i in 0..n {
                let preferred = i % 3 + 1;
                let clash = (0..i).any(|j| {
                    node_page[j] == preferred && (targets(i).contains(&j) || targets(j).contains(&i))
                });
                node_page[i] = if clash {
                    opened += 1;
                    opened
                } else {
                    preferred
                };
                page[2 * i] = node_page[i];
                page[2 * i + 1] = node_page[i];
            }
        }
    }
    let pages = *page.iter().max().expect("non-empty");
    let spine = SpineOrder::identity(n);
    let halves = assign_halves(&net, &spine, &page, pages)?;
    let placements = page
        .iter()
        .zip(&halves)
        .map(|(&p, &h)| EdgePlacement { page: p, half: h })
        .collect();
    Ok(BookEmbedding { spine, placements, pages })
}

/// Two-colours the edges of every page so crossing edges and edges with a
/// common source land in opposite half-planes.
pub fn assign_halves(net: &HetNet, spine: &SpineOrder, page: &[usize], pages: usize) -> Result<Vec<i8>> {
    let edges = net.edges();
    let rank = spine.ranks();
    let mut half = vec![0i8; edges.len()];
    for p in 1..=pages {
        let here: Vec<usize> = (0..edges.len()).filter(|&e| page[e] == p).collect();
        let conflict = |a: usize, b: usize| {
            edges[a].0 == edges[b].0 || cross_by_rank(&rank, edges[a], edges[b])
        };
        for &root in &here {
            if half[root] != 0 {
                continue;
            }
            half[root] = 1;
            let mut stack = vec![root];
            while let Some(a) = stack.pop() {
                for &b in &here {
                    if b != a && conflict(a, b) {
                        if half[b] == 0 {
                            half[b] = -half[a];
                            stack.push(b);
                        } else if half[b] == half[a] {
                            return Err(Error::Infeasible(format!(
                                "page {p} cannot be split into two half-planes"
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(half)
}

#[derive(Serialize, Deserialize)]
struct EmbeddingJson {
    spine: Vec<String>,
    pages: usize,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    src: String,
    dst: String,
    page: usize,
    half: i8,
}

/// Serializes to `{"spine":[..],"pages":k,"edges":[{"src","dst","page","half"}..]}`.
pub fn embedding_to_json(net: &HetNet, emb: &BookEmbedding) -> String {
    let doc = EmbeddingJson {
        spine: emb.spine.order.iter().map(|&v| net.label(v).to_string()).collect(),
        pages: emb.pages,
        edges: net
            .edges()
            .iter()
            .zip(&emb.placements)
            .map(|(&(s, d), p)| EdgeJson {
                src: net.label(s).to_string(),
                dst: net.label(d).to_string(),
                page: p.page,
                half: p.half,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("embedding serialization cannot fail")
}

/// Parses an embedding document against `net`; every network edge must appear once.
pub fn parse_embedding_json(net: &HetNet, text: &str) -> Result<BookEmbedding> {
    let doc: EmbeddingJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let idx = |l: &str| net.index_of(l).ok_or_else(|| Error::UnknownNode(l.to_string()));
    let order = doc.spine.iter().map(|l| idx(l)).collect::<Result<Vec<_>>>()?;
    let spine = SpineOrder::new(order)?;
    let mut placements = vec![None; net.num_edges()];
    for e in &doc.edges {
        let (s, d) = (idx(&e.src)?, idx(&e.dst)?);
        let ei = net
            .edges()
            .iter()
            .position(|&x| x == (s, d))
            .ok_or_else(|| Error::Schema(format!("edge {} -> {} not in network", e.src, e.dst)))?;
        placements[ei] = Some(EdgePlacement { page: e.page, half: e.half });
    }
    let placements = placements
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::Schema(format!("edge {i} has no placement"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(BookEmbedding { spine, placements, pages: doc.pages })
}

const PAGE_COLORS: [&str; 8] =
    ["#377eb8", "#e41a1c", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999"];

/// One panel per page: spine horizontal, arcs as semicircles above or below.
pub fn render_embedding_svg(net: &HetNet, emb: &BookEmbedding) -> String {
    let n = net.num_nodes();
    let unit = 60.0;
    let panel_w = unit * (n as f64 + 1.0);
    let panel_h = unit * (n as f64).max(2.0) + 40.0;
    let width = panel_w * emb.pages as f64;
    let rank = emb.spine.ranks();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{panel_h:.0}\" viewBox=\"0 0 {width:.0} {panel_h:.0}\">"
    );
    for page in 1..=emb.pages {
        let x0 = panel_w * (page - 1) as f64;
        let cy = panel_h / 2.0;
        let color = PAGE_COLORS[(page - 1) % PAGE_COLORS.len()];
        let _ = writeln!(s, "<g id=\"page{page}\">");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"16\" font-size=\"12\" font-family=\"sans-serif\">page {page}</text>",
            x0 + 8.0
        );
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{cy:.1}\" x2=\"{:.1}\" y2=\"{cy:.1}\" stroke=\"black\"/>",
            x0 + unit * 0.5,
            x0 + panel_w - unit * 0.5
        );
        for (e, &(a, b)) in net.edges().iter().enumerate() {
            let p = emb.placements[e];
            if p.page != page {
                continue;
            }
            let xa = x0 + unit * (rank[a] as f64 + 1.0);
            let xb = x0 + unit * (rank[b] as f64 + 1.0);
            let r = (xb - xa).abs() / 2.0;
            // SVG arc sweep flag chooses the side of the chord.
            let sweep = if (xb > xa) == (p.half > 0) { 1 } else { 0 };
            let _ = writeln!(
                s,
                "<path d=\"M {xa:.1} {cy:.1} A {r:.1} {r:.1} 0 0 {sweep} {xb:.1} {cy:.1}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>"
            );
        }
        for v in 0..n {
            let x = x0 + unit * (rank[v] as f64 + 1.0);
            let _ = writeln!(s, "<circle cx=\"{x:.1}\" cy=\"{cy:.1}\" r=\"4\" fill=\"black\"/>");
            let _ = writeln!(
                s,
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>",
                cy + 16.0,
                net.label(v)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

//! Synthesis of the scalar coupling function that realizes a network.
//!
//! The function is a sum of local linear terms around the synchronous
//! equilibria and flow tubes following lifted connection arcs.

mod arc;
mod field;
mod realize;
mod tube;

pub use arc::{
    adjust_crossings, build_arc2d, build_arc3d, page_eigendirection, sector_angles, transverse_point,
    transverse_polar, Arc, Arc2dSpec, Arc3dSpec, ArcSample, CrossingCase, CrossingEntry, CrossingReport, Jog, JogSite,
};
pub use field::{assemble, LocalKind, LocalRegion, PerturbBump, SynthesizedField};
pub use realize::{
    realize_almost_complete, realize_book, Connection, ConnectionKind, NodeRealization, Realization,
    RealizationMode,
};
pub use tube::{lift_and_tube, lift_table, Clip, Tube, TubeHit};

use serde::{Deserialize, Serialize};

use crate::book::BookEmbedding;
use crate::ccn::SubspaceId;
use crate::error::{Error, Result};
use crate::graph::{DegreeProfile, HetNet};

/// Geometry and gain parameters of a realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RealizationConfig {
    /// Distance between consecutive equilibria on the diagonal.
    pub spacing: f64,
    /// Radius ε of the local linear region.
    pub eps: f64,
    /// Radius κ of the band around the diagonal kept free of tubes.
    pub kappa: f64,
    pub tube_radius: f64,
    pub lane_base: f64,
    pub lane_step: f64,
    pub bump_inner_fraction: f64,
    pub seed: u64,
    /// Coordinate speed imposed along arcs.
    pub speed: f64,
    /// Strength of the pull back onto an arc inside its tube.
    pub restoring_gain: f64,
    /// Corner rounding radius of 2D arcs.
    pub fillet: f64,
    /// Arclength between stored arc samples.
    pub sample_step: f64,
    /// Width of the smooth transition in the tube-weight normalizer.
    pub normalizer_width: f64,
    /// Own-pair coefficients of hub nodes in the 3D realization.
    pub hub_pair: (f64, f64),
    /// Half-angle of the capture cones around hub departures, in degrees.
    pub capture_half_angle_deg: f64,
}

impl Default for RealizationConfig {
    fn default() -> Self {
        RealizationConfig {
            spacing: 1.0,
            eps: 0.2,
            kappa: 0.04,
            tube_radius: 0.05,
            lane_base: 0.5,
            lane_step: 0.25,
            bump_inner_fraction: 0.5,
            seed: 0,
            speed: 1.0,
            restoring_gain: 30.0,
            fillet: 0.08,
            sample_step: 0.01,
            normalizer_width: 0.05,
            hub_pair: (-3.0, 0.0),
            capture_half_angle_deg: 22.0,
        }
    }
}

impl RealizationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.spacing,
            self.eps,
            self.kappa,
            self.tube_radius,
            self.lane_base,
            self.lane_step,
            self.speed,
            self.sample_step,
            self.normalizer_width,
        ];
        if positive.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParam("all lengths, speeds and widths must be positive".into()));
        }
        if !(self.kappa < self.eps && self.eps < self.spacing / 4.0) {
            return Err(Error::InvalidParam("need 0 < kappa < eps < spacing/4".into()));
        }
        if self.tube_radius >= self.lane_step / 2.0 {
            return Err(Error::InvalidParam("need tube_radius < lane_step/2".into()));
        }
        if !(0.0..1.0).contains(&self.bump_inner_fraction) {
            return Err(Error::InvalidParam("bump_inner_fraction must lie in [0, 1)".into()));
        }
        if !(self.capture_half_angle_deg > 0.0 && self.capture_half_angle_deg < 30.0) {
            return Err(Error::InvalidParam("capture half-angle must lie in (0, 30) degrees".into()));
        }
        Ok(())
    }
}

/// Linear coefficients α^i_0..α^i_m of the local term at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub rows: Vec<Vec<f64>>,
}

impl AlphaTable {
    pub fn row(&self, node: usize) -> &[f64] {
        &self.rows[node]
    }
}

/// α_0 = −1, α_j = −2k on pages carrying an outgoing edge of the node, +1 elsewhere.
pub fn choose_alphas_bookembed(net: &HetNet, emb: &BookEmbedding) -> Result<AlphaTable> {
    let k = emb.pages;
    let mut rows = Vec::with_capacity(net.num_nodes());
    for v in 0..net.num_nodes() {
        let out = net.outgoing(v);
        if out.is_empty() {
            return Err(Error::InvalidParam(format!("node '{}' has no outgoing connection", net.label(v))));
        }
        let mut row = vec![1.0; k + 1];
        row[0] = -1.0;
        for e in out {
            row[emb.placements[e].page] = -2.0 * k as f64;
        }
        rows.push(row);
    }
    let table = AlphaTable { rows };
    for (v, row) in table.rows.iter().enumerate() {
        let eig = crate::dynamics::eig_full_sync_pn(row, k);
        if eig[0] >= 0.0 {
            return Err(Error::Synthesis(format!("node {v}: synchronous direction not stable")));
        }
        for j in 1..=k {
            let sends = net.outgoing(v).iter().any(|&e| emb.placements[e].page == j);
            if (eig[j] > 0.0) != sends {
                return Err(Error::Synthesis(format!("node {v}: wrong sign on page {j}")));
            }
        }
    }
    Ok(table)
}

/// Own-subspace assignment of the almost-complete construction: nodes with
/// out-degree ≤ 2 receive Δ_1, Δ_2, .. in node order, the others receive the
/// consecutive pairs that follow.
pub fn assign_subspaces(profile: &DegreeProfile) -> Vec<SubspaceId> {
    let n1 = profile.n1;
    let (mut next2, mut next3) = (1, 0);
    profile
        .out_degree
        .iter()
        .map(|&d| {
            if d <= 2 {
                next2 += 1;
                SubspaceId::TwoD(next2 - 1)
            } else {
                next3 += 1;
                SubspaceId::ThreeD(n1 + 2 * next3 - 1, n1 + 2 * next3)
            }
        })
        .collect()
}

/// Sample solution of the almost-complete sign conditions: α_0 = −1, −2 on the
/// node's own slot (both slots for a pair), 0 elsewhere.
pub fn choose_alphas_q(profile: &DegreeProfile, assignment: &[SubspaceId]) -> Result<AlphaTable> {
    alphas_q_with(profile, assignment, (-2.0, -2.0))
}

/// Like [`choose_alphas_q`] with a configurable own-pair coefficient for hubs.
pub fn alphas_q_with(profile: &DegreeProfile, assignment: &[SubspaceId], hub: (f64, f64)) -> Result<AlphaTable> {
    let types = profile.n1 + 2 * profile.n2;
    if assignment.len() != profile.out_degree.len() {
        return Err(Error::Dimension { expected: profile.out_degree.len(), got: assignment.len() });
    }
    let mut rows = Vec::with_capacity(assignment.len());
    for s in assignment {
        let mut row = vec![0.0; types + 1];
        row[0] = -1.0;
        match *s {
            SubspaceId::TwoD(j) => row[j] = -2.0,
            SubspaceId::ThreeD(a, b) => {
                row[a] = hub.0;
                row[b] = hub.1;
            }
            SubspaceId::Full => return Err(Error::InvalidParam("node assigned to the diagonal".into())),
        }
        rows.push(row);
    }
    let table = AlphaTable { rows };
    check_q_inequalities(&table, assignment, profile.n1, profile.n2)?;
    Ok(table)
}

/// Verifies the sign pattern: each node is unstable exactly inside its own
/// subspace and stable along the diagonal and every other minimal subspace.
pub fn check_q_inequalities(table: &AlphaTable, assignment: &[SubspaceId], n1: usize, n2: usize) -> Result<()> {
    for (i, (row, own)) in table.rows.iter().zip(assignment).enumerate() {
        let sum: f64 = row.iter().sum();
        if sum >= 0.0 {
            return Err(Error::Synthesis(format!("node {i}: diagonal direction not stable")));
        }
        for j in 1..=n1 {
            let unstable = row[0] - row[j] > 0.0;
            if unstable != (*own == SubspaceId::TwoD(j)) {
                return Err(Error::Synthesis(format!("node {i}: wrong sign in D{j}")));
            }
        }
        for p in 0..n2 {
            let (a, b) = (n1 + 2 * p + 1, n1 + 2 * p + 2);
            let rest: f64 = sum - row[0] - row[a] - row[b];
            let (_, lat) = crate::dynamics::eig_3d_pair(row[0], rest, (row[a], row[b]));
            let unstable = lat.iter().all(|z| z.re > 0.0);
            let stable = lat.iter().all(|z| z.re < 0.0);
            let own = *own == SubspaceId::ThreeD(a, b);
            if (own && !unstable) || (!own && !stable) {
                return Err(Error::Synthesis(format!("node {i}: wrong sign in D{a},{b}")));
            }
        }
    }
    Ok(())
}

/// C² step from 1 (r ≤ r_inner) to 0 (r ≥ r_outer).
pub fn bump(r: f64, r_inner: f64, r_outer: f64) -> f64 {
    if r <= r_inner {
        return 1.0;
    }
    if r >= r_outer {
        return 0.0;
    }
    1.0 - smoothstep((r - r_inner) / (r_outer - r_inner))
}

/// Quintic smoothstep on [0, 1], clamped outside.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (s * 6.0 - 15.0) + 10.0)
}

/// Smooth maximum of 1 and `s`: equal to 1 for s ≤ 1 − c and to s for s ≥ 1 + c.
pub fn soft_max_one(s: f64, c: f64) -> f64 {
    let tau = (s - 1.0) / c;
    if tau <= -1.0 {
        return 1.0;
    }
    if tau >= 1.0 {
        return s;
    }
    // g(τ) = ∫_{-1}^{τ} smoothstep((σ+1)/2) dσ = 2 G((τ+1)/2), G(w) = w⁶ − 3w⁵ + 2.5w⁴.
    let w = (tau + 1.0) / 2.0;
    let g = 2.0 * w.powi(4) * (w * w - 3.0 * w + 2.5);
    1.0 + c * g
}

/// Offset r·(cos θ e1 + sin θ e2) in the transverse plane of a pair subspace.
pub fn transverse_offset(r: f64, theta: f64) -> [f64; 3] {
    transverse_point(0.0, r, theta)
}

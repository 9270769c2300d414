//! Connection arcs in class coordinates of a synchrony subspace.
//!
//! A 2D arc lives in the state (a, b) of Δ_j, where a is the common value of
//! the synchronized cells and b the value of the free cell; page coordinates
//! are u = a, v = b − a. A 3D arc lives in (x, y, z) of a pair subspace and is
//! described by its mean m along the diagonal, a transverse radius r and a
//! fixed transverse angle.

use serde::{Deserialize, Serialize};

use super::{smoothstep, RealizationConfig};
use crate::ccn::SubspaceId;
use crate::error::{Error, Result};

/// One stored point of an arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    pub t: f64,
    /// Geometric parameter: page arclength (2D) or class-space arclength (3D).
    pub sigma: f64,
    /// dσ/dt.
    pub speed: f64,
    /// Class coordinates.
    pub point: Vec<f64>,
    /// d point / dσ.
    pub tangent: Vec<f64>,
    /// Restoring gain per class coordinate.
    pub gain: Vec<f64>,
    /// Tube weight multiplier in [0, 1].
    pub weight: f64,
    /// Tube radius at this sample.
    pub radius: f64,
}

impl ArcSample {
    /// d point / dt.
    pub fn velocity(&self) -> Vec<f64> {
        self.tangent.iter().map(|d| d * self.speed).collect()
    }
}

/// Which vertical leg of a 2D arc carries a jog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JogSite {
    Departure,
    Arrival,
}

/// Local Z-shaped reroute of a vertical leg: around |v| = `level` the leg
/// moves sideways by `du` (in travel order) while changing height by 2Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jog {
    pub site: JogSite,
    pub level: f64,
    pub du: f64,
}

const JOG_HALF_RISE: f64 = 0.18;
const JOG_SHIFT: f64 = 0.6;
const JOG_FILLET: f64 = 0.04;

/// Inputs of a 2D arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc2dSpec {
    pub edge: usize,
    pub source: usize,
    pub target: usize,
    pub rho_s: f64,
    pub rho_t: f64,
    pub alpha_s: Vec<f64>,
    pub alpha_t: Vec<f64>,
    /// Input type index j of the free cell; the arc lives in Δ_j.
    pub slot: usize,
    pub half: i8,
    pub lane: usize,
    /// Number of input types of the network (sets the lift metric).
    pub types: usize,
    pub jogs: Vec<Jog>,
    pub doubled: bool,
}

/// Inputs of the 3D arcs leaving one hub.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc3dSpec {
    pub source: usize,
    pub rho_s: f64,
    pub pair: (usize, usize),
    /// (edge, target, ρ_t) per outgoing connection.
    pub targets: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub dim: usize,
    pub edge: usize,
    pub source: usize,
    pub target: usize,
    pub subspace: SubspaceId,
    /// Half-plane of a 2D arc, 0 for 3D arcs.
    pub half: i8,
    /// Transverse angle of a 3D arc in radians.
    pub sector_angle: f64,
    /// True for the mirrored copy of a single outgoing connection.
    pub doubled: bool,
    pub samples: Vec<ArcSample>,
    pub spec2d: Option<Arc2dSpec>,
}

impl Arc {
    pub fn start(&self) -> &[f64] {
        &self.samples[0].point
    }

    pub fn end(&self) -> &[f64] {
        &self.samples[self.samples.len() - 1].point
    }

    /// Page coordinates (u, v) of every sample of a 2D arc.
    pub fn page_coords(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| [s.point[0], s.point[1] - s.point[0]]).collect()
    }

    /// Minimum of |d point/dt| over the samples.
    pub fn min_speed(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.velocity().iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Recomputes sample times from σ and speed (trapezoidal in 1/speed).
    pub fn retime(&mut self) {
        let mut t = 0.0;
        for i in 0..self.samples.len() {
            if i > 0 {
                let (a, b) = (&self.samples[i - 1], &self.samples[i]);
                t += (b.sigma - a.sigma) * 0.5 * (1.0 / a.speed + 1.0 / b.speed);
            }
            self.samples[i].t = t;
        }
    }
}

/// Unit eigen-direction of the non-diagonal eigenvalue α_0 − α_j inside Δ_j,
/// in page coordinates, oriented into the requested half-plane.
pub fn page_eigendirection(alpha: &[f64], slot: usize, half: i8) -> Result<[f64; 2]> {
    let sum: f64 = alpha.iter().sum();
    let du = alpha[slot];
    let dv = alpha[0] - sum - alpha[slot];
    let norm = (du * du + dv * dv).sqrt();
    if dv.abs() < 1e-9 * norm.max(1.0) || norm == 0.0 {
        return Err(Error::Synthesis(format!("eigen-direction in slot {slot} is parallel to the diagonal")));
    }
    let s = if dv * half as f64 > 0.0 { 1.0 } else { -1.0 };
    Ok([s * du / norm, s * dv / norm])
}

/// Distance from the lift of page offset (du, dv) to the lift of the origin.
fn lift_metric(du: f64, dv: f64, types: usize) -> f64 {
    (types as f64 * du * du + (du + dv) * (du + dv)).sqrt()
}

/// Distance of a 2D lift with page height v from the diagonal of argument space.
fn diag_distance(v: f64, types: usize) -> f64 {
    v.abs() * (types as f64 / (types as f64 + 1.0)).sqrt()
}

/// Start and end of a straight stub along an eigen-direction: from the κ band
/// to where both the local term has faded to one half and the tube clip is on.
fn stub(rho: f64, dir: [f64; 2], types: usize, cfg: &RealizationConfig) -> ([f64; 2], [f64; 2]) {
    let s0 = cfg.kappa / dir[1].abs();
    let clip_on = cfg.kappa + 3.0 * cfg.tube_radius + 0.02;
    let s_clip = clip_on / diag_distance(dir[1], types);
    let s_local = 1.5 * cfg.eps / lift_metric(dir[0], dir[1], types);
    let s1 = s_clip.max(s_local);
    ([rho + s0 * dir[0], s0 * dir[1]], [rho + s1 * dir[0], s1 * dir[1]])
}

/// Spine positions (u) where the departure and arrival stubs of a 2D arc end.
pub fn attach_span(spec: &Arc2dSpec, cfg: &RealizationConfig) -> Result<(f64, f64)> {
    let dep = page_eigendirection(&spec.alpha_s, spec.slot, spec.half)?;
    let arr = page_eigendirection(&spec.alpha_t, spec.slot, spec.half)?;
    let (_, p1) = stub(spec.rho_s, dep, spec.types, cfg);
    let (_, q1) = stub(spec.rho_t, arr, spec.types, cfg);
    Ok((p1[0], q1[0]))
}

/// Corner points and fillet radii of a 2D arc in page coordinates.
fn corners2d(spec: &Arc2dSpec, cfg: &RealizationConfig) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    let dep = page_eigendirection(&spec.alpha_s, spec.slot, spec.half)?;
    let arr = page_eigendirection(&spec.alpha_t, spec.slot, spec.half)?;
    if spec.alpha_s[0] - spec.alpha_s[spec.slot] <= 0.0 {
        return Err(Error::Synthesis(format!("source of edge {} is not unstable in its page", spec.edge)));
    }
    if spec.alpha_t[0] - spec.alpha_t[spec.slot] >= 0.0 {
        return Err(Error::Synthesis(format!("target of edge {} is not stable in the page", spec.edge)));
    }
    let h = spec.half as f64;
    let (p0, p1) = stub(spec.rho_s, dep, spec.types, cfg);
    let (q0, q1) = stub(spec.rho_t, arr, spec.types, cfg);
    let mut height = cfg.lane_base + cfg.lane_step * spec.lane as f64;
    height = height.max(p1[1].abs() + 2.0 * cfg.fillet).max(q1[1].abs() + 2.0 * cfg.fillet);
    let top = h * height;

    let mut dep_jogs: Vec<Jog> = spec.jogs.iter().copied().filter(|j| j.site == JogSite::Departure).collect();
    let mut arr_jogs: Vec<Jog> = spec.jogs.iter().copied().filter(|j| j.site == JogSite::Arrival).collect();
    dep_jogs.sort_by(|a, b| a.level.total_cmp(&b.level));
    arr_jogs.sort_by(|a, b| a.level.total_cmp(&b.level));
    for j in dep_jogs.iter().chain(&arr_jogs) {
        if j.level - JOG_HALF_RISE <= p1[1].abs().min(q1[1].abs()) || j.level + JOG_HALF_RISE >= height {
            return Err(Error::Synthesis(format!("jog at level {} does not fit edge {}", j.level, spec.edge)));
        }
    }

    let mut pts = vec![p0, p1];
    let mut radii = vec![0.0, cfg.fillet];
    let mut u = p1[0];
    for j in &dep_jogs {
        pts.push([u, h * (j.level - JOG_HALF_RISE)]);
        u += j.du;
        pts.push([u, h * (j.level + JOG_HALF_RISE)]);
        radii.extend([JOG_FILLET, JOG_FILLET]);
    }
    pts.push([u, top]);
    radii.push(cfg.fillet);

    let mut tail = Vec::new();
    let mut ua = q1[0];
    for j in &arr_jogs {
        tail.push([ua, h * (j.level - JOG_HALF_RISE)]);
        ua -= j.du;
        tail.push([ua, h * (j.level + JOG_HALF_RISE)]);
    }
    pts.push([ua, top]);
    radii.push(cfg.fillet);
    for p in tail.into_iter().rev() {
        pts.push(p);
        radii.push(JOG_FILLET);
    }
    pts.push(q1);
    radii.push(cfg.fillet);
    pts.push(q0);
    radii.push(0.0);
    Ok((pts, radii))
}

/// Dense polyline through `corners` with quadratic fillets of the given radii.
fn rounded_polyline(corners: &[[f64; 2]], radii: &[f64]) -> Vec<[f64; 2]> {
    const PIECES: usize = 24;
    let n = corners.len();
    let mut out = vec![corners[0]];
    for i in 1..n - 1 {
        let (a, c, b) = (corners[i - 1], corners[i], corners[i + 1]);
        let len_in = ((c[0] - a[0]).powi(2) + (c[1] - a[1]).powi(2)).sqrt();
        let len_out = ((b[0] - c[0]).powi(2) + (b[1] - c[1]).powi(2)).sqrt();
        if len_in < 1e-12 || len_out < 1e-12 {
            continue;
        }
        let r = radii[i].min(0.45 * len_in).min(0.45 * len_out);
        let d_in = [(c[0] - a[0]) / len_in, (c[1] - a[1]) / len_in];
        let d_out = [(b[0] - c[0]) / len_out, (b[1] - c[1]) / len_out];
        let turn = (d_in[0] * d_out[1] - d_in[1] * d_out[0]).abs() + (1.0 - (d_in[0] * d_out[0] + d_in[1] * d_out[1]));
        if r <= 0.0 || turn < 1e-12 {
            out.push(c);
            continue;
        }
        let s = [c[0] - r * d_in[0], c[1] - r * d_in[1]];
        let e = [c[0] + r * d_out[0], c[1] + r * d_out[1]];
        for k in 0..=PIECES {
            let w = k as f64 / PIECES as f64;
            let (p, q, z) = ((1.0 - w) * (1.0 - w), 2.0 * w * (1.0 - w), w * w);
            out.push([p * s[0] + q * c[0] + z * e[0], p * s[1] + q * c[1] + z * e[1]]);
        }
    }
    out.push(corners[n - 1]);
    out
}

/// Resamples a polyline at arclength spacing `step` (measured by `metric`),
/// returning (σ, point) pairs; the last point is always included.
fn resample<const D: usize>(poly: &[[f64; D]], step: f64) -> Vec<(f64, [f64; D])> {
    let mut cum = vec![0.0];
    for w in poly.windows(2) {
        let d: f64 = (0..D).map(|i| (w[1][i] - w[0][i]).powi(2)).sum::<f64>().sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    let n = (total / step).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut seg = 0;
    for i in 0..=n {
        let s = total * i as f64 / n as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        let mut p = [0.0; D];
        for (k, pk) in p.iter_mut().enumerate() {
            *pk = poly[seg][k] + w * (poly[seg + 1][k] - poly[seg][k]);
        }
        out.push((s, p));
    }
    out
}

/// Central-difference tangents of resampled points.
fn tangents<const D: usize>(pts: &[(f64, [f64; D])]) -> Vec<[f64; D]> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let ds = pts[b].0 - pts[a].0;
            let mut t = [0.0; D];
            for k in 0..D {
                t[k] = (pts[b].1[k] - pts[a].1[k]) / ds;
            }
            t
        })
        .collect()
}

/// Builds the departure stub, climb, lane run, descent and arrival stub of a
/// connection inside Δ_slot, with rounded corners.
pub fn build_arc2d(spec: &Arc2dSpec, cfg: &RealizationConfig) -> Result<Arc> {
    let (corners, radii) = corners2d(spec, cfg)?;
    let poly = rounded_polyline(&corners, &radii);
    let pts = resample(&poly, cfg.sample_step);
    let tans = tangents(&pts);
    let samples = pts
        .iter()
        .zip(&tans)
        .map(|(&(sigma, [u, v]), &[du, dv])| ArcSample {
            t: 0.0,
            sigma,
            speed: cfg.speed,
            point: vec![u, u + v],
            tangent: vec![du, du + dv],
            gain: vec![cfg.restoring_gain; 2],
            weight: 1.0,
            radius: cfg.tube_radius,
        })
        .collect();
    let mut arc = Arc {
        dim: 2,
        edge: spec.edge,
        source: spec.source,
        target: spec.target,
        subspace: SubspaceId::TwoD(spec.slot),
        half: spec.half,
        sector_angle: 0.0,
        doubled: spec.doubled,
        samples,
        spec2d: Some(spec.clone()),
    };
    arc.retime();
    Ok(arc)
}

/// Transverse basis of the pair subspace: e1 ∝ (1, −1, 0), e2 ∝ (1, 1, −2).
pub const E1: [f64; 3] = [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2, 0.0];
pub const E2: [f64; 3] = [0.408_248_290_463_863, 0.408_248_290_463_863, -0.816_496_580_927_726];

/// Point m·(1,1,1) + r·(cos θ e1 + sin θ e2).
pub fn transverse_point(m: f64, r: f64, theta: f64) -> [f64; 3] {
    let (s, c) = theta.sin_cos();
    std::array::from_fn(|i| m + r * (c * E1[i] + s * E2[i]))
}

/// (m, r, θ) of a point of the pair subspace.
pub fn transverse_polar(p: &[f64]) -> (f64, f64, f64) {
    let m = (p[0] + p[1] + p[2]) / 3.0;
    let a: f64 = (0..3).map(|i| (p[i] - m) * E1[i]).sum();
    let b: f64 = (0..3).map(|i| (p[i] - m) * E2[i]).sum();
    (m, a.hypot(b), b.atan2(a))
}

/// Departure angles and cone half-angle for `k` arcs: sector midpoints for
/// k ≤ 6, evenly spread inside sectors beyond that.
pub fn sector_angles(k: usize, half_angle_deg: f64) -> Result<(Vec<f64>, f64)> {
    let deg = std::f64::consts::PI / 180.0;
    if k <= 6 {
        let angles = (0..k).map(|i| 60.0 * ((i * 6) / k) as f64 * deg).collect();
        return Ok((angles, half_angle_deg * deg));
    }
    let per = k.div_ceil(6);
    let width = 60.0 / per as f64;
    let half = half_angle_deg.min(0.4 * width);
    if half < 2.0 {
        return Err(Error::Synthesis(format!("{k} departures do not fit the six sectors")));
    }
    let angles = (0..k)
        .map(|i| {
            let (sector, q) = (i % 6, i / 6);
            (-30.0 + 60.0 * sector as f64 + width * (q as f64 + 0.5)) * deg
        })
        .collect();
    Ok((angles, half * deg))
}

/// Arcs from a hub to each of its targets inside the pair subspace: a capture
/// cone around a sector angle, a radial rise to a private band, a run along
/// the diagonal and a radial descent into the target.
pub fn build_arc3d(spec: &Arc3dSpec, cfg: &RealizationConfig) -> Result<Vec<Arc>> {
    if spec.targets.len() < 3 {
        return Err(Error::InvalidParam("3D arcs are used for three or more outgoing connections".into()));
    }
    let mut order: Vec<usize> = (0..spec.targets.len()).collect();
    order.sort_by(|&a, &b| spec.targets[a].2.total_cmp(&spec.targets[b].2).then(a.cmp(&b)));
    let (angles, half) = sector_angles(order.len(), cfg.capture_half_angle_deg)?;
    let (r0, r1) = (0.3 * cfg.eps, cfg.eps);
    let taper_end = r1 + 0.1;
    let r_end = 0.5 * cfg.eps;
    let band_base = 2.0 * cfg.eps + cfg.tube_radius + 0.1;
    let ramp_out = 0.1;
    let mut arcs = Vec::with_capacity(order.len());
    for (rank, &i) in order.iter().enumerate() {
        let (edge, target, rho_t) = spec.targets[i];
        let theta = angles[rank];
        let band = band_base + 0.1 * rank as f64;
        let corners = [[spec.rho_s, r0], [spec.rho_s, band], [rho_t, band], [rho_t, r_end]];
        let radii = [0.0, 0.1, 0.1, 0.0];
        let poly: Vec<[f64; 3]> = rounded_polyline(&corners, &radii)
            .into_iter()
            .map(|[m, r]| transverse_point(m, r, theta))
            .collect();
        let pts = resample(&poly, cfg.sample_step);
        let tans = tangents(&pts);
        let total = pts.last().unwrap().0;
        let mut first_leg = true;
        let samples = pts
            .iter()
            .zip(&tans)
            .map(|(&(sigma, p), &tan)| {
                let (m, r, _) = transverse_polar(&p);
                if (m - spec.rho_s).abs() > 1e-9 {
                    first_leg = false;
                }
                let radius = if first_leg && r <= r1 {
                    r * half.tan()
                } else if first_leg && r <= taper_end {
                    let w = (r - r1) / (taper_end - r1);
                    (1.0 - w) * r1 * half.tan() + w * cfg.tube_radius
                } else {
                    cfg.tube_radius
                };
                let ramp_in = if first_leg { smoothstep((r - r0) / (0.25 * (r1 - r0))) } else { 1.0 };
                let weight = ramp_in * smoothstep((total - sigma) / ramp_out);
                ArcSample {
                    t: 0.0,
                    sigma,
                    speed: cfg.speed,
                    point: p.to_vec(),
                    tangent: tan.to_vec(),
                    gain: vec![cfg.restoring_gain; 3],
                    weight,
                    radius: radius.max(1e-3),
                }
            })
            .collect();
        let mut arc = Arc {
            dim: 3,
            edge,
            source: spec.source,
            target,
            subspace: SubspaceId::ThreeD(spec.pair.0, spec.pair.1),
            half: 0,
            sector_angle: theta,
            doubled: false,
            samples,
            spec2d: None,
        };
        arc.retime();
        arcs.push(arc);
    }
    Ok(arcs)
}

/// How an overlap between two 2D arcs in the shared lift was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingCase {
    /// Both arcs run into the same target.
    Merge,
    /// Both arcs leave the same source.
    Split,
    /// Crossing with equal coordinate speeds already: only the restoring pull is released.
    Compatible,
    /// Crossing resolved by reparameterizing speeds.
    SpeedAdjusted,
    /// Crossing that needed a jog before the speeds could be matched.
    Rerouted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingEntry {
    pub arcs: (usize, usize),
    pub case: CrossingCase,
    /// σ ranges of the overlap on each arc.
    pub range_a: (f64, f64),
    pub range_b: (f64, f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub entries: Vec<CrossingEntry>,
}

/// An overlap run between arcs `a` and `b` in the lift of the free cell.
#[derive(Debug, Clone)]
struct Overlap {
    a: usize,
    b: usize,
    idx_a: (usize, usize),
    idx_b: (usize, usize),
    /// Sample indices of the closest approach.
    closest: (usize, usize),
}

fn clip_active(s: &ArcSample, types: usize, cfg: &RealizationConfig) -> bool {
    diag_distance(s.point[1] - s.point[0], types) > cfg.kappa + 2.0 * cfg.tube_radius
}

/// Squared tube-metric distance between the lifts of two samples sharing a lift pattern.
fn lift_dist2(p: &[f64], q: &[f64]) -> f64 {
    let (da, db) = (p[0] - q[0], p[1] - q[1]);
    da * da + db * db
}

fn near_hits(arcs: &[Arc], a: usize, b: usize, types: usize, cfg: &RealizationConfig) -> Vec<(usize, usize, f64)> {
    let thr2 = (2.0 * cfg.tube_radius).powi(2);
    let sa = &arcs[a].samples;
    let sb = &arcs[b].samples;
    let active_b: Vec<usize> = (0..sb.len()).filter(|&j| clip_active(&sb[j], types, cfg)).collect();
    let mut hits = Vec::new();
    for (i, s) in sa.iter().enumerate() {
        if !clip_active(s, types, cfg) {
            continue;
        }
        let mut best = (f64::INFINITY, 0);
        for &j in &active_b {
            let d = lift_dist2(&s.point, &sb[j].point);
            if d < best.0 {
                best = (d, j);
            }
        }
        if best.0 < thr2 {
            hits.push((i, best.1, best.0));
        }
    }
    hits
}

fn group_runs(hits: &[(usize, usize, f64)]) -> Vec<(usize, usize)> {
    let gap = 3;
    let mut runs = Vec::new();
    let mut k = 0;
    while k < hits.len() {
        let mut e = k;
        while e + 1 < hits.len() && hits[e + 1].0 <= hits[e].0 + gap {
            e += 1;
        }
        runs.push((hits[k].0, hits[e].0));
        k = e + 1;
    }
    runs
}

/// Overlap runs between the free-cell lifts of arcs `a` and `b`, each run
/// paired with the run it meets on the other arc.
fn overlap_runs(arcs: &[Arc], a: usize, b: usize, types: usize, cfg: &RealizationConfig) -> Vec<Overlap> {
    let hits_a = near_hits(arcs, a, b, types, cfg);
    let hits_b = near_hits(arcs, b, a, types, cfg);
    let runs_a = group_runs(&hits_a);
    let runs_b = group_runs(&hits_b);
    let mut out = Vec::new();
    for ra in runs_a {
        let inside: Vec<&(usize, usize, f64)> = hits_a.iter().filter(|h| h.0 >= ra.0 && h.0 <= ra.1).collect();
        let closest = inside.iter().min_by(|x, y| x.2.total_cmp(&y.2)).expect("runs are non-empty");
        let Some(rb) = runs_b.iter().copied().find(|rb| inside.iter().any(|h| h.1 >= rb.0 && h.1 <= rb.1)) else {
            continue;
        };
        out.push(Overlap { a, b, idx_a: ra, idx_b: rb, closest: (closest.0, closest.1) });
    }
    out
}

/// Sign of db/dσ over a sample range, or None when it changes or nearly vanishes.
fn free_slope_sign(arc: &Arc, range: (usize, usize)) -> Option<f64> {
    let mut sign = 0.0;
    for s in &arc.samples[range.0..=range.1] {
        let db = s.tangent[1];
        if db.abs() < 0.2 {
            return None;
        }
        let sg = db.signum();
        if sign == 0.0 {
            sign = sg;
        } else if sg != sign {
            return None;
        }
    }
    Some(sign)
}

fn is_vertical_tangent(t: &[f64]) -> bool {
    t[0].abs() < 0.05
}

fn is_vertical(arc: &Arc, i: usize) -> bool {
    is_vertical_tangent(&arc.samples[i].tangent)
}

/// Finds the vertical leg of `arc` that carries sample `i` and proposes a jog there.
fn propose_jog(arc: &Arc, i: usize, desired_sign: f64) -> Option<Jog> {
    if !is_vertical(arc, i) {
        return None;
    }
    let spec = arc.spec2d.as_ref()?;
    let s = &arc.samples[i];
    let level = (s.point[1] - s.point[0]).abs();
    // Travelling away from the spine on the departure leg, towards it on arrival.
    let up = s.tangent[1] * spec.half as f64 > 0.0;
    let site = if up { JogSite::Departure } else { JogSite::Arrival };
    // Inside the jog db/dσ has the sign of du.
    Some(Jog { site, level, du: desired_sign * JOG_SHIFT })
}

fn smooth_plateau(x: f64, lo: f64, hi: f64, margin: f64) -> f64 {
    if x < lo {
        smoothstep(1.0 - (lo - x) / margin)
    } else if x > hi {
        smoothstep(1.0 - (x - hi) / margin)
    } else {
        1.0
    }
}

/// Makes overlapping 2D arcs consistent in the shared lift of the free cell.
///
/// Overlaps at a common endpoint are merges or splits. Every other overlap is
/// a crossing: when db/dσ has one sign on both arcs, speeds are rescaled so
/// that db/dt agrees and the restoring pull on b is released inside the
/// overlap; otherwise a jog is inserted on a vertical leg first.
pub fn adjust_crossings(arcs: &mut [Arc], cfg: &RealizationConfig) -> Result<CrossingReport> {
    let idx2d: Vec<usize> = (0..arcs.len()).filter(|&i| arcs[i].dim == 2).collect();
    let Some(types) = idx2d.first().and_then(|&i| arcs[i].spec2d.as_ref()).map(|s| s.types) else {
        return Ok(CrossingReport::default());
    };
    for _round in 0..8 {
        let mut changed = false;
        'pairs: for (x, &a) in idx2d.iter().enumerate() {
            for &b in &idx2d[x + 1..] {
                for ov in overlap_runs(arcs, a, b, types, cfg) {
                    if classify_endpoint(arcs, &ov).is_some() {
                        continue;
                    }
                    let sa = free_slope_sign(&arcs[a], ov.idx_a);
                    let sb = free_slope_sign(&arcs[b], ov.idx_b);
                    if sa.is_some() && sa == sb {
                        continue;
                    }
                    // Reroute whichever arc crosses on a vertical leg.
                    let (mid_a, mid_b) = ov.closest;
                    let (target, mid, other_sign) = match (sa, sb) {
                        (_, Some(sign)) if is_vertical(&arcs[a], mid_a) => (a, mid_a, sign),
                        (Some(sign), _) if is_vertical(&arcs[b], mid_b) => (b, mid_b, sign),
                        _ => {
                            return Err(Error::Synthesis(format!(
                                "arcs of edges {} and {} cross without a compatible direction",
                                arcs[a].edge, arcs[b].edge
                            )))
                        }
                    };
                    let jog = propose_jog(&arcs[target], mid, other_sign).ok_or_else(|| {
                        Error::Synthesis(format!("cannot reroute edge {}", arcs[target].edge))
                    })?;
                    let mut spec = arcs[target].spec2d.clone().expect("2D arc keeps its spec");
                    spec.jogs.push(jog);
                    arcs[target] = build_arc2d(&spec, cfg)?;
                    changed = true;
                    break 'pairs;
                }
            }
        }
        if !changed {
            return finish_zones(arcs, &idx2d, types, cfg);
        }
    }
    Err(Error::Synthesis("crossing adjustment did not converge".into()))
}

fn classify_endpoint(arcs: &[Arc], ov: &Overlap) -> Option<CrossingCase> {
    let (a, b) = (&arcs[ov.a], &arcs[ov.b]);
    let last_a = a.samples.len() - 1;
    let last_b = b.samples.len() - 1;
    let near_end = |i: usize, last: usize, n: usize| i + n >= last;
    // Clip-inactive samples near the ends are never hits, so allow a generous tail.
    let tail_a = a.samples.iter().rev().take_while(|s| s.point[1] != s.point[0] && is_near_diag(s)).count() + 40;
    let tail_b = b.samples.iter().rev().take_while(|s| s.point[1] != s.point[0] && is_near_diag(s)).count() + 40;
    if a.target == b.target && a.half == b.half && near_end(ov.idx_a.1, last_a, tail_a) && near_end(ov.idx_b.1, last_b, tail_b) {
        return Some(CrossingCase::Merge);
    }
    let head_a = a.samples.iter().take_while(|s| is_near_diag(s)).count() + 40;
    let head_b = b.samples.iter().take_while(|s| is_near_diag(s)).count() + 40;
    if a.source == b.source && a.half == b.half && ov.idx_a.0 <= head_a && ov.idx_b.0 <= head_b {
        return Some(CrossingCase::Split);
    }
    None
}

/// Page-coordinate boxes (u range, |v| range) swept by the jogs of a 2D arc.
fn jog_boxes(spec: &Arc2dSpec, cfg: &RealizationConfig) -> Vec<((f64, f64), (f64, f64))> {
    let Ok((pu, qu)) = attach_span(spec, cfg) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (site, start, dir) in [(JogSite::Departure, pu, 1.0), (JogSite::Arrival, qu, -1.0)] {
        let mut jogs: Vec<&Jog> = spec.jogs.iter().filter(|j| j.site == site).collect();
        jogs.sort_by(|a, b| a.level.total_cmp(&b.level));
        let mut u = start;
        for j in jogs {
            let next = u + dir * j.du;
            let v = (j.level - JOG_HALF_RISE - JOG_FILLET, j.level + JOG_HALF_RISE + JOG_FILLET);
            out.push(((u.min(next), u.max(next)), v));
            u = next;
        }
    }
    out
}

/// Whether a sample range of a 2D arc runs through one of its jogs.
fn passes_jog(arc: &Arc, range: (usize, usize), cfg: &RealizationConfig) -> bool {
    let Some(spec) = &arc.spec2d else {
        return false;
    };
    let boxes = jog_boxes(spec, cfg);
    arc.samples[range.0..=range.1].iter().any(|s| {
        let (u, v) = (s.point[0], (s.point[1] - s.point[0]).abs());
        !is_vertical_tangent(&s.tangent)
            && boxes.iter().any(|&((u0, u1), (v0, v1))| u > u0 && u < u1 && v >= v0 && v <= v1)
    })
}

fn is_near_diag(s: &ArcSample) -> bool {
    (s.point[1] - s.point[0]).abs() < 0.3
}

fn finish_zones(
    arcs: &mut [Arc],
    idx2d: &[usize],
    types: usize,
    cfg: &RealizationConfig,
) -> Result<CrossingReport> {
    let mut report = CrossingReport::default();
    let margin = 0.1;
    for (x, &a) in idx2d.iter().enumerate() {
        for &b in &idx2d[x + 1..] {
            for ov in overlap_runs(arcs, a, b, types, cfg) {
                let sigma = |arc: usize, r: (usize, usize)| (arcs[arc].samples[r.0].sigma, arcs[arc].samples[r.1].sigma);
                let (ra, rb) = (sigma(a, ov.idx_a), sigma(b, ov.idx_b));
                if let Some(case) = classify_endpoint(arcs, &ov) {
                    report.entries.push(CrossingEntry { arcs: (a, b), case, range_a: ra, range_b: rb });
                    continue;
                }
                let same_page = arcs[a].subspace == arcs[b].subspace && arcs[a].half == arcs[b].half;
                if same_page {
                    return Err(Error::Synthesis(format!(
                        "arcs of edges {} and {} intersect inside one page",
                        arcs[a].edge, arcs[b].edge
                    )));
                }
                let rerouted = passes_jog(&arcs[a], ov.idx_a, cfg) || passes_jog(&arcs[b], ov.idx_b, cfg);
                let mut equal = true;
                for (arc, range) in [(a, ra), (b, rb)] {
                    for s in arcs[arc].samples.iter_mut() {
                        let w = smooth_plateau(s.sigma, range.0, range.1, margin);
                        if w == 0.0 {
                            continue;
                        }
                        let target_speed = cfg.speed / s.tangent[1].abs().max(0.3);
                        if w == 1.0 && (target_speed - s.speed).abs() > 1e-12 {
                            equal = false;
                        }
                        s.speed += w * (target_speed - s.speed);
                        s.gain[1] *= 1.0 - w;
                    }
                    arcs[arc].retime();
                }
                let case = if rerouted {
                    CrossingCase::Rerouted
                } else if equal {
                    CrossingCase::Compatible
                } else {
                    CrossingCase::SpeedAdjusted
                };
                report.entries.push(CrossingEntry { arcs: (a, b), case, range_a: ra, range_b: rb });
            }
        }
    }
    Ok(report)
}

/// Minimum distance between the synchronized-cell lifts of two arcs in the same page.
pub fn same_page_distance(a: &Arc, b: &Arc) -> f64 {
    let mut best = f64::INFINITY;
    for s in &a.samples {
        for t in &b.samples {
            best = best.min(lift_dist2(&s.point, &t.point));
        }
    }
    best.sqrt()
}

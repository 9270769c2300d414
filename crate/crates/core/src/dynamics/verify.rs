use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eig_full_sync_pn, eig_full_sync_q, eigenvalues, jacobian, spectrum_distance, Rk4, Termination, STALL};
use crate::ccn::{Ccn, Coupling, Family, SubspaceId};
use crate::error::{Error, Result};
use crate::synth::{ConnectionKind, PerturbBump, Realization, RealizationMode, SynthesizedField};

/// Tolerances and budgets of the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySettings {
    /// RK4 step.
    pub step: f64,
    /// Integration horizon.
    pub t_max: f64,
    /// Radius of the arrival ball around the target equilibrium.
    pub arrival: f64,
    /// Time a trajectory must stay inside the arrival ball.
    pub residence: f64,
    /// Largest allowed distance from the synchrony subspace.
    pub invariance_tol: f64,
    /// Start offset as a fraction of the spacing.
    pub delta: f64,
    /// Rays per hub in basin sampling.
    pub basin_rays: usize,
    /// Largest tolerated unresolved fraction at a hub.
    pub unresolved_tol: f64,
    /// Perturbation size of the robustness trials.
    pub perturb: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            step: 0.01,
            t_max: 500.0,
            arrival: 1e-3,
            residence: 5.0,
            invariance_tol: 1e-8,
            delta: 1e-4,
            basin_rays: 72,
            unresolved_tol: 0.05,
            perturb: 0.0,
            trials: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub node: usize,
    pub label: String,
    pub point: f64,
    /// max |f^N(p)| at the synchronous equilibrium.
    pub residual: f64,
    /// Numeric eigenvalues as (re, im).
    pub eigenvalues: Vec<(f64, f64)>,
    pub closed_form: Vec<(f64, f64)>,
    pub deviation: f64,
    /// Minimal synchrony subspaces in which the numeric linearization is unstable.
    pub unstable: Vec<SubspaceId>,
    /// True when `unstable` matches the design.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionReport {
    pub edge: usize,
    pub source: String,
    pub target: String,
    pub subspace: SubspaceId,
    pub half: i8,
    pub angle: f64,
    pub doubled: bool,
    pub delta: f64,
    /// Time the trajectory entered the arrival ball for good.
    pub hit_time: Option<f64>,
    pub final_distance: f64,
    pub max_deviation: f64,
    pub termination: Termination,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub node: usize,
    pub label: String,
    pub rays: usize,
    /// Rays per reached node label.
    pub counts: BTreeMap<String, usize>,
    pub unresolved: usize,
    pub classified_fraction: f64,
    /// Every outgoing neighbour received at least one ray.
    pub every_target_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub passed: bool,
    pub failed_edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub eta: f64,
    pub trials: Vec<TrialReport>,
    pub passed_trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    Complete,
    AlmostComplete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationReport {
    pub mode: RealizationMode,
    pub cells: usize,
    pub equilibria: Vec<EquilibriumReport>,
    pub connections: Vec<ConnectionReport>,
    pub basins: Vec<BasinReport>,
    pub robustness: Option<RobustnessReport>,
    pub grade: Grade,
    pub settings: VerifySettings,
}

impl RealizationReport {
    pub fn connections_passed(&self) -> usize {
        self.connections.iter().filter(|c| c.passed).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Synchronous equilibrium of `f` near ρ: Newton's method on x ↦ f(x, .., x).
pub fn equilibrium_on_diagonal(f: &dyn Coupling, rho: f64) -> Result<f64> {
    let arity = f.arity();
    let g = |x: f64| f.eval(&vec![x; arity]);
    let mut x = rho;
    for _ in 0..50 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        let h = 1e-6;
        let d = (g(x + h) - g(x - h)) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = gx / d;
        x -= step;
        if step.abs() < 1e-15 {
            return Ok(x);
        }
    }
    if g(x).abs() < 1e-12 {
        Ok(x)
    } else {
        Err(Error::Verification(format!("no synchronous equilibrium near {rho}")))
    }
}

/// Indicator columns of the classes of a subspace, class 0 first.
fn class_basis(cells: usize, s: SubspaceId) -> DMatrix<f64> {
    let col = s.coloring(cells);
    DMatrix::from_fn(cells, col.num_classes(), |i, j| if col.class_of(i) == j { 1.0 } else { 0.0 })
}

/// Jacobian restricted to a synchrony subspace, in class coordinates.
fn restricted(j: &DMatrix<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    let bt = basis.transpose();
    let gram = (&bt * basis).try_inverse().expect("indicator columns are independent");
    gram * bt * j * basis
}

fn subspace_deviation(x: &[f64], classes: &[Vec<usize>]) -> f64 {
    classes
        .iter()
        .map(|c| {
            let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &i| (l.min(x[i]), h.max(x[i])));
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Outcome of one monitored integration.
struct Run {
    reached: Option<(usize, f64)>,
    final_distance: f64,
    max_deviation: f64,
    termination: Termination,
}

/// Integrates from `x0` until the state has stayed `residence` time units in
/// the arrival ball of one of `targets`.
fn run_until_settled(
    ccn: &Ccn,
    f: &dyn Coupling,
    x0: Vec<f64>,
    targets: &[(usize, Vec<f64>)],
    classes: &[Vec<usize>],
    s: &VerifySettings,
) -> Result<Run> {
    let mut rk = Rk4::new(ccn, f)?;
    let mut x = x0;
    let mut max_dev = subspace_deviation(&x, classes);
    let mut inside: Option<(usize, f64)> = None;
    let steps = (s.t_max / s.step).round() as usize;
    let mut termination = Termination::MaxTime;
    let mut prev = x.clone();
    for i in 1..=steps {
        prev.copy_from_slice(&x);
        let speed = rk.step(&mut x, s.step).iter().map(|v| v * v).sum::<f64>().sqrt();
        let t = i as f64 * s.step;
        if x.iter().any(|v| !v.is_finite() || v.abs() > super::BLOW_UP) {
            termination = Termination::BlowUp;
            break;
        }
        max_dev = max_dev.max(subspace_deviation(&x, classes));
        let near = targets.iter().find(|(_, p)| dist(&x, p) < s.arrival).map(|(n, _)| *n);
        inside = match (inside, near) {
            (Some((n, t0)), Some(m)) if n == m => Some((n, t0)),
            (_, Some(m)) => {
                // Entry time interpolated linearly in the distance to the target.
                let p = &targets.iter().find(|(n, _)| *n == m).expect("target was found").1;
                let (d0, d1) = (dist(&prev, p), dist(&x, p));
                let frac = if d0 > d1 { ((d0 - s.arrival) / (d0 - d1)).clamp(0.0, 1.0) } else { 1.0 };
                Some((m, t - s.step + frac * s.step))
            }
            (_, None) => None,
        };
        if let Some((_, t0)) = inside {
            if t - t0 >= s.residence {
                termination = Termination::ReachedTarget;
                break;
            }
        }
        if speed < STALL && inside.is_none() {
            termination = Termination::Stalled;
            break;
        }
    }
    let reached = if termination == Termination::ReachedTarget { inside } else { None };
    let final_distance = match reached {
        Some((n, _)) => dist(&x, &targets.iter().find(|(m, _)| *m == n).expect("reached a target").1),
        None => targets.iter().map(|(_, p)| dist(&x, p)).fold(f64::INFINITY, f64::min),
    };
    Ok(Run { reached, final_distance, max_deviation: max_dev, termination })
}

/// Unit unstable direction of a node inside a 2D subspace, oriented by half-plane.
fn planar_start(j: &DMatrix<f64>, basis: &DMatrix<f64>, half: i8) -> Option<DVector<f64>> {
    let m = restricted(j, basis);
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let tr = a + d;
    let disc = (a - d) * (a - d) + 4.0 * b * c;
    if disc < 0.0 {
        return None;
    }
    let lam = 0.5 * (tr + disc.sqrt());
    if lam <= 0.0 {
        return None;
    }
    let w = if b.abs() >= (lam - d).abs() { [b, lam - a] } else { [lam - d, c] };
    let v = w[1] - w[0];
    let sign = if v * half as f64 > 0.0 { 1.0 } else { -1.0 };
    let cell = basis * DVector::from_vec(vec![sign * w[0], sign * w[1]]);
    let n = cell.norm();
    (n > 0.0).then(|| cell / n)
}

/// Start point offset for a spatial connection: the backward linear orbit of
/// a point on the cone axis, followed down to radius δ.
fn spatial_start(j: &DMatrix<f64>, basis: &DMatrix<f64>, angle: f64, r_axis: f64, delta: f64) -> Option<DVector<f64>> {
    let m = restricted(j, basis);
    let ones = DVector::from_element(3, 1.0);
    let lam = (&m * &ones)[0];
    let svd = (m.transpose() - DMatrix::identity(3, 3) * lam).svd(false, true);
    let vt = svd.v_t?;
    let (imin, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    let left: DVector<f64> = vt.row(imin).transpose();
    let p = crate::synth::transverse_offset(r_axis, angle);
    let project = |w: &mut DVector<f64>| *w -= &ones * (left.dot(w) / left.dot(&ones));
    let mut w = DVector::from_vec(p.to_vec());
    project(&mut w);
    let h = 1e-3;
    let f = |w: &DVector<f64>| -(&m * w);
    for _ in 0..2_000_000 {
        if w.norm() <= delta {
            return Some(basis * w);
        }
        let k1 = f(&w);
        let k2 = f(&(&w + &k1 * (h / 2.0)));
        let k3 = f(&(&w + &k2 * (h / 2.0)));
        let k4 = f(&(&w + &k3 * h));
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        project(&mut w);
    }
    None
}

fn equilibria_of(real: &Realization, f: &SynthesizedField) -> Result<Vec<Vec<f64>>> {
    real.rho
        .iter()
        .map(|&r| equilibrium_on_diagonal(f, r).map(|x| vec![x; real.ccn.cells]))
        .collect()
}

/// Integrates the designated start of one realized connection and checks
/// that it settles at the target while staying in the synchrony subspace.
pub fn verify_connection(real: &Realization, f: &SynthesizedField, connection: usize, s: &VerifySettings) -> Result<ConnectionReport> {
    let eq = equilibria_of(real, f)?;
    verify_with(real, f, connection, s, &eq)
}

fn start_offset(
    real: &Realization,
    f: &SynthesizedField,
    connection: usize,
    p: &[f64],
    s: &VerifySettings,
) -> Result<Option<DVector<f64>>> {
    let conn = &real.connections[connection];
    let cfg = real.config();
    let delta = s.delta * cfg.spacing;
    let basis = class_basis(real.ccn.cells, conn.subspace);
    let jac = jacobian(&real.ccn, f, p)?;
    Ok(match conn.kind {
        ConnectionKind::Planar => planar_start(&jac, &basis, conn.half).map(|d| d * delta),
        ConnectionKind::Spatial => spatial_start(&jac, &basis, conn.angle, 0.45 * cfg.eps, delta),
    })
}

/// Designated initial state of a connection: the source equilibrium moved by
/// δ along the unstable direction (planar) or onto the backward linear orbit
/// through the departure cone (spatial). None when the source is not unstable.
pub fn connection_start(real: &Realization, f: &SynthesizedField, connection: usize, s: &VerifySettings) -> Result<Option<Vec<f64>>> {
    let conn = real
        .connections
        .get(connection)
        .ok_or_else(|| Error::InvalidParam(format!("no connection {connection}")))?;
    let p = vec![equilibrium_on_diagonal(f, real.rho[conn.source])?; real.ccn.cells];
    Ok(start_offset(real, f, connection, &p, s)?.map(|d| p.iter().zip(d.iter()).map(|(a, b)| a + b).collect()))
}

fn verify_with(
    real: &Realization,
    f: &SynthesizedField,
    connection: usize,
    s: &VerifySettings,
    eq: &[Vec<f64>],
) -> Result<ConnectionReport> {
    let conn = real
        .connections
        .get(connection)
        .ok_or_else(|| Error::InvalidParam(format!("no connection {connection}")))?;
    let ccn = &real.ccn;
    let delta = s.delta * real.config().spacing;
    let p = &eq[conn.source];
    let dir = start_offset(real, f, connection, p, s)?;
    let classes = conn.subspace.coloring(ccn.cells).classes();
    let base = ConnectionReport {
        edge: conn.edge,
        source: real.network.label(conn.source).to_string(),
        target: real.network.label(conn.target).to_string(),
        subspace: conn.subspace,
        half: conn.half,
        angle: conn.angle,
        doubled: conn.doubled,
        delta,
        hit_time: None,
        final_distance: dist(p, &eq[conn.target]),
        max_deviation: 0.0,
        termination: Termination::Stalled,
        passed: false,
    };
    let Some(dir) = dir else {
        return Ok(base);
    };
    let x0: Vec<f64> = p.iter().zip(dir.iter()).map(|(a, b)| a + b).collect();
    let targets = vec![(conn.target, eq[conn.target].clone())];
    let run = run_until_settled(ccn, f, x0, &targets, &classes, s)?;
    let passed = run.reached.is_some() && run.max_deviation < s.invariance_tol;
    Ok(ConnectionReport {
        hit_time: run.reached.map(|(_, t)| t),
        final_distance: if run.final_distance.is_finite() { run.final_distance } else { f64::MAX },
        max_deviation: run.max_deviation,
        termination: run.termination,
        passed,
        ..base
    })
}

/// Integrates `rays` starts evenly spread on a circle of radius δ in the
/// transverse plane of a hub's pair subspace and records where each settles.
pub fn basin_sample(real: &Realization, f: &SynthesizedField, node: usize, rays: usize, s: &VerifySettings) -> Result<BasinReport> {
    let Some(&sub @ SubspaceId::ThreeD(..)) = real.nodes.get(node).and_then(|n| n.unstable.first()) else {
        return Err(Error::InvalidParam(format!("node {node} is not realized in a pair subspace")));
    };
    if rays < 12 {
        return Err(Error::InvalidParam("basin sampling needs at least 12 rays".into()));
    }
    let eq = equilibria_of(real, f)?;
    let ccn = &real.ccn;
    let basis = class_basis(ccn.cells, sub);
    let classes = sub.coloring(ccn.cells).classes();
    let delta = s.delta * real.config().spacing;
    let targets: Vec<(usize, Vec<f64>)> =
        (0..eq.len()).filter(|&v| v != node).map(|v| (v, eq[v].clone())).collect();
    let outcomes: Vec<Option<usize>> = (0..rays)
        .into_par_iter()
        .map(|m| {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / rays as f64;
            let w = DVector::from_vec(crate::synth::transverse_offset(delta, theta).to_vec());
            let off = &basis * w;
            let x0: Vec<f64> = eq[node].iter().zip(off.iter()).map(|(a, b)| a + b).collect();
            run_until_settled(ccn, f, x0, &targets, &classes, s).map(|r| r.reached.map(|(n, _)| n))
        })
        .collect::<Result<_>>()?;
    let mut counts = BTreeMap::new();
    let mut unresolved = 0;
    for o in &outcomes {
        match o {
            Some(n) => *counts.entry(real.network.label(*n).to_string()).or_insert(0) += 1,
            None => unresolved += 1,
        }
    }
    let every_target_hit = real
        .network
        .outgoing(node)
        .iter()
        .all(|&e| counts.get(real.network.label(real.network.edges()[e].1)).copied().unwrap_or(0) > 0);
    Ok(BasinReport {
        node,
        label: real.network.label(node).to_string(),
        rays,
        counts,
        unresolved,
        classified_fraction: (rays - unresolved) as f64 / rays as f64,
        every_target_hit,
    })
}

/// Adds eight random bumps of amplitude at most `eta`, centred on points of
/// the lifted arcs, to the coupling function.
pub fn perturb(f: &SynthesizedField, eta: f64, seed: u64) -> SynthesizedField {
    if eta == 0.0 || f.tubes().is_empty() {
        return f.with_perturbation(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps = (0..8)
        .map(|_| {
            let tube = &f.tubes()[rng.gen_range(0..f.tubes().len())];
            let center = tube.center(rng.gen_range(0..tube.len()));
            PerturbBump { center, radius: 0.1, amplitude: rng.gen_range(-eta..=eta) }
        })
        .collect();
    f.with_perturbation(bumps)
}

fn equilibrium_report(real: &Realization, node: usize) -> Result<EquilibriumReport> {
    let ccn = &real.ccn;
    let f = &real.field;
    let p = real.equilibrium(node);
    let residual = crate::ccn::admissible_rhs(ccn, f, &p)?.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let jac = jacobian(ccn, f, &p)?;
    let numeric = eigenvalues(&jac);
    let row = real.alphas.row(node);
    let closed: Vec<nalgebra::Complex<f64>> = match ccn.family {
        Some(Family::P(k)) => eig_full_sync_pn(row, k).into_iter().map(|x| nalgebra::Complex::new(x, 0.0)).collect(),
        Some(Family::Q(n1, n2)) => eig_full_sync_q(row, n1, n2),
        None => Vec::new(),
    };
    let deviation = spectrum_distance(&closed, &numeric).min(f64::MAX);
    let minimal = crate::ccn::minimal_synchrony(ccn)?;
    let mut unstable = Vec::new();
    for sub in minimal {
        let m = restricted(&jac, &class_basis(ccn.cells, sub));
        let lam_diag = (&m * DVector::from_element(m.nrows(), 1.0))[0];
        let mut ev = eigenvalues(&m);
        if let Some(i) = ev.iter().position(|z| (z.re - lam_diag).abs() < 1e-6 && z.im.abs() < 1e-9) {
            ev.remove(i);
        }
        if ev.iter().any(|z| z.re > 0.0) {
            unstable.push(sub);
        }
    }
    let consistent = unstable == real.nodes[node].unstable;
    let pair = |z: &nalgebra::Complex<f64>| (z.re, z.im);
    Ok(EquilibriumReport {
        node,
        label: real.network.label(node).to_string(),
        point: real.rho[node],
        residual,
        eigenvalues: numeric.iter().map(pair).collect(),
        closed_form: closed.iter().map(pair).collect(),
        deviation,
        unstable,
        consistent,
    })
}

fn verify_connections(real: &Realization, f: &SynthesizedField, s: &VerifySettings) -> Result<Vec<ConnectionReport>> {
    let eq = equilibria_of(real, f)?;
    (0..real.connections.len()).into_par_iter().map(|c| verify_with(real, f, c, s, &eq)).collect()
}

/// Runs the equilibrium, connection, basin and robustness suites and grades the realization.
pub fn verify_all(real: &Realization, s: &VerifySettings) -> Result<RealizationReport> {
    let equilibria = (0..real.nodes.len()).map(|v| equilibrium_report(real, v)).collect::<Result<Vec<_>>>()?;
    let connections = verify_connections(real, &real.field, s)?;
    let hubs: Vec<usize> = real
        .nodes
        .iter()
        .filter(|n| matches!(n.unstable.as_slice(), [SubspaceId::ThreeD(..)]))
        .map(|n| n.node)
        .collect();
    let basins = hubs.iter().map(|&h| basin_sample(real, &real.field, h, s.basin_rays, s)).collect::<Result<Vec<_>>>()?;
    let robustness = if s.trials > 0 {
        let trials: Vec<TrialReport> = (0..s.trials as u64)
            .into_par_iter()
            .map(|i| {
                let seed = s.seed.wrapping_add(i);
                let f = perturb(&real.field, s.perturb, seed);
                let reports = verify_connections(real, &f, s)?;
                let failed_edges: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.edge).collect();
                Ok(TrialReport { seed, passed: failed_edges.is_empty(), failed_edges })
            })
            .collect::<Result<_>>()?;
        let passed_trials = trials.iter().filter(|t| t.passed).count();
        Some(RobustnessReport { eta: s.perturb, trials, passed_trials })
    } else {
        None
    };
    let grade = grade(real, &connections, &basins, s);
    Ok(RealizationReport {
        mode: real.mode,
        cells: real.ccn.cells,
        equilibria,
        connections,
        basins,
        robustness,
        grade,
        settings: s.clone(),
    })
}

fn grade(real: &Realization, connections: &[ConnectionReport], basins: &[BasinReport], s: &VerifySettings) -> Grade {
    if !connections.iter().all(|c| c.passed) || real.nodes.iter().any(|n| n.unstable.len() != 1) {
        return Grade::Partial;
    }
    let planar_complete = real.nodes.iter().all(|n| match n.unstable[0] {
        SubspaceId::TwoD(_) => [1i8, -1].iter().all(|&h| {
            real.connections.iter().any(|c| c.source == n.node && c.subspace == n.unstable[0] && c.half == h)
        }),
        _ => true,
    });
    if !planar_complete {
        return Grade::Partial;
    }
    if basins.is_empty() {
        return Grade::Complete;
    }
    let ok = basins.iter().all(|b| (b.unresolved as f64) <= s.unresolved_tol * b.rays as f64 && b.every_target_hit);
    if ok {
        Grade::AlmostComplete
    } else {
        Grade::Partial
    }
}

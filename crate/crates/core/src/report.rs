//! Text summaries, trajectory plots and output files of a verified realization.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::ccn::SubspaceId;
use crate::dynamics::{connection_start, integrate, RealizationReport, VerifySettings};
use crate::error::Result;
use crate::synth::{transverse_polar, Realization};

/// Number of edges whose every realized arc passed, and the number of edges.
pub fn edge_summary(real: &Realization, report: &RealizationReport) -> (usize, usize) {
    let edges: BTreeSet<usize> = real.connections.iter().map(|c| c.edge).collect();
    let passed = edges
        .iter()
        .filter(|&&e| report.connections.iter().filter(|c| c.edge == e).all(|c| c.passed))
        .count();
    (passed, edges.len())
}

/// Multi-line human-readable summary.
pub fn render_summary(real: &Realization, report: &RealizationReport) -> String {
    let (passed, total) = edge_summary(real, report);
    let mut out = String::new();
    let _ = writeln!(out, "cells={} types={}", real.ccn.cells, real.ccn.types);
    let _ = writeln!(
        out,
        "connections={passed}/{total} passed ({} arcs, {} passed)",
        report.connections.len(),
        report.connections_passed()
    );
    for e in &report.equilibria {
        let _ = writeln!(out, "equilibrium {} residual={:.1e} eigen_deviation={:.1e}", e.label, e.residual, e.deviation);
    }
    for b in &report.basins {
        let counts: Vec<String> = b.counts.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let _ = writeln!(
            out,
            "basin {} rays={} classified={:.3} [{}] unresolved={}",
            b.label,
            b.rays,
            b.classified_fraction,
            counts.join(" "),
            b.unresolved
        );
    }
    if let Some(r) = &report.robustness {
        let _ = writeln!(out, "robustness eta={:e} passed={}/{}", r.eta, r.passed_trials, r.trials.len());
    }
    let grade = serde_json::to_value(report.grade).expect("grade serializes");
    let _ = writeln!(out, "grade={}", grade.as_str().unwrap_or_default());
    out
}

/// Planar coordinates used to draw a state of a subspace: page coordinates
/// (u, v) for 2D subspaces and the transverse plane for pair subspaces.
pub fn project(sub: SubspaceId, x: &[f64]) -> (f64, f64) {
    match sub {
        SubspaceId::TwoD(j) => (x[0], x[j] - x[0]),
        SubspaceId::ThreeD(a, b) => {
            let (_, r, th) = transverse_polar(&[x[0], x[a], x[b]]);
            (r * th.cos(), r * th.sin())
        }
        SubspaceId::Full => (x[0], 0.0),
    }
}

fn class_to_cells(sub: SubspaceId, cells: usize, point: &[f64]) -> Vec<f64> {
    let col = sub.coloring(cells);
    (0..cells).map(|c| point[col.class_of(c)]).collect()
}

struct Canvas {
    lo: (f64, f64),
    scale: f64,
    height: f64,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 20.0;

impl Canvas {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let sx = (WIDTH - 2.0 * MARGIN) / (hi.0 - lo.0).max(1e-9);
        let sy = (HEIGHT - 2.0 * MARGIN) / (hi.1 - lo.1).max(1e-9);
        let scale = sx.min(sy);
        Canvas { lo, scale, height: HEIGHT }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        (MARGIN + (p.0 - self.lo.0) * self.scale, self.height - MARGIN - (p.1 - self.lo.1) * self.scale)
    }

    fn path(&self, pts: &[(f64, f64)]) -> String {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
        }
        d
    }
}

/// SVG of one subspace: designed arcs dashed, integrated trajectories solid,
/// equilibria as dots.
pub fn render_subspace_svg(real: &Realization, sub: SubspaceId, trajectories: &[(String, Vec<(f64, f64)>)]) -> String {
    let cells = real.ccn.cells;
    let arcs: Vec<(usize, Vec<(f64, f64)>)> = real
        .field
        .arcs()
        .iter()
        .filter(|a| a.subspace == sub)
        .map(|a| (a.edge, a.samples.iter().map(|s| project(sub, &class_to_cells(sub, cells, &s.point))).collect()))
        .collect();
    let eq: Vec<(String, (f64, f64))> = real
        .nodes
        .iter()
        .map(|n| (n.label.clone(), project(sub, &real.equilibrium(n.node))))
        .collect();
    let canvas = Canvas::fit(
        arcs.iter()
            .flat_map(|(_, p)| p.iter().copied())
            .chain(trajectories.iter().flat_map(|(_, p)| p.iter().copied()))
            .chain(eq.iter().map(|(_, p)| *p)),
    );
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<title>{sub}</title>");
    for (edge, pts) in &arcs {
        let _ = writeln!(
            out,
            "<path class=\"arc\" data-edge=\"{edge}\" d=\"{}\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>",
            canvas.path(pts)
        );
    }
    for (label, pts) in trajectories {
        let _ = writeln!(
            out,
            "<path class=\"trajectory\" data-label=\"{label}\" d=\"{}\" fill=\"none\" stroke=\"#c33\"/>",
            canvas.path(pts)
        );
    }
    for (label, p) in &eq {
        let (x, y) = canvas.map(*p);
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\"/>");
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{label}</text>", x + 4.0, y - 4.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Integrates the designated start of every connection and draws one SVG per
/// subspace in use. Returns (file name, contents) pairs.
pub fn trajectory_plots(real: &Realization, s: &VerifySettings) -> Result<Vec<(String, String)>> {
    let subs: BTreeSet<SubspaceId> = real.connections.iter().map(|c| c.subspace).collect();
    let mut files = Vec::new();
    for sub in subs {
        let mut trajectories = Vec::new();
        for (i, c) in real.connections.iter().enumerate().filter(|(_, c)| c.subspace == sub) {
            let Some(x0) = connection_start(real, &real.field, i, s)? else {
                continue;
            };
            let target = real.equilibrium(c.target);
            let traj = integrate(&real.ccn, &real.field, &x0, s.step, s.t_max, |_, x| {
                x.iter().zip(&target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < s.arrival
            })?;
            let pts: Vec<(f64, f64)> = traj.states.iter().step_by(5).map(|x| project(sub, x)).collect();
            let label = format!("{}->{}", real.network.label(c.source), real.network.label(c.target));
            trajectories.push((label, pts));
        }
        let name = format!("subspace_{}.svg", sub.to_string().replace(',', "_"));
        files.push((name, render_subspace_svg(real, sub, &trajectories)));
    }
    Ok(files)
}

/// Writes (name, contents) pairs below `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in files {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

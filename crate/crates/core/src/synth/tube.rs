//! Lifting class-space arcs into the argument space of the coupling function.

use super::{bump, smoothstep, Arc, RealizationConfig};
use crate::ccn::{Ccn, SubspaceId};

/// Distinct argument patterns of a subspace: entry `i` of a pattern is the
/// class of argument slot `i` for some cell, and slot 0 is the cell's own class.
pub fn lift_table(ccn: &Ccn, subspace: SubspaceId) -> Vec<Vec<usize>> {
    let coloring = subspace.coloring(ccn.cells);
    let mut out: Vec<Vec<usize>> = Vec::new();
    for c in 0..ccn.cells {
        let mut p = vec![coloring.class_of(c)];
        p.extend(ccn.input[c].iter().map(|&s| coloring.class_of(s)));
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Fade of a tube near the diagonal of argument space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clip {
    None,
    /// Weight smoothstep((dist_to_diagonal − start) / width).
    Diagonal { start: f64, width: f64 },
}

impl Clip {
    pub fn factor(&self, y: &[f64]) -> f64 {
        match *self {
            Clip::None => 1.0,
            Clip::Diagonal { start, width } => {
                let m = y.iter().sum::<f64>() / y.len() as f64;
                let d = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>().sqrt();
                smoothstep((d - start) / width)
            }
        }
    }
}

const CHUNK: usize = 32;

#[derive(Debug, Clone)]
struct Chunk {
    start: usize,
    end: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    reach: f64,
}

/// One lift of one arc, with a chunked bounding-box index.
#[derive(Debug, Clone)]
pub struct Tube {
    pub arc: usize,
    pub pattern: Vec<usize>,
    pub clip: Clip,
    metric: Vec<f64>,
    dim: usize,
    points: Vec<f64>,
    design: Vec<f64>,
    flow: Vec<f64>,
    gain: Vec<f64>,
    weight: Vec<f64>,
    radius: Vec<f64>,
    chunks: Vec<Chunk>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    reach: f64,
    inner_fraction: f64,
}

/// Closest point of a tube to a query, with interpolated arc data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeHit {
    pub distance: f64,
    pub radius: f64,
    pub design: f64,
    pub flow: f64,
    pub gain: f64,
    pub weight: f64,
}

impl Tube {
    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Squared distance in the tube metric: each slot is weighted by the
    /// inverse multiplicity of its class, so lifts of class points are
    /// isometric to class space.
    fn dist2(&self, y: &[f64], p: &[f64]) -> f64 {
        y.iter().zip(p).zip(&self.metric).map(|((a, b), w)| w * (a - b) * (a - b)).sum()
    }

    fn box_dist2(&self, y: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
        let mut d = 0.0;
        for i in 0..self.dim {
            let e = if y[i] < lo[i] {
                lo[i] - y[i]
            } else if y[i] > hi[i] {
                y[i] - hi[i]
            } else {
                0.0
            };
            d += self.metric[i] * e * e;
        }
        d
    }

    /// Nearest point of the polyline within reach of `y`, if any.
    pub fn nearest(&self, y: &[f64]) -> Option<TubeHit> {
        let r2 = self.reach * self.reach;
        if self.box_dist2(y, &self.lo, &self.hi) >= r2 {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for ch in &self.chunks {
            if self.box_dist2(y, &ch.lo, &ch.hi) >= ch.reach * ch.reach {
                continue;
            }
            for i in ch.start..ch.end {
                let d = self.dist2(y, self.point(i));
                if d < best.0 {
                    best = (d, i);
                }
            }
        }
        if best.1 == usize::MAX {
            return None;
        }
        let i = best.1;
        let mut hit = (best.0, i, i, 0.0);
        for (a, b) in [(i.wrapping_sub(1), i), (i, i + 1)] {
            if a == usize::MAX || b >= self.len() {
                continue;
            }
            let (pa, pb) = (self.point(a), self.point(b));
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..self.dim {
                let e = pb[k] - pa[k];
                num += self.metric[k] * (y[k] - pa[k]) * e;
                den += self.metric[k] * e * e;
            }
            if den <= 0.0 {
                continue;
            }
            let s = (num / den).clamp(0.0, 1.0);
            let d: f64 = (0..self.dim)
                .map(|k| {
                    let q = pa[k] + s * (pb[k] - pa[k]);
                    self.metric[k] * (y[k] - q) * (y[k] - q)
                })
                .sum();
            if d < hit.0 {
                hit = (d, a, b, s);
            }
        }
        let (d2, a, b, s) = hit;
        let lerp = |v: &[f64]| v[a] + s * (v[b] - v[a]);
        let radius = lerp(&self.radius);
        let distance = d2.sqrt();
        if distance >= radius {
            return None;
        }
        Some(TubeHit {
            distance,
            radius,
            design: lerp(&self.design),
            flow: lerp(&self.flow),
            gain: lerp(&self.gain),
            weight: lerp(&self.weight),
        })
    }

    /// Tube weight δ and designed value of f at `y`, or None outside the tube.
    pub fn contribution(&self, y: &[f64]) -> Option<(f64, f64)> {
        let hit = self.nearest(y)?;
        let clip = self.clip.factor(y);
        let delta = bump(hit.distance, self.inner_fraction * hit.radius, hit.radius) * hit.weight * clip;
        if delta <= 0.0 {
            return None;
        }
        Some((delta, hit.flow + hit.gain * (hit.design - y[0])))
    }
}

/// Builds one tube per distinct argument pattern of the arc's subspace.
pub fn lift_and_tube(ccn: &Ccn, arc: &Arc, arc_index: usize, cfg: &RealizationConfig) -> Vec<Tube> {
    let clip = if arc.dim == 2 {
        Clip::Diagonal { start: cfg.kappa + 2.0 * cfg.tube_radius, width: cfg.tube_radius }
    } else {
        Clip::None
    };
    lift_table(ccn, arc.subspace)
        .into_iter()
        .map(|pattern| build_tube(arc, arc_index, pattern, clip, cfg.bump_inner_fraction))
        .collect()
}

fn build_tube(arc: &Arc, arc_index: usize, pattern: Vec<usize>, clip: Clip, inner_fraction: f64) -> Tube {
    let dim = pattern.len();
    let metric: Vec<f64> = pattern
        .iter()
        .map(|c| 1.0 / pattern.iter().filter(|d| *d == c).count() as f64)
        .collect();
    let own = pattern[0];
    let n = arc.samples.len();
    let mut points = Vec::with_capacity(n * dim);
    let (mut design, mut flow, mut gain, mut weight, mut radius) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for s in &arc.samples {
        points.extend(pattern.iter().map(|&c| s.point[c]));
        design.push(s.point[own]);
        flow.push(s.speed * s.tangent[own]);
        gain.push(s.gain[own]);
        weight.push(s.weight);
        radius.push(s.radius);
    }
    let bounds = |from: usize, to: usize| {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for i in from..to {
            for k in 0..dim {
                lo[k] = lo[k].min(points[i * dim + k]);
                hi[k] = hi[k].max(points[i * dim + k]);
            }
        }
        (lo, hi)
    };
    let chunks: Vec<Chunk> = (0..n)
        .step_by(CHUNK)
        .map(|start| {
            // Overlap by one sample so segment projections across chunk borders are found.
            let end = (start + CHUNK + 1).min(n);
            let (lo, hi) = bounds(start, end);
            let reach = radius[start..end].iter().copied().fold(0.0, f64::max);
            Chunk { start, end, lo, hi, reach }
        })
        .collect();
    let (lo, hi) = bounds(0, n);
    let reach = radius.iter().copied().fold(0.0, f64::max);
    Tube {
        arc: arc_index,
        pattern,
        clip,
        metric,
        dim,
        points,
        design,
        flow,
        gain,
        weight,
        radius,
        chunks,
        lo,
        hi,
        reach,
        inner_fraction,
    }
}

impl Tube {
    /// Argument-space point of sample `i`.
    pub fn center(&self, i: usize) -> Vec<f64> {
        self.point(i).to_vec()
    }
}

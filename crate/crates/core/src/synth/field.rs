use serde::{Deserialize, Serialize};

use super::{bump, lift_and_tube, soft_max_one, AlphaTable, Arc, RealizationConfig, Tube};
use crate::ccn::{Ccn, Coupling};
use crate::error::{Error, Result};

/// Shape of the region where a node's linear term is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LocalKind {
    /// Full weight within ε of the equilibrium, none beyond 2ε.
    Ball,
    /// Product of a radial bump around the diagonal and an axial bump along it.
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRegion {
    pub node: usize,
    pub rho: f64,
    pub alpha: Vec<f64>,
    pub kind: LocalKind,
    pub eps: f64,
}

impl LocalRegion {
    /// Weight of the region at `y`.
    pub fn weight(&self, y: &[f64]) -> f64 {
        let e = self.eps;
        match self.kind {
            LocalKind::Ball => {
                let d2: f64 = y.iter().map(|v| (v - self.rho) * (v - self.rho)).sum();
                if d2 >= 4.0 * e * e {
                    return 0.0;
                }
                bump(d2.sqrt(), e, 2.0 * e)
            }
            LocalKind::Cylinder => {
                let m = y.iter().sum::<f64>() / y.len() as f64;
                if (m - self.rho).abs() >= 2.0 * e {
                    return 0.0;
                }
                let r = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>().sqrt();
                bump(r, e, 2.0 * e) * bump((m - self.rho).abs(), e, 2.0 * e)
            }
        }
    }

    /// Linear term Σ α_l (y_l − ρ).
    pub fn linear(&self, y: &[f64]) -> f64 {
        self.alpha.iter().zip(y).map(|(a, v)| a * (v - self.rho)).sum()
    }
}

/// Smooth bump added to f by a perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbBump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

impl PerturbBump {
    pub fn value(&self, y: &[f64]) -> f64 {
        let d2: f64 = y.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 >= self.radius * self.radius {
            return 0.0;
        }
        self.amplitude * bump(d2.sqrt(), 0.0, self.radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FieldData {
    ccn: Ccn,
    config: RealizationConfig,
    regions: Vec<LocalRegion>,
    arcs: Vec<Arc>,
    perturbation: Vec<PerturbBump>,
}

/// The synthesized scalar coupling function.
///
/// Inside a tube the designed flow overrides the local linear term; where
/// several tubes are active their contributions are averaged.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "FieldData", into = "FieldData")]
pub struct SynthesizedField {
    data: FieldData,
    tubes: Vec<Tube>,
}

impl PartialEq for SynthesizedField {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

impl From<FieldData> for SynthesizedField {
    fn from(data: FieldData) -> Self {
        let tubes = data
            .arcs
            .iter()
            .enumerate()
            .flat_map(|(i, a)| lift_and_tube(&data.ccn, a, i, &data.config))
            .collect();
        SynthesizedField { data, tubes }
    }
}

impl From<SynthesizedField> for FieldData {
    fn from(f: SynthesizedField) -> Self {
        f.data
    }
}

impl SynthesizedField {
    pub fn ccn(&self) -> &Ccn {
        &self.data.ccn
    }

    pub fn config(&self) -> &RealizationConfig {
        &self.data.config
    }

    pub fn regions(&self) -> &[LocalRegion] {
        &self.data.regions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.data.arcs
    }

    pub fn tubes(&self) -> &[Tube] {
        &self.tubes
    }

    pub fn perturbation(&self) -> &[PerturbBump] {
        &self.data.perturbation
    }

    /// Copy of the field with the given perturbation bumps.
    pub fn with_perturbation(&self, bumps: Vec<PerturbBump>) -> Self {
        SynthesizedField { data: FieldData { perturbation: bumps, ..self.data.clone() }, tubes: self.tubes.clone() }
    }

    /// Sum of tube weights at `y` (zero away from every tube).
    pub fn tube_weight(&self, y: &[f64]) -> f64 {
        self.tubes.iter().filter_map(|t| t.contribution(y)).map(|(d, _)| d).sum()
    }

    /// Indices of arcs with an active tube at `y`.
    pub fn active_arcs(&self, y: &[f64]) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.tubes.iter().filter(|t| t.contribution(y).is_some()).map(|t| t.arc).collect();
        out.dedup();
        out
    }

    /// Number of local regions with non-zero weight at `y`.
    pub fn active_regions(&self, y: &[f64]) -> usize {
        self.data.regions.iter().filter(|r| r.weight(y) > 0.0).count()
    }
}

impl Coupling for SynthesizedField {
    fn arity(&self) -> usize {
        self.data.ccn.types + 1
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let mut local = 0.0;
        for r in &self.data.regions {
            let w = r.weight(y);
            if w > 0.0 {
                local += w * r.linear(y);
            }
        }
        let (mut s, mut flow) = (0.0, 0.0);
        for t in &self.tubes {
            if let Some((d, v)) = t.contribution(y) {
                s += d;
                flow += d * v;
            }
        }
        let mut f = local;
        if s > 0.0 {
            let n = soft_max_one(s, self.data.config.normalizer_width);
            f = (1.0 - s / n) * local + flow / n;
        }
        for b in &self.data.perturbation {
            f += b.value(y);
        }
        f
    }
}

/// Builds the field from local regions and arcs, checking that the local
/// regions are pairwise disjoint.
pub fn assemble(ccn: &Ccn, alphas: &AlphaTable, rho: &[f64], kind: LocalKind, arcs: Vec<Arc>, cfg: &RealizationConfig) -> Result<SynthesizedField> {
    if alphas.rows.len() != rho.len() {
        return Err(Error::Dimension { expected: rho.len(), got: alphas.rows.len() });
    }
    for row in &alphas.rows {
        if row.len() != ccn.types + 1 {
            return Err(Error::Dimension { expected: ccn.types + 1, got: row.len() });
        }
    }
    let mut sorted: Vec<f64> = rho.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Balls of radius 2ε around points ρ(1,..,1) are disjoint iff the ρ differ by more than 4ε/√(k+1);
    // cylinders need more than 4ε along the diagonal.
    let min_gap = match kind {
        LocalKind::Ball => 4.0 * cfg.eps / ((ccn.types + 1) as f64).sqrt(),
        LocalKind::Cylinder => 4.0 * cfg.eps,
    };
    if sorted.windows(2).any(|w| w[1] - w[0] <= min_gap) {
        return Err(Error::Synthesis("local regions overlap; increase spacing or reduce eps".into()));
    }
    let regions = alphas
        .rows
        .iter()
        .zip(rho)
        .enumerate()
        .map(|(node, (alpha, &rho))| LocalRegion { node, rho, alpha: alpha.clone(), kind, eps: cfg.eps })
        .collect();
    Ok(SynthesizedField::from(FieldData {
        ccn: ccn.clone(),
        config: cfg.clone(),
        regions,
        arcs,
        perturbation: Vec::new(),
    }))
}

//! Integration and linear analysis of admissible coupled cell systems.

mod verify;

pub use verify::{
    basin_sample, connection_start, equilibrium_on_diagonal, perturb, verify_all, verify_connection, BasinReport,
    ConnectionReport, EquilibriumReport, Grade, RealizationReport, RobustnessReport, TrialReport, VerifySettings,
};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::ccn::{Ccn, Coupling};
use crate::error::{Error, Result};

/// Evaluates f^N with one call of `f` per distinct argument vector.
pub struct Rhs<'a> {
    ccn: &'a Ccn,
    f: &'a dyn Coupling,
    args: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl<'a> Rhs<'a> {
    pub fn new(ccn: &'a Ccn, f: &'a dyn Coupling) -> Result<Self> {
        if f.arity() != ccn.types + 1 {
            return Err(Error::Dimension { expected: ccn.types + 1, got: f.arity() });
        }
        Ok(Rhs { ccn, f, args: vec![Vec::with_capacity(ccn.types + 1); ccn.cells], values: vec![0.0; ccn.cells] })
    }

    pub fn cells(&self) -> usize {
        self.ccn.cells
    }

    pub fn eval(&mut self, x: &[f64], out: &mut [f64]) {
        for c in 0..self.ccn.cells {
            let mut a = std::mem::take(&mut self.args[c]);
            self.ccn.arguments(c, x, &mut a);
            let same = (0..c).find(|&d| self.args[d] == a);
            self.values[c] = match same {
                Some(d) => self.values[d],
                None => self.f.eval(&a),
            };
            self.args[c] = a;
            out[c] = self.values[c];
        }
    }
}

/// Classical fourth-order Runge-Kutta stepper.
pub struct Rk4<'a> {
    rhs: Rhs<'a>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> Rk4<'a> {
    pub fn new(ccn: &'a Ccn, f: &'a dyn Coupling) -> Result<Self> {
        let n = ccn.cells;
        Ok(Rk4 { rhs: Rhs::new(ccn, f)?, k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] })
    }

    pub fn rhs(&mut self, x: &[f64], out: &mut [f64]) {
        self.rhs.eval(x, out);
    }

    /// Advances `x` by one step of size `h`; returns the derivative at the start.
    pub fn step(&mut self, x: &mut [f64], h: f64) -> &[f64] {
        let n = x.len();
        self.rhs.eval(x, &mut self.k[0]);
        for (stage, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
            let (prev, next) = self.k.split_at_mut(stage);
            for i in 0..n {
                self.tmp[i] = x[i] + c * h * prev[stage - 1][i];
            }
            self.rhs.eval(&self.tmp, &mut next[0]);
        }
        for i in 0..n {
            x[i] += h / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
        &self.k[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTarget,
    MaxTime,
    BlowUp,
    /// The state stopped moving before any stop condition fired.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectories hold the initial state")
    }
}

/// Norm beyond which a trajectory counts as blown up.
pub const BLOW_UP: f64 = 1e6;
/// Derivative norm below which a trajectory counts as stalled.
pub const STALL: f64 = 1e-13;

/// Integrates ẋ = f^N(x) with fixed-step RK4 until `stop(t, x)` holds, T
/// elapses, the state leaves the blow-up bound or the flow stalls.
pub fn integrate(
    ccn: &Ccn,
    f: &dyn Coupling,
    x0: &[f64],
    h: f64,
    t_max: f64,
    mut stop: impl FnMut(f64, &[f64]) -> bool,
) -> Result<Trajectory> {
    if !(h > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidParam("step and horizon must be positive".into()));
    }
    if x0.len() != ccn.cells {
        return Err(Error::Dimension { expected: ccn.cells, got: x0.len() });
    }
    let mut rk = Rk4::new(ccn, f)?;
    let mut x = x0.to_vec();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let steps = (t_max / h).round() as usize;
    let mut termination = Termination::MaxTime;
    if stop(t, &x) {
        termination = Termination::ReachedTarget;
    } else {
        for i in 1..=steps {
            let d = rk.step(&mut x, h);
            let speed = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            t = i as f64 * h;
            times.push(t);
            states.push(x.clone());
            if x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
                termination = Termination::BlowUp;
                break;
            }
            if stop(t, &x) {
                termination = Termination::ReachedTarget;
                break;
            }
            if speed < STALL {
                termination = Termination::Stalled;
                break;
            }
        }
    }
    Ok(Trajectory { times, states, termination })
}

/// Central finite-difference Jacobian of f^N at `p` with step 1e-6.
pub fn jacobian(ccn: &Ccn, f: &dyn Coupling, p: &[f64]) -> Result<DMatrix<f64>> {
    const H: f64 = 1e-6;
    let n = ccn.cells;
    if p.len() != n {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    let mut rhs = Rhs::new(ccn, f)?;
    let mut m = DMatrix::zeros(n, n);
    let (mut plus, mut minus) = (vec![0.0; n], vec![0.0; n]);
    let mut x = p.to_vec();
    for j in 0..n {
        x[j] = p[j] + H;
        rhs.eval(&x, &mut plus);
        x[j] = p[j] - H;
        rhs.eval(&x, &mut minus);
        x[j] = p[j];
        for i in 0..n {
            let d = (plus[i] - minus[i]) / (2.0 * H);
            if !d.is_finite() {
                return Err(Error::Verification("non-finite Jacobian entry".into()));
            }
            m[(i, j)] = d;
        }
    }
    Ok(m)
}

/// Eigenvalues of a real square matrix, sorted by real part then imaginary part.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = m.clone().complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Spectrum of P_k at a synchronous equilibrium with linear coefficients
/// α_0..α_k: Σα along the diagonal and α_0 − α_j inside Δ_j.
pub fn eig_full_sync_pn(alphas: &[f64], k: usize) -> Vec<f64> {
    assert_eq!(alphas.len(), k + 1, "need k + 1 coefficients");
    let mut out = vec![alphas.iter().sum()];
    out.extend(alphas[1..].iter().map(|a| alphas[0] - a));
    out
}

/// Eigenvalues of a Q network restricted to a pair subspace: the radial one
/// along the diagonal and the lateral pair, which may be complex.
pub fn eig_3d_pair(f0: f64, b_complement: f64, pair: (f64, f64)) -> (f64, [Complex<f64>; 2]) {
    let (fa, fb) = pair;
    let radial = f0 + b_complement + fa + fb;
    let disc = fb * fb + 2.0 * fa * fb - 3.0 * fa * fa;
    let mid = 0.5 * (2.0 * f0 - fa - fb);
    let root = if disc >= 0.0 { Complex::new(0.5 * disc.sqrt(), 0.0) } else { Complex::new(0.0, 0.5 * (-disc).sqrt()) };
    (radial, [Complex::new(mid, 0.0) + root, Complex::new(mid, 0.0) - root])
}

/// Closed-form spectrum of a Q(n1, n2) network at a synchronous equilibrium,
/// as the union over its minimal synchrony subspaces.
pub fn eig_full_sync_q(alphas: &[f64], n1: usize, n2: usize) -> Vec<Complex<f64>> {
    let sum: f64 = alphas.iter().sum();
    let mut out = vec![Complex::new(sum, 0.0)];
    out.extend((1..=n1).map(|j| Complex::new(alphas[0] - alphas[j], 0.0)));
    for p in 0..n2 {
        let (a, b) = (n1 + 2 * p + 1, n1 + 2 * p + 2);
        let rest = sum - alphas[0] - alphas[a] - alphas[b];
        let (_, lat) = eig_3d_pair(alphas[0], rest, (alphas[a], alphas[b]));
        out.extend(lat);
    }
    out
}

/// Largest distance between two multisets of eigenvalues under greedy nearest matching.
pub fn spectrum_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

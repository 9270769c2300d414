//! Homogeneous coupled cell networks with asymmetric inputs.
//!
//! Every cell receives exactly one input of each type. Types are numbered
//! `1..=types` in documentation and stored 0-based (`input[c][t]` is the cell
//! feeding type `t + 1` into cell `c`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inductive family a network was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    P(usize),
    Q(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ccn {
    pub cells: usize,
    pub types: usize,
    pub input: Vec<Vec<usize>>,
    #[serde(default)]
    pub family: Option<Family>,
}

/// A partition of the cells, stored as a canonical class label per cell
/// (restricted-growth form: labels appear in increasing first-occurrence order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coloring {
    labels: Vec<usize>,
}

impl Coloring {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Coloring { labels }
    }

    pub fn from_classes(cells: usize, classes: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; cells];
        for (k, class) in classes.iter().enumerate() {
            for &c in class {
                if c >= cells || labels[c] != usize::MAX {
                    return Err(Error::InvalidParam("classes must partition the cells".into()));
                }
                labels[c] = k;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::InvalidParam("classes must cover every cell".into()));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for (c, &l) in self.labels.iter().enumerate() {
            out[l].push(c);
        }
        out
    }

    pub fn class_of(&self, cell: usize) -> usize {
        self.labels[cell]
    }

    /// True when every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Coloring) -> bool {
        self.classes().iter().all(|cl| cl.iter().all(|&c| other.labels[c] == other.labels[cl[0]]))
    }
}

/// Named polydiagonals used by the realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubspaceId {
    /// Full synchrony Δ_0.
    Full,
    /// Δ_j = {x_0 = x_i, i ≠ j}.
    TwoD(usize),
    /// Δ_{j1,j2} = {x_0 = x_i, i ≠ j1, j2}.
    ThreeD(usize, usize),
}

impl SubspaceId {
    pub fn coloring(&self, cells: usize) -> Coloring {
        let labels: Vec<usize> = (0..cells)
            .map(|c| match *self {
                SubspaceId::Full => 0,
                SubspaceId::TwoD(j) if c == j => 1,
                SubspaceId::ThreeD(a, _) if c == a => 1,
                SubspaceId::ThreeD(_, b) if c == b => 2,
                _ => 0,
            })
            .collect();
        Coloring::from_labels(&labels)
    }

    pub fn dim(&self) -> usize {
        match self {
            SubspaceId::Full => 1,
            SubspaceId::TwoD(_) => 2,
            SubspaceId::ThreeD(..) => 3,
        }
    }

    /// Cells that are free to leave the synchronized class.
    pub fn free_cells(&self) -> Vec<usize> {
        match *self {
            SubspaceId::Full => vec![],
            SubspaceId::TwoD(j) => vec![j],
            SubspaceId::ThreeD(a, b) => vec![a, b],
        }
    }
}

impl std::fmt::Display for SubspaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubspaceId::Full => write!(f, "D0"),
            SubspaceId::TwoD(j) => write!(f, "D{j}"),
            SubspaceId::ThreeD(a, b) => write!(f, "D{a},{b}"),
        }
    }
}

/// Scalar coupling function `f(y_0, y_1, .., y_k)` shared by every cell.
pub trait Coupling: Sync {
    fn arity(&self) -> usize;
    fn eval(&self, y: &[f64]) -> f64;
}

/// Adapts a closure to [`Coupling`].
pub struct FnCoupling<F> {
    pub arity: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Coupling for FnCoupling<F> {
    fn arity(&self) -> usize {
        self.arity
    }
    fn eval(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }
}

impl Ccn {
    /// Validates totality and range of the input table.
    pub fn new(cells: usize, types: usize, input: Vec<Vec<usize>>) -> Result<Self> {
        let ccn = Ccn { cells, types, input, family: None };
        ccn.validate()?;
        Ok(ccn)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.len() != self.cells {
            return Err(Error::Dimension { expected: self.cells, got: self.input.len() });
        }
        for (c, row) in self.input.iter().enumerate() {
            if row.len() != self.types {
                return Err(Error::Schema(format!("cell {c} has {} inputs, expected {}", row.len(), self.types)));
            }
            if let Some(&s) = row.iter().find(|&&s| s >= self.cells) {
                return Err(Error::Schema(format!("cell {c} has input from missing cell {s}")));
            }
        }
        Ok(())
    }

    /// Edge set of type `t` (1-based) as (source, target) pairs.
    pub fn edges_of_type(&self, t: usize) -> Vec<(usize, usize)> {
        (0..self.cells).map(|c| (self.input[c][t - 1], c)).collect()
    }

    /// Argument vector `(x_c, x_{c_1}, .., x_{c_k})` of cell `c`.
    pub fn arguments(&self, c: usize, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.push(x[c]);
        out.extend(self.input[c].iter().map(|&s| x[s]));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CcnJson { cells: self.cells, types: self.types, inputs: self.input.clone() })
            .expect("network serialization cannot fail")
    }

    /// DOT digraph with one arrowhead style per input type.
    pub fn to_dot(&self) -> String {
        const HEADS: [&str; 8] = ["normal", "vee", "dot", "diamond", "box", "tee", "inv", "crow"];
        let mut s = String::from("digraph ccn {\n");
        for c in 0..self.cells {
            let _ = writeln!(s, "  c{c} [label=\"{c}\"];");
        }
        for t in 1..=self.types {
            for (src, dst) in self.edges_of_type(t) {
                let _ = writeln!(
                    s,
                    "  c{src} -> c{dst} [arrowhead={}, label=\"{t}\"];",
                    HEADS[(t - 1) % HEADS.len()]
                );
            }
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Serialize, Deserialize)]
struct CcnJson {
    cells: usize,
    types: usize,
    inputs: Vec<Vec<usize>>,
}

pub fn parse_ccn_json(text: &str) -> Result<Ccn> {
    let doc: CcnJson = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    Ccn::new(doc.cells, doc.types, doc.inputs)
}

/// P_n: cells 0..=n, where cell c receives type j from cell j, or from cell 0 when c = j.
pub fn build_pn(n: usize) -> Result<Ccn> {
    if n < 1 {
        return Err(Error::InvalidParam("P_n needs n >= 1".into()));
    }
    let mut input = vec![vec![1], vec![0]];
    for m in 1..n {
        // Step from P_m to P_{m+1}: new cell m+1 and new type m+1.
        let new = m + 1;
        for row in input.iter_mut() {
            row.push(new);
        }
        let mut row: Vec<usize> = (1..=m).collect();
        row.push(0);
        input.push(row);
    }
    let mut ccn = Ccn::new(n + 1, n, input)?;
    ccn.family = Some(Family::P(n));
    Ok(ccn)
}

/// Q_{n1,n2}: P_{n1} (or a single cell when n1 = 0) extended by n2 steps, each
/// adding two cells and two types.
pub fn build_q(n1: usize, n2: usize) -> Result<Ccn> {
    let mut input: Vec<Vec<usize>> = if n1 > 0 { build_pn(n1)?.input } else { vec![vec![]] };
    for k in 0..n2 {
        let m = n1 + 2 * k;
        let (a, b) = (m + 1, m + 2);
        let mut row_a: Vec<usize> = (1..=m).collect();
        let mut row_b: Vec<usize> = (1..=m).collect();
        for row in input.iter_mut() {
            row.push(a);
            row.push(b);
        }
        row_a.extend([b, b]);
        row_b.extend([0, a]);
        input.push(row_a);
        input.push(row_b);
    }
    let cells = n1 + 2 * n2 + 1;
    let mut ccn = Ccn::new(cells, n1 + 2 * n2, input)?;
    ccn.family = Some(Family::Q(n1, n2));
    Ok(ccn)
}

/// Same-coloured cells must receive same-coloured inputs, type by type.
pub fn is_balanced(ccn: &Ccn, coloring: &Coloring) -> bool {
    let l = coloring.labels();
    if l.len() != ccn.cells {
        return false;
    }
    for c in 0..ccn.cells {
        for d in c + 1..ccn.cells {
            if l[c] == l[d] && (0..ccn.types).any(|t| l[ccn.input[c][t]] != l[ccn.input[d][t]]) {
                return false;
            }
        }
    }
    true
}

pub const DEFAULT_MAX_CELLS: usize = 10;

/// Calls `visit` on every restricted-growth string of length `n`, in lexicographic order.
pub fn for_each_partition(n: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut a = vec![0usize; n];
    let mut maxp = vec![0usize; n];
    loop {
        visit(&a);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if a[i] <= maxp[i - 1] {
                break;
            }
            i -= 1;
        }
        a[i] += 1;
        let m = maxp[i - 1].max(a[i]);
        maxp[i] = m;
        for j in i + 1..n {
            a[j] = 0;
            maxp[j] = m;
        }
    }
}

/// All balanced colourings in restricted-growth order.
pub fn enumerate_balanced(ccn: &Ccn, max_cells: usize) -> Result<Vec<Coloring>> {
    if ccn.cells > max_cells {
        return Err(Error::SizeGuard(format!(
            "{} cells exceeds the enumeration bound of {max_cells}",
            ccn.cells
        )));
    }
    let mut out = Vec::new();
    for_each_partition(ccn.cells, |rgs| {
        let c = Coloring { labels: rgs.to_vec() };
        if is_balanced(ccn, &c) {
            out.push(c);
        }
    });
    Ok(out)
}

/// Minimal synchrony subspaces of the inductive families.
pub fn minimal_synchrony(ccn: &Ccn) -> Result<Vec<SubspaceId>> {
    match ccn.family {
        Some(Family::P(n)) => Ok((1..=n).map(SubspaceId::TwoD).collect()),
        Some(Family::Q(n1, n2)) => {
            let mut out: Vec<SubspaceId> = (1..=n1).map(SubspaceId::TwoD).collect();
            out.extend((0..n2).map(|k| SubspaceId::ThreeD(n1 + 2 * k + 1, n1 + 2 * k + 2)));
            Ok(out)
        }
        None => Err(Error::InvalidParam("minimal synchrony is only known for P_n and Q families".into())),
    }
}

/// Evaluates `f^N(x)`: component c is `f(x_c, x_{c_1}, .., x_{c_k})`.
pub fn admissible_rhs(ccn: &Ccn, f: &dyn Coupling, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != ccn.cells {
        return Err(Error::Dimension { expected: ccn.cells, got: x.len() });
    }
    if f.arity() != ccn.types + 1 {
        return Err(Error::Dimension { expected: ccn.types + 1, got: f.arity() });
    }
    let mut args = Vec::with_capacity(ccn.types + 1);
    Ok((0..ccn.cells)
        .map(|c| {
            ccn.arguments(c, x, &mut args);
            f.eval(&args)
        })
        .collect())
}

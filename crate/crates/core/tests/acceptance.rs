//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use hetnet::book::{embedding_to_json, exact_thickness, parse_embedding_json, validate_embedding};
use hetnet::ccn::{
    build_pn, build_q, enumerate_balanced, is_balanced, minimal_synchrony, parse_ccn_json, Ccn, Coloring, FnCoupling,
    SubspaceId,
};
use hetnet::dynamics::{
    basin_sample, eig_3d_pair, eig_full_sync_pn, eig_full_sync_q, eigenvalues, integrate, jacobian, perturb,
    spectrum_distance, verify_all, verify_connection, Grade, RealizationReport, VerifySettings,
};
use hetnet::graph::{parse_hetnet, samples, HetNet};
use hetnet::synth::{realize_almost_complete, realize_book, Realization, RealizationConfig};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1_BUDGET: Duration = Duration::from_secs(1);
const C2_BUDGET: Duration = Duration::from_secs(30);
const C3_TOL: f64 = 1e-6;
const C3_DRAWS: usize = 100;
const C4_BUDGET: Duration = Duration::from_secs(60);
const C5_BUDGET: Duration = Duration::from_secs(120);
const C5_ARRIVAL: f64 = 1e-3;
const C5_RESIDENCE: f64 = 5.0;
const C5_T_MAX: f64 = 500.0;
const C5_DEVIATION: f64 = 1e-8;
const C5_RESIDUAL: f64 = 1e-10;
const C6_BUDGET: Duration = Duration::from_secs(300);
const C6_RAYS: usize = 72;
const C6_CLASSIFIED: f64 = 0.95;
const C7_ETA: f64 = 1e-3;
const C7_SEEDS: u64 = 10;
const C8_SYNC_TOL: f64 = 1e-10;
const C8_SYNC_T: f64 = 10.0;
const C8_DRIFT: f64 = 1e-3;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn settings() -> VerifySettings {
    VerifySettings { arrival: C5_ARRIVAL, residence: C5_RESIDENCE, t_max: C5_T_MAX, ..VerifySettings::default() }
}

fn edge_set(ccn: &Ccn, t: usize) -> BTreeSet<(usize, usize)> {
    ccn.edges_of_type(t).into_iter().collect()
}

fn set(v: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    v.iter().copied().collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for n in 1..=8 {
        match build_pn(n) {
            Ok(c) if c.validate().is_ok() && c.cells == n + 1 && c.types == n => {}
            _ => return fail(format!("P_{n} is not a total network")),
        }
    }
    for n1 in 0..=4 {
        for n2 in 0..=3 {
            match build_q(n1, n2) {
                Ok(c) if c.validate().is_ok() && c.cells == n1 + 2 * n2 + 1 => {}
                _ => return fail(format!("Q({n1},{n2}) is not a total network")),
            }
        }
    }
    let p2 = build_pn(2).unwrap();
    if edge_set(&p2, 1) != set(&[(1, 0), (0, 1), (1, 2)]) || edge_set(&p2, 2) != set(&[(2, 0), (2, 1), (0, 2)]) {
        return fail("P_2 edge sets differ");
    }
    let q01 = build_q(0, 1).unwrap();
    if edge_set(&q01, 1) != set(&[(1, 0), (2, 1), (0, 2)]) || edge_set(&q01, 2) != set(&[(2, 0), (2, 1), (1, 2)]) {
        return fail("Q(0,1) edge sets differ");
    }
    let took = start.elapsed();
    if took > C1_BUDGET {
        return fail(format!("took {took:?}"));
    }
    pass(format!("P_1..P_8 and Q(n1<=4, n2<=3) total, P_2 and Q(0,1) exact, {took:.2?}"))
}

/// Balanced check straight from the definition.
fn oracle_balanced(ccn: &Ccn, labels: &[usize]) -> bool {
    for c in 0..ccn.cells {
        for d in 0..ccn.cells {
            if labels[c] == labels[d] && (0..ccn.types).any(|t| labels[ccn.input[c][t]] != labels[ccn.input[d][t]]) {
                return false;
            }
        }
    }
    true
}

/// All canonical partitions of `n` cells by counting through base-n labellings.
fn oracle_partitions(n: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let mut raw = vec![0usize; n];
    loop {
        out.insert(Coloring::from_labels(&raw).labels().to_vec());
        let mut i = 0;
        while i < n && raw[i] == n - 1 {
            raw[i] = 0;
            i += 1;
        }
        if i == n {
            return out;
        }
        raw[i] += 1;
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    for n in 1..=6 {
        let ccn = build_pn(n).unwrap();
        for j in 1..=n {
            if !is_balanced(&ccn, &SubspaceId::TwoD(j).coloring(ccn.cells)) {
                return fail(format!("Delta_{j} of P_{n} is not balanced"));
            }
        }
        let got: BTreeSet<Vec<usize>> =
            enumerate_balanced(&ccn, 10).unwrap().iter().map(|c| c.labels().to_vec()).collect();
        let want: BTreeSet<Vec<usize>> =
            oracle_partitions(ccn.cells).into_iter().filter(|l| oracle_balanced(&ccn, l)).collect();
        if got != want {
            return fail(format!("balanced colourings of P_{n} differ from brute force"));
        }
    }
    let mut checked = 0;
    for n1 in 0..=4 {
        for n2 in 0..=3 {
            let ccn = build_q(n1, n2).unwrap();
            if ccn.cells > 8 {
                continue;
            }
            let full = SubspaceId::Full.coloring(ccn.cells);
            let balanced = enumerate_balanced(&ccn, 10).unwrap();
            let nontrivial: Vec<&Coloring> = balanced.iter().filter(|c| **c != full).collect();
            // Coarsest nontrivial balanced colourings are the minimal subspaces.
            let want: BTreeSet<Vec<usize>> = nontrivial
                .iter()
                .filter(|c| !nontrivial.iter().any(|b| b != *c && c.refines(b)))
                .map(|c| c.labels().to_vec())
                .collect();
            let got: BTreeSet<Vec<usize>> =
                minimal_synchrony(&ccn).unwrap().iter().map(|s| s.coloring(ccn.cells).labels().to_vec()).collect();
            if got != want {
                return fail(format!("minimal synchrony of Q({n1},{n2}) differs"));
            }
            checked += 1;
        }
    }
    let took = start.elapsed();
    if took > C2_BUDGET {
        return fail(format!("took {took:?}"));
    }
    pass(format!("P_1..P_6 match brute force, {checked} Q networks match the minimal list, {took:.2?}"))
}

/// Quadratic coupling with known partial derivatives at a synchronous point.
fn quadratic(a: Vec<f64>, c: Vec<f64>) -> FnCoupling<impl Fn(&[f64]) -> f64 + Sync> {
    FnCoupling {
        arity: a.len(),
        f: move |y: &[f64]| y.iter().zip(a.iter().zip(&c)).map(|(v, (ai, ci))| ai * v + ci * v * v).sum(),
    }
}

fn draw(rng: &mut ChaCha8Rng, arity: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let a: Vec<f64> = (0..arity).map(|_| rng.gen_range(-4.0..4.0)).collect();
    let c: Vec<f64> = (0..arity).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (a, c, rng.gen_range(-2.0..2.0))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for i in 0..C3_DRAWS {
        let k = 1 + i % 6;
        let ccn = build_pn(k).unwrap();
        let (a, c, rho) = draw(&mut rng, k + 1);
        let alphas: Vec<f64> = a.iter().zip(&c).map(|(ai, ci)| ai + 2.0 * ci * rho).collect();
        let j = jacobian(&ccn, &quadratic(a, c), &vec![rho; k + 1]).unwrap();
        let closed: Vec<Complex<f64>> = eig_full_sync_pn(&alphas, k).iter().map(|&x| Complex::new(x, 0.0)).collect();
        worst = worst.max(spectrum_distance(&closed, &eigenvalues(&j)));
    }
    for i in 0..C3_DRAWS {
        let n1 = i % 3;
        let ccn = build_q(n1, 1).unwrap();
        let (a, c, rho) = draw(&mut rng, ccn.types + 1);
        let alphas: Vec<f64> = a.iter().zip(&c).map(|(ai, ci)| ai + 2.0 * ci * rho).collect();
        let numeric = eigenvalues(&jacobian(&ccn, &quadratic(a, c), &vec![rho; ccn.cells]).unwrap());
        let rest: f64 = alphas[1..=n1].iter().sum();
        let (radial, lat) = eig_3d_pair(alphas[0], rest, (alphas[n1 + 1], alphas[n1 + 2]));
        for z in [Complex::new(radial, 0.0), lat[0], lat[1]] {
            let nearest = numeric.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
        worst = worst.max(spectrum_distance(&eig_full_sync_q(&alphas, n1, 1), &numeric));
    }
    let (_, a) = eig_3d_pair(-1.0, 0.0, (-2.0, -2.0));
    let (_, b) = eig_3d_pair(-1.0, 0.0, (0.0, 0.0));
    let one = Complex::new(1.0, 0.0);
    if a != [one, one] || b != [-one, -one] {
        return fail(format!("worked cases give {a:?} and {b:?}"));
    }
    if worst >= C3_TOL {
        return fail(format!("largest spectrum distance {worst:.2e}"));
    }
    pass(format!("{} draws, largest distance {worst:.1e} < {C3_TOL:e}, (1,1) and (-1,-1) exact", 2 * C3_DRAWS))
}

fn criterion_4() -> Outcome {
    let cases: [(&str, HetNet, fn(usize) -> bool); 4] = [
        ("two_cycle_chain", samples::two_cycle_chain(), |k| k == 2),
        ("3-cycle", HetNet::cycle(3).unwrap(), |k| k == 3),
        ("4-cycle", HetNet::cycle(4).unwrap(), |k| k == 2),
        ("DNN(6)", samples::dnn(6), |k| k <= 3),
    ];
    let mut parts = Vec::new();
    for (name, net, want) in cases {
        let start = Instant::now();
        let t = match exact_thickness(&net, 8, C4_BUDGET) {
            Ok(t) => t,
            Err(e) => return fail(format!("{name}: {e}")),
        };
        let took = start.elapsed();
        if !want(t.k) || !validate_embedding(&net, &t.embedding).is_empty() || took > C4_BUDGET {
            return fail(format!("{name}: k={} in {took:.2?}", t.k));
        }
        parts.push(format!("{name} k={} ({took:.2?})", t.k));
    }
    pass(parts.join(", "))
}

fn two_cycle_chain() -> Realization {
    let net = samples::two_cycle_chain();
    let emb = exact_thickness(&net, 4, C4_BUDGET).unwrap().embedding;
    realize_book(&net, &emb, &RealizationConfig::default()).unwrap()
}

fn fan() -> Realization {
    realize_almost_complete(&samples::fan_with_returns(), &RealizationConfig::default()).unwrap()
}

fn distinct_edges(real: &Realization) -> usize {
    real.connections.iter().map(|c| c.edge).collect::<BTreeSet<_>>().len()
}

fn criterion_5(real: &Realization) -> Outcome {
    let start = Instant::now();
    if real.ccn.cells != 3 || distinct_edges(real) != 4 {
        return fail(format!("{} cells, {} edges", real.ccn.cells, distinct_edges(real)));
    }
    let report = verify_all(real, &settings()).unwrap();
    let took = start.elapsed();
    let dev = report.connections.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
    let res = report.equilibria.iter().map(|e| e.residual).fold(0.0, f64::max);
    let all = report.connections.iter().all(|c| c.passed);
    let line = format!(
        "4 connections over {} arcs, passed={all}, deviation {dev:.1e}, residual {res:.1e}, {took:.2?}",
        report.connections.len()
    );
    if all && dev < C5_DEVIATION && res < C5_RESIDUAL && took < C5_BUDGET && report.grade == Grade::Complete {
        pass(line)
    } else {
        fail(line)
    }
}

fn criterion_6(real: &Realization) -> Outcome {
    let start = Instant::now();
    if real.ccn.cells != 6 || distinct_edges(real) != 6 {
        return fail(format!("{} cells, {} edges", real.ccn.cells, distinct_edges(real)));
    }
    let s = VerifySettings { basin_rays: C6_RAYS, ..settings() };
    let report = verify_all(real, &s).unwrap();
    let hub = basin_sample(real, &real.field, 0, C6_RAYS, &s).unwrap();
    let took = start.elapsed();
    let all = report.connections.iter().all(|c| c.passed);
    let line = format!(
        "6 cells, 6 connections passed={all}, hub classified {:.3} of {C6_RAYS} rays, all targets hit={}, grade={:?}, {took:.2?}",
        hub.classified_fraction, hub.every_target_hit, report.grade
    );
    if all
        && hub.classified_fraction >= C6_CLASSIFIED
        && hub.every_target_hit
        && hub.counts.len() == 3
        && report.grade == Grade::AlmostComplete
        && took < C6_BUDGET
    {
        pass(line)
    } else {
        fail(line)
    }
}

fn criterion_7(reals: &[(&str, &Realization)]) -> Outcome {
    let start = Instant::now();
    let s = settings();
    let mut failures = Vec::new();
    let mut runs = 0;
    for (name, real) in reals {
        for seed in 0..C7_SEEDS {
            let f = perturb(&real.field, C7_ETA, seed);
            for i in 0..real.connections.len() {
                runs += 1;
                if !verify_connection(real, &f, i, &s).unwrap().passed {
                    failures.push(format!("{name} seed {seed} arc {i}"));
                }
            }
        }
    }
    let line = format!("eta={C7_ETA:e}, {C7_SEEDS} seeds, {runs} arc runs, {} failed, {:.2?}", failures.len(), start.elapsed());
    if failures.is_empty() {
        pass(line)
    } else {
        fail(format!("{line}: {}", failures.join("; ")))
    }
}

/// Cubic-damped quadratic coupling with random small coefficients.
fn polynomial(rng: &mut ChaCha8Rng, arity: usize) -> FnCoupling<impl Fn(&[f64]) -> f64 + Sync> {
    let lin: Vec<f64> = (0..=arity).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let quad: Vec<f64> = (0..arity * arity).map(|_| rng.gen_range(-0.3..0.3)).collect();
    FnCoupling {
        arity,
        f: move |y: &[f64]| {
            let mut v = lin[arity];
            for i in 0..arity {
                v += lin[i] * y[i];
                for j in 0..arity {
                    v += quad[i * arity + j] * y[i] * y[j];
                }
            }
            v - y[0].powi(3)
        },
    }
}

fn spread(x: &[f64], col: &Coloring) -> f64 {
    col.classes()
        .iter()
        .map(|cls| {
            let (lo, hi) = cls.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| (l.min(x[c]), h.max(x[c])));
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn criterion_8(book: &Realization, spatial: &Realization) -> Outcome {
    let mut notes = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(83);
    let mut worst: f64 = 0.0;
    let nets = [build_pn(1), build_pn(2), build_pn(3), build_q(0, 1), build_q(1, 1), build_q(1, 2)];
    for ccn in nets.into_iter().map(Result::unwrap) {
        for sub in minimal_synchrony(&ccn).unwrap() {
            for _ in 0..4 {
                let f = polynomial(&mut rng, ccn.types + 1);
                let col = sub.coloring(ccn.cells);
                let v: Vec<f64> = (0..col.num_classes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let x0: Vec<f64> = (0..ccn.cells).map(|c| v[col.class_of(c)]).collect();
                let traj = integrate(&ccn, &f, &x0, 0.01, C8_SYNC_T, |_, _| false).unwrap();
                worst = traj.states.iter().map(|x| spread(x, &col)).fold(worst, f64::max);
            }
        }
    }
    if worst > C8_SYNC_TOL {
        return fail(format!("synchrony spread {worst:.1e}"));
    }
    notes.push(format!("synchrony spread {worst:.1e}"));

    let coarse = settings();
    let fine = VerifySettings { step: coarse.step / 2.0, ..coarse.clone() };
    let mut drift: f64 = 0.0;
    for real in [book, spatial] {
        for i in 0..real.connections.len() {
            let a = verify_connection(real, &real.field, i, &coarse).unwrap().hit_time;
            let b = verify_connection(real, &real.field, i, &fine).unwrap().hit_time;
            match (a, b) {
                (Some(a), Some(b)) => drift = drift.max((a - b).abs()),
                _ => return fail(format!("connection {i} has no hit time")),
            }
        }
    }
    if drift >= C8_DRIFT {
        return fail(format!("hit-time drift {drift:.1e}"));
    }
    notes.push(format!("step-halving drift {drift:.1e}"));

    let net = samples::two_cycle_chain();
    let emb = exact_thickness(&net, 4, C4_BUDGET).unwrap().embedding;
    let ccn = build_q(1, 2).unwrap();
    let round_trips = [
        parse_hetnet(&net.to_json()).map(|n| n == net).unwrap_or(false),
        parse_ccn_json(&ccn.to_json()).map(|c| c.input == ccn.input).unwrap_or(false),
        parse_embedding_json(&net, &embedding_to_json(&net, &emb)).map(|e| e == emb).unwrap_or(false),
        Realization::from_json(&book.to_json()).map(|r| r.to_json() == book.to_json()).unwrap_or(false),
        Realization::from_json(&spatial.to_json()).map(|r| r.to_json() == spatial.to_json()).unwrap_or(false),
    ];
    if round_trips.iter().any(|ok| !ok) {
        return fail(format!("round trips {round_trips:?}"));
    }

    let s = VerifySettings { perturb: C7_ETA, trials: 2, seed: 5, ..settings() };
    let first = verify_all(book, &s).unwrap().to_json();
    let again = two_cycle_chain();
    let second = verify_all(&again, &s).unwrap().to_json();
    let parsed: RealizationReport = serde_json::from_str(&first).unwrap();
    if first != second || parsed.to_json() != first || again.to_json() != book.to_json() {
        return fail("reports differ across runs");
    }
    notes.push("5 serde round trips and repeated reports identical".into());
    pass(notes.join(", "))
}

fn main() {
    let total = Instant::now();
    let two_cycle_chain_real = two_cycle_chain();
    let fan_real = fan();
    let results = [
        ("1 construction validity", criterion_1()),
        ("2 synchrony", criterion_2()),
        ("3 eigenvalue closed forms", criterion_3()),
        ("4 book thickness", criterion_4()),
        ("5 book realization of two_cycle_chain", criterion_5(&two_cycle_chain_real)),
        ("6 fan on Q(3,1)", criterion_6(&fan_real)),
        ("7 robustness", criterion_7(&[("two_cycle_chain", &two_cycle_chain_real), ("fan", &fan_real)])),
        ("8 property suites", criterion_8(&two_cycle_chain_real, &fan_real)),
    ];
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|(_, o)| !o.ok).count();
    println!("acceptance: {}/{} passed in {:.1?}", results.len() - failed, results.len(), total.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}

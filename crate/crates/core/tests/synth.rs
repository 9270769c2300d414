use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::Duration;

use hetnet::book::{exact_thickness, BookEmbedding, EdgePlacement, SpineOrder};
use hetnet::ccn::{admissible_rhs, build_pn, Coupling, SubspaceId};
use hetnet::dynamics::{verify_all, Grade, VerifySettings};
use hetnet::graph::{samples, DegreeProfile, HetNet};
use hetnet::synth::*;
use hetnet::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_cycle_chain() -> &'static Realization {
    static R: OnceLock<Realization> = OnceLock::new();
    R.get_or_init(|| {
        let net = samples::two_cycle_chain();
        let emb = exact_thickness(&net, 4, Duration::from_secs(10)).unwrap().embedding;
        realize_book(&net, &emb, &RealizationConfig::default()).unwrap()
    })
}

fn fan() -> &'static Realization {
    static R: OnceLock<Realization> = OnceLock::new();
    R.get_or_init(|| realize_almost_complete(&samples::fan_with_returns(), &RealizationConfig::default()).unwrap())
}

/// Alpha row of P_2 that is unstable in `sends` and stable in the other page.
fn p2_row(sends: usize) -> Vec<f64> {
    let mut r = vec![-1.0, 1.0, 1.0];
    r[sends] = -4.0;
    r
}

fn spec(edge: usize, s: usize, t: usize, slot: usize, half: i8, lane: usize) -> Arc2dSpec {
    let other = if slot == 1 { 2 } else { 1 };
    Arc2dSpec {
        edge,
        source: s,
        target: t,
        rho_s: s as f64,
        rho_t: t as f64,
        alpha_s: p2_row(slot),
        alpha_t: p2_row(other),
        slot,
        half,
        lane,
        types: 2,
        jogs: Vec::new(),
        doubled: false,
    }
}

fn cells_of(sub: SubspaceId, cells: usize, class_point: &[f64]) -> Vec<f64> {
    let col = sub.coloring(cells);
    (0..cells).map(|c| class_point[col.class_of(c)]).collect()
}

#[test]
fn bump_examples() {
    assert_eq!(bump(0.0, 1.0, 2.0), 1.0);
    assert_eq!(bump(2.0, 1.0, 2.0), 0.0);
    assert!((bump(1.5, 1.0, 2.0) - 0.5).abs() < 1e-15);
    assert_eq!(bump(5.0, 1.0, 2.0), 0.0);
}

proptest! {
    #[test]
    fn bump_is_monotone_and_flat_at_the_ends(a in 0.0f64..1.0, w in 0.1f64..2.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let b = a + w;
        let (lo, hi) = (a + w * x.min(y), a + w * x.max(y));
        prop_assert!(bump(lo, a, b) >= bump(hi, a, b));
        let h = 1e-4 * w;
        for r in [a, b] {
            let d1 = (bump(r + h, a, b) - bump(r - h, a, b)) / (2.0 * h);
            let d2 = (bump(r + h, a, b) - 2.0 * bump(r, a, b) + bump(r - h, a, b)) / (h * h);
            prop_assert!(d1.abs() < 1e-6 / w);
            prop_assert!(d2.abs() < 1e-2 / (w * w));
        }
    }
}

#[test]
fn book_alphas_follow_the_page_rule() {
    let net = samples::two_cycle_chain();
    let pl = |page, half| EdgePlacement { page, half };
    // b sends on both pages, a only on page 1, c only on page 2.
    let emb = BookEmbedding {
        spine: SpineOrder::identity(3),
        placements: vec![pl(1, 1), pl(1, -1), pl(2, 1), pl(2, 1)],
        pages: 2,
    };
    let table = choose_alphas_bookembed(&net, &emb).unwrap();
    assert_eq!(table.row(0), [-1.0, -4.0, 1.0]);
    assert_eq!(table.row(1), [-1.0, -4.0, -4.0]);
    assert_eq!(table.row(2), [-1.0, 1.0, -4.0]);
    assert!(table.row(1).iter().sum::<f64>() == -9.0);

    let two = HetNet::cycle(2).unwrap();
    let emb = BookEmbedding { spine: SpineOrder::identity(2), placements: vec![pl(1, 1), pl(1, -1)], pages: 1 };
    let table = choose_alphas_bookembed(&two, &emb).unwrap();
    assert_eq!(table.rows, vec![vec![-1.0, -2.0], vec![-1.0, -2.0]]);
}

#[test]
fn q_alphas_sample_solution() {
    let profile = DegreeProfile { out_degree: vec![3], n1: 0, n2: 1 };
    let assignment = assign_subspaces(&profile);
    assert_eq!(assignment, vec![SubspaceId::ThreeD(1, 2)]);
    let table = choose_alphas_q(&profile, &assignment).unwrap();
    assert_eq!(table.row(0), [-1.0, -2.0, -2.0]);

    let profile = DegreeProfile { out_degree: vec![3, 1, 1, 1], n1: 3, n2: 1 };
    let assignment = assign_subspaces(&profile);
    assert_eq!(
        assignment,
        vec![SubspaceId::ThreeD(4, 5), SubspaceId::TwoD(1), SubspaceId::TwoD(2), SubspaceId::TwoD(3)]
    );
    let table = choose_alphas_q(&profile, &assignment).unwrap();
    assert_eq!(table.row(2), [-1.0, 0.0, -2.0, 0.0, 0.0, 0.0]);
    check_q_inequalities(&table, &assignment, 3, 1).unwrap();

    let mut broken = table.clone();
    broken.rows[2][2] = 0.0;
    assert!(matches!(check_q_inequalities(&broken, &assignment, 3, 1), Err(Error::Synthesis(_))));
}

#[test]
fn arc2d_geometry() {
    let cfg = RealizationConfig::default();
    let arc = build_arc2d(&spec(0, 0, 1, 1, 1, 0), &cfg).unwrap();
    let pc = arc.page_coords();
    let peak = pc.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    assert!((peak - cfg.lane_base).abs() < 1e-9, "peak {peak}");
    assert!((pc[0][1] - cfg.kappa).abs() < 1e-12);
    assert!((pc[pc.len() - 1][1] - cfg.kappa).abs() < 1e-12);
    assert!((arc.start()[0] - 0.0).abs() < 0.1 && (arc.end()[0] - 1.0).abs() < 0.1);

    // Outside the κ band on one contiguous run: one exit and one entry.
    let outside: Vec<bool> = pc.iter().map(|p| p[1].abs() > cfg.kappa + 1e-12).collect();
    let switches = outside.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(switches, 2);
    assert!(arc.min_speed() > 1e-3);

    let left = build_arc2d(&spec(1, 1, 0, 2, -1, 1), &cfg).unwrap();
    let pc = left.page_coords();
    let top = pc.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    assert!((top + cfg.lane_base + cfg.lane_step).abs() < 1e-9);
    let run: Vec<f64> = pc.iter().filter(|p| (p[1] - top).abs() < 1e-12).map(|p| p[0]).collect();
    assert!(run.len() > 10);
    assert!(run.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn arc2d_rejects_wrong_stability() {
    let cfg = RealizationConfig::default();
    let mut s = spec(0, 0, 1, 1, 1, 0);
    s.alpha_t = p2_row(1);
    assert!(matches!(build_arc2d(&s, &cfg), Err(Error::Synthesis(_))));
}

#[test]
fn sector_angles_avoid_the_coordinate_planes() {
    let (angles, half) = sector_angles(3, 22.0).unwrap();
    let deg: Vec<f64> = angles.iter().map(|a| a.to_degrees()).collect();
    assert_eq!(deg.len(), 3);
    for (x, want) in deg.iter().zip([0.0, 120.0, 240.0]) {
        assert!((x - want).abs() < 1e-9);
    }
    for k in 3..=12 {
        let (angles, half) = sector_angles(k, 22.0).unwrap();
        for a in &angles {
            // Traces of x=y, y=z, x=z sit at 30° + 60°·m.
            let off = (a.to_degrees() - 30.0).rem_euclid(60.0);
            let gap = off.min(60.0 - off);
            assert!(gap > half.to_degrees(), "k={k} angle {a}");
        }
    }
    assert!(half > 0.0);
}

#[test]
fn arc3d_samples_stay_off_the_planes() {
    let real = fan();
    let arcs3: Vec<&Arc> = real.field.arcs().iter().filter(|a| a.dim == 3).collect();
    assert_eq!(arcs3.len(), 3);
    let angles: BTreeSet<i64> = arcs3.iter().map(|a| a.sector_angle.to_degrees().round() as i64).collect();
    assert_eq!(angles.len(), 3);
    for a in &arcs3 {
        for s in &a.samples {
            let p = &s.point;
            let gap = (p[0] - p[1]).abs().min((p[1] - p[2]).abs()).min((p[0] - p[2]).abs());
            assert!(gap > 1e-3, "arc {} at {:?}", a.edge, p);
        }
        assert!(a.min_speed() > 1e-3);
    }
    let targets: BTreeSet<usize> = arcs3.iter().map(|a| a.target).collect();
    assert_eq!(targets, BTreeSet::from([1, 2, 3]));
}

#[test]
fn build_arc3d_needs_three_targets() {
    let cfg = RealizationConfig::default();
    let spec = Arc3dSpec { source: 0, rho_s: 0.0, pair: (1, 2), targets: vec![(0, 1, 1.0), (1, 2, 2.0)] };
    assert!(matches!(build_arc3d(&spec, &cfg), Err(Error::InvalidParam(_))));
}

#[test]
fn lift_patterns_of_p2() {
    let p2 = build_pn(2).unwrap();
    // Free cell value in the own slot j (tube A) or in the cell's own slot (tube B).
    assert_eq!(lift_table(&p2, SubspaceId::TwoD(1)), vec![vec![0, 1, 0], vec![1, 0, 0]]);
    assert_eq!(lift_table(&p2, SubspaceId::TwoD(2)), vec![vec![0, 0, 1], vec![1, 0, 0]]);
}

#[test]
fn two_d_tubes_vanish_near_the_diagonal() {
    let real = two_cycle_chain();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kappa = real.config().kappa;
    for _ in 0..20_000 {
        let m: f64 = rng.gen_range(-0.5..2.5);
        let dir: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = dir.iter().sum::<f64>() / 3.0;
        let perp: Vec<f64> = dir.iter().map(|d| d - mean).collect();
        let norm = perp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = rng.gen_range(0.0..kappa);
        let y: Vec<f64> = perp.iter().map(|v| m + r * v / norm).collect();
        assert_eq!(real.field.tube_weight(&y), 0.0, "{y:?}");
    }
}

fn check_supports(real: &Realization, seed: u64, samples: usize) {
    let crossing_pairs: BTreeSet<(usize, usize)> = real.crossings.entries.iter().map(|e| e.arcs).collect();
    let arcs = real.field.arcs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = real.ccn.cells;
    for _ in 0..samples {
        let arc = &arcs[rng.gen_range(0..arcs.len())];
        let s = &arc.samples[rng.gen_range(0..arc.samples.len())];
        let x = cells_of(arc.subspace, cells, &s.point);
        let mut args = Vec::new();
        let c = rng.gen_range(0..cells);
        real.ccn.arguments(c, &x, &mut args);
        for a in args.iter_mut() {
            *a += rng.gen_range(-0.1..0.1);
        }
        assert!(real.field.active_regions(&args) <= 1);
        let active = real.field.active_arcs(&args);
        for (i, &p) in active.iter().enumerate() {
            for &q in &active[i + 1..] {
                let (a, b) = (&arcs[p], &arcs[q]);
                let handoff = |node: usize| real.field.regions()[node].weight(&args) > 0.0;
                let designed = crossing_pairs.contains(&(p.min(q), p.max(q)))
                    || a.source == b.source
                    || a.target == b.target
                    || a.edge == b.edge
                    || (a.source == b.target && handoff(a.source))
                    || (a.target == b.source && handoff(a.target));
                assert!(designed, "arcs {p} and {q} overlap at {args:?}");
            }
        }
    }
}

#[test]
fn supports_overlap_only_where_designed() {
    check_supports(two_cycle_chain(), 11, 100_000);
    check_supports(fan(), 12, 20_000);
}

#[test]
fn assembled_field_equilibria_and_derivatives() {
    for real in [two_cycle_chain(), fan()] {
        let f = &real.field;
        let k = real.ccn.types;
        for (v, &rho) in real.rho.iter().enumerate() {
            let p = vec![rho; k + 1];
            assert_eq!(f.eval(&p), 0.0);
            let h = 1e-6;
            for l in 0..=k {
                let (mut a, mut b) = (p.clone(), p.clone());
                a[l] += h;
                b[l] -= h;
                let d = (f.eval(&a) - f.eval(&b)) / (2.0 * h);
                assert!((d - real.alphas.row(v)[l]).abs() < 1e-6, "node {v} slot {l}: {d}");
            }
        }
        let far = vec![-50.0; k + 1];
        assert_eq!(f.eval(&far), 0.0);
    }
}

#[test]
fn assemble_rejects_overlapping_regions() {
    let p2 = build_pn(2).unwrap();
    let alphas = AlphaTable { rows: vec![p2_row(1), p2_row(2)] };
    let cfg = RealizationConfig::default();
    let res = assemble(&p2, &alphas, &[0.0, 0.3], LocalKind::Ball, Vec::new(), &cfg);
    assert!(matches!(res, Err(Error::Synthesis(_))));
    let res = assemble(&p2, &alphas, &[0.0, 0.7], LocalKind::Cylinder, Vec::new(), &cfg);
    assert!(matches!(res, Err(Error::Synthesis(_))));
    assert!(assemble(&p2, &alphas, &[0.0, 1.0], LocalKind::Cylinder, Vec::new(), &cfg).is_ok());
}

#[test]
fn config_validation() {
    let ok = RealizationConfig::default();
    ok.validate().unwrap();
    for bad in [
        RealizationConfig { kappa: 0.3, ..ok.clone() },
        RealizationConfig { eps: 0.3, ..ok.clone() },
        RealizationConfig { tube_radius: 0.2, ..ok.clone() },
        RealizationConfig { spacing: -1.0, ..ok.clone() },
        RealizationConfig { bump_inner_fraction: 1.0, ..ok.clone() },
    ] {
        assert!(matches!(bad.validate(), Err(Error::InvalidParam(_))), "{bad:?}");
    }
}

fn crossing_cases(specs: &[Arc2dSpec]) -> (Vec<CrossingCase>, Vec<Arc>, Vec<Arc>) {
    let cfg = RealizationConfig::default();
    let before: Vec<Arc> = specs.iter().map(|s| build_arc2d(s, &cfg).unwrap()).collect();
    let mut after = before.clone();
    let report = adjust_crossings(&mut after, &cfg).unwrap();
    (report.entries.iter().map(|e| e.case).collect(), before, after)
}

fn same_points(a: &Arc, b: &Arc) -> bool {
    a.samples.len() == b.samples.len() && a.samples.iter().zip(&b.samples).all(|(x, y)| x.point == y.point)
}

#[test]
fn crossing_with_matching_slopes_needs_no_adjustment() {
    // Lane run moving right over a vertical climb.
    let (cases, before, after) = crossing_cases(&[spec(0, 0, 2, 1, 1, 1), spec(1, 1, 2, 2, 1, 2)]);
    assert_eq!(cases, vec![CrossingCase::Compatible, CrossingCase::Merge]);
    for (a, b) in before.iter().zip(&after) {
        assert!(same_points(a, b));
    }
}

#[test]
fn crossing_with_unequal_slopes_rescales_speed() {
    // Lane run moving right over a slanted departure stub.
    let (cases, before, after) = crossing_cases(&[spec(0, 0, 2, 1, 1, 0), spec(1, 1, 2, 2, 1, 1)]);
    assert_eq!(cases, vec![CrossingCase::SpeedAdjusted, CrossingCase::Merge]);
    for (a, b) in before.iter().zip(&after) {
        assert!(same_points(a, b));
    }
    let changed = before[1].samples.iter().zip(&after[1].samples).any(|(x, y)| x.speed != y.speed);
    assert!(changed);
}

#[test]
fn crossing_with_opposite_slopes_is_rerouted() {
    // Lane run moving left over a vertical climb.
    let (cases, before, after) = crossing_cases(&[spec(0, 2, 0, 1, 1, 0), spec(1, 1, 2, 2, 1, 1)]);
    assert_eq!(cases, vec![CrossingCase::Rerouted]);
    assert!(same_points(&before[0], &after[0]));
    let jogs = &after[1].spec2d.as_ref().unwrap().jogs;
    assert_eq!(jogs.len(), 1);
    assert_eq!(jogs[0].site, JogSite::Departure);
    assert!(jogs[0].du < 0.0);
}

#[test]
fn crossing_inside_one_page_is_an_error() {
    let cfg = RealizationConfig::default();
    let mut arcs: Vec<Arc> =
        [spec(0, 0, 2, 1, 1, 1), spec(1, 1, 2, 1, 1, 2)].iter().map(|s| build_arc2d(s, &cfg).unwrap()).collect();
    let err = adjust_crossings(&mut arcs, &cfg).unwrap_err();
    assert!(matches!(err, Error::Synthesis(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn rerouted_realization_still_verifies() {
    let net = HetNet::cycle(3).unwrap();
    let pl = |page, half| EdgePlacement { page, half };
    let emb = BookEmbedding { spine: SpineOrder::identity(3), placements: vec![pl(3, 1), pl(2, 1), pl(1, 1)], pages: 3 };
    let real = realize_book(&net, &emb, &RealizationConfig::default()).unwrap();
    assert!(real.crossings.entries.iter().any(|e| e.case == CrossingCase::Rerouted));
    let report = verify_all(&real, &VerifySettings::default()).unwrap();
    assert_eq!(report.connections_passed(), report.connections.len());
    assert_eq!(report.grade, Grade::Complete);
}

#[test]
fn book_realization_doubles_single_outgoing_arcs() {
    let real = two_cycle_chain();
    assert_eq!(real.ccn.cells, 3);
    assert_eq!(real.connections.len(), 6);
    let doubled: Vec<(usize, usize)> =
        real.connections.iter().filter(|c| c.doubled).map(|c| (c.source, c.target)).collect();
    assert_eq!(doubled, vec![(0, 1), (2, 1)]);
    let fan = fan();
    assert_eq!(fan.ccn.cells, 6);
    assert_eq!(fan.connections.iter().filter(|c| c.kind == ConnectionKind::Spatial).count(), 3);
}

#[test]
fn realization_json_round_trip_is_exact() {
    for real in [two_cycle_chain(), fan()] {
        let text = real.to_json();
        let back = Realization::from_json(&text).unwrap();
        assert_eq!(&back, real);
        assert_eq!(back.to_json(), text);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = real.ccn.types + 1;
        for _ in 0..2000 {
            let y: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.5..3.5)).collect();
            assert_eq!(back.field.eval(&y).to_bits(), real.field.eval(&y).to_bits());
        }
    }
    assert!(matches!(Realization::from_json("{}"), Err(Error::Schema(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn field_keeps_synchrony_subspaces_invariant(u in -0.5f64..2.5, v in -1.2f64..1.2, page in 1usize..=2) {
        let real = two_cycle_chain();
        let sub = SubspaceId::TwoD(page);
        let x = cells_of(sub, 3, &[u, u + v]);
        let dx = admissible_rhs(&real.ccn, &real.field, &x).unwrap();
        let col = sub.coloring(3);
        for c in 0..3 {
            for d in 0..3 {
                if col.class_of(c) == col.class_of(d) {
                    prop_assert_eq!(dx[c], dx[d]);
                }
            }
        }
    }
}

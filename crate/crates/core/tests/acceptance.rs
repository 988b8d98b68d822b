//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` still run in full and print their
//! real outcome, but do not fail the process.

mod common;

use std::time::{Duration, Instant};

use hillquota::geometry::{cell_overlap_area, feasible_cells, triangle};
use hillquota::probmodel::{general_pdf_probability, iid_quota_density};
use hillquota::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const UNIFORM_TABLE: [(u64, f64); 6] = [
    (3, 1.0 / 3.0),
    (5, 0.13092),
    (10, 0.04904),
    (16, 0.02691),
    (20, 0.02047),
    (100, 0.00328),
];
const UNIFORM_TOL: f64 = 1e-5;
const UNIFORM_BUDGET: Duration = Duration::from_secs(10);

const IID_TABLE: [(u64, f64); 4] = [(3, 0.125), (5, 0.03923), (10, 0.01363), (15, 0.00802)];
const IID_TOL: f64 = 1e-4;
const IID_BUDGET: Duration = Duration::from_secs(120);
/// Doubling the z nodes may move a table value by at most this much.
const Z_NODE_STABILITY: f64 = 1e-6;

/// Published sampled rows: (M, low, high) of the 95% intervals.
const UNIFORM_CI: [(u64, f64, f64); 6] = [
    (3, 0.33240, 0.33826),
    (5, 0.12846, 0.13264),
    (10, 0.04781, 0.05049),
    (16, 0.02614, 0.02816),
    (20, 0.01981, 0.02157),
    (100, 0.00314, 0.00388),
];
const IID_CI: [(u64, f64, f64); 4] = [
    (3, 0.12328, 0.12738),
    (5, 0.03922, 0.04166),
    (10, 0.01287, 0.01431),
    (15, 0.00734, 0.00844),
];
const SAMPLES: u64 = 100_000;
const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const MIN_SEEDS_INSIDE: usize = 9;
const SIGMA_BOUND: f64 = 4.0;

const EQUIVALENCE_INSTANCES: usize = 10_000;
const CORPUS_INSTANCES: usize = 100_000;
const CORPUS_GRID: u64 = 1 << 20;
const GEOMETRY_REL: f64 = 1e-9;
const GEOMETRY_HOUSES: [u64; 4] = [10, 50, 100, 435];
const GEOMETRY_FLOOR_MAX: u64 = 30;
const POINTS_PER_CELL: usize = 1000;
const SYMMETRY_INSTANCES: usize = 10_000;

const KNOWN_UNATTAINABLE: [&str; 1] = ["3"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(id: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome {
        id,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    let third = exact_uniform_probability_rational(3).unwrap();
    let exact_third = third == BigRational::new(BigInt::from(1), BigInt::from(3));
    pass &= exact_third;
    notes.push(format!("M=3 rational {third}"));
    for (m, expected) in UNIFORM_TABLE {
        let got = exact_uniform_probability::<DoubleDouble>(m).unwrap().hi();
        let ok = (got - expected).abs() <= UNIFORM_TOL;
        pass &= ok;
        notes.push(format!("M={m} {got:.6}{}", if ok { "" } else { " (off)" }));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < UNIFORM_BUDGET;
    (pass, format!("uniform theoretical column: {}", notes.join(", ")))
}

fn criterion_2() -> (bool, String) {
    let start = Instant::now();
    let pop = PopulationDensity::uniform(0.0, 1000.0).unwrap();
    let quad = QuadratureSpec::default();
    let doubled = QuadratureSpec {
        z_integral_nodes: 2 * quad.z_integral_nodes,
        ..quad
    };
    let mut pass = true;
    let mut notes = Vec::new();
    let mut worst_shift = 0.0f64;
    for (m, expected) in IID_TABLE {
        let g = iid_quota_density(&pop, m, &quad).unwrap();
        let got = general_pdf_probability(m, &g, &quad).unwrap();
        let ok = (got - expected).abs() <= IID_TOL;
        pass &= ok;
        notes.push(format!("M={m} {got:.6}{}", if ok { "" } else { " (off)" }));
        let g2 = iid_quota_density(&pop, m, &doubled).unwrap();
        let again = general_pdf_probability(m, &g2, &doubled).unwrap();
        worst_shift = worst_shift.max((again - got).abs());
    }
    pass &= worst_shift < Z_NODE_STABILITY;
    pass &= start.elapsed() < IID_BUDGET;
    (
        pass,
        format!("IID theoretical column: {}; z-node doubling shift {worst_shift:.1e}", notes.join(", ")),
    )
}

fn exact_value(scheme: &SamplingScheme) -> f64 {
    match &scheme.population {
        None => exact_uniform_probability::<DoubleDouble>(scheme.seats).unwrap().hi(),
        Some(p) => {
            let quad = QuadratureSpec::default();
            let g = iid_quota_density(p, scheme.seats, &quad).unwrap();
            general_pdf_probability(scheme.seats, &g, &quad).unwrap()
        }
    }
}

/// Returns the containment outcome and the supporting 4-sigma outcome.
fn criterion_3() -> ((bool, String), (bool, String)) {
    let pop = PopulationDensity::uniform(0.0, 1000.0).unwrap();
    let mut rows: Vec<(&str, SamplingScheme, f64, f64)> = Vec::new();
    for (m, lo, hi) in UNIFORM_CI {
        rows.push(("uniform", SamplingScheme::uniform_quotas(m).unwrap(), lo, hi));
    }
    for (m, lo, hi) in IID_CI {
        rows.push(("iid", SamplingScheme::iid_populations(m, pop.clone()).unwrap(), lo, hi));
    }
    let mut contained_all = true;
    let mut sigma_all = true;
    let mut notes = Vec::new();
    let mut worst_z = 0.0f64;
    for (table, scheme, lo, hi) in &rows {
        let p = exact_value(scheme);
        let sigma = (p * (1.0 - p) / SAMPLES as f64).sqrt();
        let mut inside = 0;
        for seed in SEEDS {
            let est = sample_violation_rate(scheme, SAMPLES, seed).unwrap();
            if est.p_hat >= *lo && est.p_hat <= *hi {
                inside += 1;
            }
            let z = (est.p_hat - p).abs() / sigma;
            worst_z = worst_z.max(z);
            sigma_all &= z < SIGMA_BOUND;
        }
        let ok = inside >= MIN_SEEDS_INSIDE;
        contained_all &= ok;
        notes.push(format!("{table} M={} {inside}/10", scheme.seats));
    }
    (
        (
            contained_all,
            format!("seeds inside published CI (need >= {MIN_SEEDS_INSIDE}/10): {}", notes.join(", ")),
        ),
        (
            sigma_all,
            format!("every estimate within {SIGMA_BOUND} sigma of the exact value (worst {worst_z:.2})"),
        ),
    )
}

fn criterion_4() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut instances = Vec::with_capacity(EQUIVALENCE_INSTANCES);
    let mut ties = 0usize;
    while instances.len() < EQUIVALENCE_INSTANCES {
        let n = rng.random_range(2..=10usize);
        let seats = rng.random_range(n as u64..=100);
        let pops = PopulationVector::new(common::distinct_pops(&mut rng, n, 1_000_000)).unwrap();
        match huntington_hill(&pops, seats) {
            Ok(app) => instances.push((pops, seats, app)),
            Err(Error::PriorityTie { .. }) => ties += 1,
            Err(e) => panic!("{e}"),
        }
    }
    let mismatches = instances
        .par_iter()
        .filter(|(pops, seats, app)| hill_divisor(pops, *seats).as_ref() != Ok(app))
        .count();
    (
        mismatches == 0,
        format!("divisor vs priority on {EQUIVALENCE_INSTANCES} instances: {mismatches} mismatches ({ties} exact ties redrawn)"),
    )
}

struct Corpus {
    instances: Vec<(PopulationVector<u64>, u64)>,
    integer_quota_skips: usize,
    tie_skips: usize,
    biased: usize,
}

/// Three-state instances with rational quotas. Even indices are uniform
/// random populations; odd ones place the quotas near or inside a feasible
/// triangle on a grid of `1/CORPUS_GRID`, so violations are common.
fn build_corpus() -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cells: Vec<Vec<(FloorPair, [(f64, f64); 3])>> = (0..=200u64)
        .map(|m| {
            if m < 3 {
                return Vec::new();
            }
            feasible_cells::<f64>(m)
                .unwrap()
                .into_iter()
                .map(|(fp, tri)| {
                    let v = tri.vertices.unwrap();
                    (fp, [(v[0].x, v[0].y), (v[1].x, v[1].y), (v[2].x, v[2].y)])
                })
                .collect()
        })
        .collect();
    let mut corpus = Corpus {
        instances: Vec::with_capacity(CORPUS_INSTANCES),
        integer_quota_skips: 0,
        tie_skips: 0,
        biased: 0,
    };
    while corpus.instances.len() < CORPUS_INSTANCES {
        let seats = rng.random_range(3..=200u64);
        let biased = corpus.instances.len() % 2 == 1;
        let pops: Vec<u64> = if biased {
            let (fp, v) = cells[seats as usize][rng.random_range(0..cells[seats as usize].len())];
            let (x, y) = if rng.random_bool(0.5) {
                common::point_in_triangle(&mut rng, &v, 0.0)
            } else {
                // anywhere in the cell's lower triangle, mostly outside the region
                let (a, b) = (rng.random::<f64>(), rng.random::<f64>());
                if a + b < 1.0 { (a, b) } else { (1.0 - a, 1.0 - b) }
            };
            let grid = |d: f64| ((d * CORPUS_GRID as f64) as u64).min(CORPUS_GRID - 1);
            let p1 = fp.j * CORPUS_GRID + grid(x);
            let p2 = fp.k * CORPUS_GRID + grid(y);
            let total = seats * CORPUS_GRID;
            if p1 == 0 || p2 == 0 || p1 + p2 >= total {
                continue;
            }
            vec![p1, p2, total - p1 - p2]
        } else {
            common::distinct_pops(&mut rng, 3, 1_000_000)
        };
        let Ok(pv) = PopulationVector::new(pops) else {
            continue;
        };
        let quotas = standard_quotas(&pv, seats).unwrap();
        if quotas.quotas().iter().any(|q| q.is_integer()) {
            corpus.integer_quota_skips += 1;
            continue;
        }
        if let Err(Error::PriorityTie { .. }) = huntington_hill(&pv, seats) {
            corpus.tie_skips += 1;
            continue;
        }
        corpus.biased += usize::from(biased);
        corpus.instances.push((pv, seats));
    }
    corpus
}

struct CorpusResult {
    disagreements: usize,
    violations: usize,
    uppers: usize,
    bad_shapes: usize,
}

fn evaluate_corpus(corpus: &Corpus) -> CorpusResult {
    let per: Vec<(bool, bool, bool, bool)> = corpus
        .instances
        .par_iter()
        .map(|(pv, seats)| {
            let report = detect_violations(pv, *seats).unwrap();
            let quotas = standard_quotas(pv, *seats).unwrap();
            let crit = violation_criteria_test(&quotas).unwrap();
            let mut shape_ok = true;
            if report.has_lower {
                let q = quotas.quotas();
                let mut order = [0usize, 1, 2];
                order.sort_by(|&a, &b| q[a].cmp(&q[b]));
                let [s, mid, l] = order;
                let largest_pop = pv.values().iter().enumerate().max_by_key(|(_, &p)| p).unwrap().0;
                let lower = report.states_with(QuotaClass::Lower);
                let seats_of = |i: usize| report.per_state[i].seats;
                let ceil = |r: &BigRational| r.ceil().to_integer().to_u64().unwrap();
                let floor = |r: &BigRational| r.floor().to_integer().to_u64().unwrap();
                shape_ok = lower == vec![largest_pop]
                    && largest_pop == l
                    && seats_of(s) == ceil(&q[s])
                    && seats_of(mid) == ceil(&q[mid])
                    && seats_of(l) == floor(&q[l]) - 1;
            }
            (crit == report.has_lower, report.has_lower, report.has_upper, shape_ok)
        })
        .collect();
    CorpusResult {
        disagreements: per.iter().filter(|r| !r.0).count(),
        violations: per.iter().filter(|r| r.1).count(),
        uppers: per.iter().filter(|r| r.2).count(),
        bad_shapes: per.iter().filter(|r| !r.3).count(),
    }
}

fn criterion_7() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vertex_failures = 0usize;
    let mut area_failures = 0usize;
    let mut compared = 0usize;
    let mut cover_failures = Vec::new();
    let mut nonempty = Vec::new();
    for &m in &GEOMETRY_HOUSES {
        let total: f64 = FloorPair::all(m).map(|fp| cell_overlap_area::<f64>(&fp)).sum();
        let expected = (m * m) as f64 / 6.0;
        if (total - expected).abs() > GEOMETRY_REL * expected {
            cover_failures.push(m);
        }
        for j in 0..=GEOMETRY_FLOOR_MAX {
            for k in 0..=GEOMETRY_FLOOR_MAX {
                let Ok(fp) = FloorPair::new(j, k, m) else { continue };
                let tri = triangle::<f64>(&fp).unwrap();
                let closed = common::closed_form_vertices(j, k, m);
                match (tri.vertices, closed) {
                    (Some(v), Some(c)) => {
                        compared += 1;
                        let got: Vec<(f64, f64)> = v.iter().map(|p| (p.x, p.y)).collect();
                        if !common::same_vertex_set(&got, &c, GEOMETRY_REL) {
                            vertex_failures += 1;
                        }
                        let clip = common::clipped_region_area(j, k, m);
                        if (tri.area - clip).abs() > GEOMETRY_REL * clip.max(1.0) {
                            area_failures += 1;
                        }
                        if !tri.empty {
                            nonempty.push((fp, [got[0], got[1], got[2]]));
                        }
                    }
                    (None, None) => {}
                    _ => vertex_failures += 1,
                }
            }
        }
    }
    let mut unsound = 0usize;
    let mut points = 0usize;
    for (fp, v) in &nonempty {
        for _ in 0..POINTS_PER_CELL {
            let (x, y) = common::point_in_triangle(&mut rng, v, 1e-6);
            points += 1;
            let (q1, q2) = (fp.j as f64 + x, fp.k as f64 + y);
            let q3 = fp.seats as f64 - q1 - q2;
            let inside_unit = x + y < 1.0;
            let holds = match QuotaVector::from_quotas(vec![q1, q2, q3], fp.seats) {
                Ok(qv) => {
                    let r = evaluate_criteria(&qv).unwrap();
                    r.holds && r.order[2] == 2
                }
                Err(_) => false,
            };
            if !(inside_unit && holds) {
                unsound += 1;
            }
        }
    }
    let pass = vertex_failures == 0 && area_failures == 0 && cover_failures.is_empty() && unsound == 0;
    (
        pass,
        format!(
            "{compared} cells: {vertex_failures} vertex and {area_failures} area mismatches; cell cover failures {cover_failures:?}; {unsound} of {points} interior points unsound in {} nonempty cells",
            nonempty.len()
        ),
    )
}

fn criterion_8() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let lambdas = [
        BigRational::new(BigInt::from(1), BigInt::from(2)),
        BigRational::from_integer(BigInt::from(2)),
        BigRational::from_integer(BigInt::from(1_000_000)),
    ];
    let mut instances = Vec::with_capacity(SYMMETRY_INSTANCES);
    let mut ties = 0usize;
    while instances.len() < SYMMETRY_INSTANCES {
        let n = rng.random_range(2..=10usize);
        let seats = rng.random_range(n as u64..=100);
        let pops = common::distinct_pops(&mut rng, n, 1_000_000);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let pv = PopulationVector::new(pops).unwrap();
        match huntington_hill(&pv, seats) {
            Ok(app) => instances.push((pv, seats, order, app)),
            Err(Error::PriorityTie { .. }) => ties += 1,
            Err(e) => panic!("{e}"),
        }
    }
    let (perm_bad, scale_bad) = instances
        .par_iter()
        .map(|(pv, seats, order, app)| {
            let permuted = pv.permuted(order).unwrap();
            let expected: Vec<u64> = order.iter().map(|&i| app.seats()[i]).collect();
            let perm_ok = huntington_hill(&permuted, *seats)
                .map(|a| a.seats() == &expected[..])
                .unwrap_or(false);
            let scale_ok = lambdas.iter().all(|l| {
                let scaled: Vec<BigRational> = pv
                    .values()
                    .iter()
                    .map(|&p| BigRational::from_integer(BigInt::from(p)) * l)
                    .collect();
                let spv = PopulationVector::new(scaled).unwrap();
                huntington_hill(&spv, *seats).as_ref() == Ok(app)
            });
            (usize::from(!perm_ok), usize::from(!scale_ok))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (
        perm_bad == 0 && scale_bad == 0,
        format!(
            "{SYMMETRY_INSTANCES} instances: {perm_bad} permutation and {scale_bad} scaling mismatches (lambda 1/2, 2, 1e6; {ties} exact ties redrawn)"
        ),
    )
}

fn main() {
    let mut outcomes = vec![timed("1", criterion_1), timed("2", criterion_2)];

    let start = Instant::now();
    let (containment, sigma) = criterion_3();
    let elapsed = start.elapsed();
    outcomes.push(Outcome {
        id: "3",
        pass: containment.0,
        detail: containment.1,
        elapsed,
    });
    outcomes.push(Outcome {
        id: "3b",
        pass: sigma.0,
        detail: sigma.1,
        elapsed: Duration::ZERO,
    });

    outcomes.push(timed("4", criterion_4));

    let start = Instant::now();
    let corpus = build_corpus();
    let result = evaluate_corpus(&corpus);
    let elapsed = start.elapsed();
    outcomes.push(Outcome {
        id: "5",
        pass: result.disagreements == 0,
        detail: format!(
            "criteria test vs algorithm on {} instances ({} biased, {} violations): {} disagreements; skipped {} with an integer quota, {} exact ties",
            corpus.instances.len(),
            corpus.biased,
            result.violations,
            result.disagreements,
            corpus.integer_quota_skips,
            corpus.tie_skips
        ),
        elapsed,
    });
    outcomes.push(Outcome {
        id: "6",
        pass: result.uppers == 0 && result.bad_shapes == 0,
        detail: format!(
            "same corpus: {} UPPER classifications, {} of {} violations with the wrong state or shape",
            result.uppers, result.bad_shapes, result.violations
        ),
        elapsed: Duration::ZERO,
    });

    outcomes.push(timed("7", criterion_7));
    outcomes.push(timed("8", criterion_8));

    let mut failed = Vec::new();
    for o in &outcomes {
        let status = if o.pass { "PASS" } else { "FAIL" };
        let known = !o.pass && KNOWN_UNATTAINABLE.contains(&o.id);
        println!(
            "criterion {:<3} {status}{} [{:.1}s] {}",
            o.id,
            if known { " (known unattainable)" } else { "" },
            o.elapsed.as_secs_f64(),
            o.detail
        );
        if !o.pass && !known {
            failed.push(o.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all attainable criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}

//! Acceptance report: one line per criterion. Criteria whose literal wording is
//! contradicted by the worked data print FAIL and have their corrected reading
//! asserted instead; any other failure makes the run exit non-zero.

mod common;

use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sassur::decompose::{
    block_triangular_form, decompose, extended_component, is_s_assur, lift_decomposition, project_decomposition,
    scc_decomposition, Sampling,
};
use sassur::drivers::{drive_with, is_strongly_s_assur, moving_by_majority};
use sassur::extend::{classify_one_extension, Effect, ExtensionSpec};
use sassur::generate::{random_isostatic, random_one_extension, random_plane_group};
use sassur::graphs::{cover, gain_sparse, Kind, EXHAUSTIVE_BOUND};
use sassur::group::Symmetry;
use sassur::orbit::{build_orbit_matrix, cover_positions, is_pinned_s_isostatic, rank, Configuration};
use sassur::orient::{random_orientation, verify_orientation};
use sassur::{fixtures, io, linalg};

const TOL: f64 = 1e-12;

enum Verdict {
    Pass(String),
    /// Literal reading fails; the corrected reading (described) holds.
    Literal(String),
    Fail(String),
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn sampling() -> Sampling {
    Sampling::default()
}

fn ac1() -> Verdict {
    let f = fixtures::c3_desargues();
    let m = build_orbit_matrix(&f.graph, &f.sym, f.positions.as_ref().unwrap()).unwrap();
    let csv = io::matrix_csv(&f.graph, &m);
    let got: Vec<f64> = csv
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    let q = 3f64.sqrt() / 4.0;
    #[rustfmt::skip]
    let want = [
        -1.0 + q, 1.75, 0.0, 0.0,
        -1.0 - q, 1.75, 0.0, 0.0,
        1.0, -1.0, -1.0, 1.0,
        0.0, 0.0, -6.0, 9.0,
    ];
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let r = rank(&m, 1e-9);
    check(got.len() == 16 && err <= TOL && r == 4, format!("16 entries, max error {err:.1e}, rank {r}"))
}

fn ac2() -> Verdict {
    let f = fixtures::c3_desargues();
    let (_, dec) = decompose(&f.graph, &f.sym).unwrap();
    let m = build_orbit_matrix(&f.graph, &f.sym, f.positions.as_ref().unwrap()).unwrap();
    let bt = block_triangular_form(&m, &dec).unwrap();
    let names = dec.partition(&f.graph);
    let corrected = dec.len() == 2
        && names == vec![vec!["u".to_string()], vec!["w".to_string()]]
        && bt.max_upper <= TOL
        && bt.block_sizes == vec![(2, 2), (2, 2)];
    // literal order: w's rows and columns first
    let u = f.graph.vertex("u").unwrap();
    let uc = m.block_of(u).unwrap().start;
    let w_rows = [f.graph.edge("e3").unwrap(), f.graph.edge("e4").unwrap()];
    let literal_upper = w_rows
        .iter()
        .flat_map(|&r| (0..2).map(move |k| (r, k)))
        .map(|(r, k)| m.matrix[(r, uc + k)].abs())
        .fold(0.0, f64::max);
    assert!(corrected, "corrected decomposition reading failed");
    assert!(literal_upper > 0.5, "literal ordering unexpectedly consistent");
    Verdict::Literal(format!(
        "{{w}} below {{u}} gives upper block max {literal_upper}; corrected {{u}} below {{w}}: 2 components, upper max {:.1e}, blocks {:?}",
        bt.max_upper, bt.block_sizes
    ))
}

fn ac3() -> Verdict {
    let f = fixtures::c3_desargues();
    let (o, dec) = decompose(&f.graph, &f.sym).unwrap();
    let lifted = lift_decomposition(&f.graph, &f.sym, &o, &dec).unwrap();
    let mut per_parent = vec![0usize; dec.len()];
    for &p in &lifted.parent {
        per_parent[p] += 1;
    }
    let mut sizes = per_parent.clone();
    sizes.sort_unstable();
    let mut seen: Vec<usize> = lifted.cover_components.iter().flatten().copied().collect();
    let total = seen.len();
    seen.sort_unstable();
    seen.dedup();
    let disjoint = seen.len() == total;
    let back = project_decomposition(&f.graph, &lifted).unwrap();
    let identity = back.partition(&f.graph) == dec.partition(&f.graph) && back.order_relation() == dec.order_relation();
    check(
        lifted.cover_components.len() == 4
            && sizes == vec![1, 3]
            && per_parent == lifted.predicted
            && disjoint
            && identity,
        format!(
            "{} covering components, lifts per component {per_parent:?}, project(lift) = dec: {identity}",
            lifted.cover_components.len()
        ),
    )
}

fn ac4() -> Verdict {
    let f = fixtures::fig2b();
    let tight = gain_sparse(&f.graph, &f.sym.grp, 2, 3, 1, EXHAUSTIVE_BOUND).unwrap();
    let v = gain_sparse(&f.graph, &f.sym.grp, 2, 3, 2, EXHAUSTIVE_BOUND).unwrap();
    let witness = v.witness.as_ref().map(|w| w.edges.clone()).unwrap_or_default();
    check(
        tight.satisfied && tight.tight && !v.satisfied && witness == vec!["l".to_string()],
        format!("(2,3,1) tight: {}; (2,3,2) witness {witness:?}", tight.tight),
    )
}

fn ac5() -> Verdict {
    let g = fixtures::grab_bucket();
    let cols = g.graph.columns(&g.sym).unwrap();
    let u = g.graph.vertex("u").unwrap();
    let u_col = cols[u];
    let bucket = is_pinned_s_isostatic(&g.graph, &g.sym, 5, 0, 1e-9).unwrap();
    let bucket_ok = g.graph.edges.len() == 7 && cols.iter().sum::<usize>() == 7 && u_col == 1 && bucket.isostatic;

    let f = fixtures::fig7_mirror();
    let cg = cover(&f.graph, &f.sym.grp).unwrap();
    let inner = cg.graph.kinds.iter().filter(|&&k| k == Kind::Inner).count();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut plain_rank = 0;
    for _ in 0..5 {
        let pos: Vec<DVector<f64>> =
            (0..cg.graph.names.len()).map(|_| DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0))).collect();
        plain_rank = plain_rank.max(linalg::rank(&common::rigidity_matrix(&cg.graph, &pos), 1e-9));
    }
    let sym_ok = is_pinned_s_isostatic(&f.graph, &f.sym, 5, 0, 1e-9).unwrap().isostatic;
    let fig7_ok = cg.graph.edges.len() == 28 && inner == 14 && plain_rank < 28 && sym_ok;
    check(
        bucket_ok && fig7_ok,
        format!(
            "grab bucket |E| = {}, columns {} (fixed vertex {u_col}), Cs-isostatic {}; Fig. 7 cover {}/{}, generic rank {plain_rank}, Cs-isostatic {sym_ok}",
            g.graph.edges.len(),
            cols.iter().sum::<usize>(),
            bucket.isostatic,
            cg.graph.edges.len(),
            inner
        ),
    )
}

fn ac6() -> Verdict {
    let mut checked = Vec::new();
    for (name, f) in fixtures::all() {
        let Ok((_, dec)) = decompose(&f.graph, &f.sym) else { continue };
        let caps = f.graph.columns(&f.sym).unwrap();
        let reference = dec.partition(&f.graph);
        for seed in 0..100 {
            let o = random_orientation(&f.graph, &caps, seed).unwrap();
            let p = scc_decomposition(&f.graph, &o).unwrap().partition(&f.graph);
            if !verify_orientation(&f.graph, &caps, &o) || p != reference {
                return Verdict::Fail(format!("{name}: seed {seed} gives {p:?}"));
            }
        }
        checked.push(name);
    }
    check(checked.len() == 6, format!("100 orientations each on {checked:?}"))
}

fn ac7() -> Verdict {
    let f = fixtures::c3_desargues();
    let cfg = f.positions.as_ref().unwrap();
    let (_, dec) = decompose(&f.graph, &f.sym).unwrap();
    let r = |e: &str| drive_with(&f.graph, &f.sym, cfg, f.graph.edge(e).unwrap(), &dec, 1e-9).unwrap();
    let (e1, e2, e3, e4) = (r("e1"), r("e2"), r("e3"), r("e4"));
    // literal: a u edge leaves w still, and the loop at w moves u
    let literal = e1.norm("w") <= TOL && e4.norm("u") > 1e-6;
    let corrected = [&e3, &e4].iter().all(|d| d.norm("u") <= TOL && d.norm("w") > 1e-6)
        && [&e1, &e2].iter().all(|d| d.norm("u") > 1e-6 && d.norm("w") > 1e-6);
    assert!(corrected, "corrected driver pattern failed");
    assert!(!literal);
    Verdict::Literal(format!(
        "u edge e1 moves w ({:.3}), loop e4 leaves u at {:.1e}; corrected: w edges leave u at ≤ {:.1e}, u edges move both",
        e1.norm("w"),
        e4.norm("u"),
        e3.norm("u").max(e4.norm("u"))
    ))
}

fn ac8() -> Verdict {
    let f = fixtures::fig6_c3_space();
    let s = sampling();
    let assur = is_s_assur(&f.graph, &f.sym, s).unwrap();
    let strongly = is_strongly_s_assur(&f.graph, &f.sym, s).unwrap();
    let moving = moving_by_majority(&f.graph, &f.sym, f.graph.edge("driver").unwrap(), s).unwrap();
    let a_still = !moving[f.graph.vertex("A").unwrap()];

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut count, mut agree) = (0, 0);
    let mut seed = 0;
    while count < 50 {
        seed += 1;
        let spec = random_plane_group(&mut rng);
        let (sym, gg) = random_isostatic(&spec, rng.gen_range(1..=6), seed).unwrap();
        let (o, dec) = decompose(&gg, &sym).unwrap();
        for c in 0..dec.len() {
            let (ext, _) = extended_component(&gg, &sym, &o, &dec, c).unwrap();
            if count >= 50 || !is_s_assur(&ext, &sym, s).unwrap_or(false) {
                continue;
            }
            count += 1;
            if is_strongly_s_assur(&ext, &sym, s).unwrap() {
                agree += 1;
            }
        }
    }
    check(
        assur && !strongly && a_still && agree == count,
        format!("Fig. 6: S-Assur {assur}, strongly {strongly}, A stationary {a_still}; {agree}/{count} generated Assur graphs strongly Assur"),
    )
}

fn ac9() -> Verdict {
    let f = fixtures::fig15_c4();
    let (o, dec) = decompose(&f.graph, &f.sym).unwrap();
    let one = |edge: &str, split: [&str; 2], target: &str, gain: &str| ExtensionSpec::One {
        vertex: "d".into(),
        edge: edge.into(),
        split_gains: [split[0].into(), split[1].into()],
        targets: vec![target.into()],
        gains: vec![gain.into()],
    };
    let labels: Vec<Effect> =
        [one("bb", ["id", "r1"], "b", "r2"), one("cb", ["id", "id"], "b", "r1"), one("ba", ["id", "id"], "c", "id")]
            .iter()
            .map(|s| {
                let c = classify_one_extension(&f.graph, &f.sym, &o, &dec, s).unwrap().0;
                if c.agrees() {
                    c.observed
                } else {
                    Effect::Unclassified
                }
            })
            .collect();
    let figure = labels == vec![Effect::Preserved, Effect::NewSingleton, Effect::Merged];

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut done, mut agree, mut seed) = (0, 0, 0);
    while done < 200 {
        seed += 1;
        let spec = random_plane_group(&mut rng);
        let (sym, gg) = random_isostatic(&spec, rng.gen_range(1..=5), seed).unwrap();
        let (o, dec) = decompose(&gg, &sym).unwrap();
        for _ in 0..4 {
            if done == 200 {
                break;
            }
            let Some(ext) = random_one_extension(&gg, &sym, "x", &mut rng) else { continue };
            let (c, _) = classify_one_extension(&gg, &sym, &o, &dec, &ext).unwrap();
            done += 1;
            if c.agrees() && c.observed != Effect::Unclassified {
                agree += 1;
            }
        }
    }
    check(figure && agree == done, format!("Fig. 15 labels {labels:?}; {agree}/{done} random 1-extensions agree"))
}

fn ac10() -> Verdict {
    let f = fixtures::c3_desargues();
    let cg = cover(&f.graph, &f.sym.grp).unwrap();
    let triv = Symmetry::trivial(2);
    let gg = cg.graph.as_gain_graph(&triv.grp).unwrap();
    let pos = cover_positions(&cg, &f.sym, f.positions.as_ref().unwrap());
    let cfg = Configuration { positions: pos.clone() };
    let m = build_orbit_matrix(&gg, &triv, &cfg).unwrap();
    let r = common::rigidity_matrix(&cg.graph, &pos);
    let diff = if m.matrix.shape() == r.shape() { (&m.matrix - &r).amax() } else { f64::INFINITY };
    let (_, dec) = decompose(&gg, &triv).unwrap();
    // finest valid block partition of the rigidity matrix
    let inner: Vec<usize> = gg.inner();
    let groups: Vec<Vec<usize>> = (0..inner.len()).map(|k| vec![2 * k, 2 * k + 1]).collect();
    let valid = common::valid_block_partitions(&r, &groups, 1e-12);
    let ours: Vec<usize> = inner.iter().map(|&v| dec.component_of[v].unwrap()).collect();
    let finest = valid.iter().all(|p| common::refines(&ours, p)) && valid.iter().any(|p| common::refines(p, &ours));
    check(
        diff <= TOL && dec.len() == 4 && finest,
        format!("max |O − R| = {diff:.1e}, {} components, finest block partition {finest}", dec.len()),
    )
}

type Criterion = (&'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", ac1, Duration::from_secs(1)),
        ("AC2", ac2, Duration::from_secs(1)),
        ("AC3", ac3, Duration::from_secs(1)),
        ("AC4", ac4, Duration::from_secs(1)),
        ("AC5", ac5, Duration::from_secs(2)),
        ("AC6", ac6, Duration::from_secs(10)),
        ("AC7", ac7, Duration::from_secs(1)),
        ("AC8", ac8, Duration::from_secs(30)),
        ("AC9", ac9, Duration::from_secs(60)),
        ("AC10", ac10, Duration::from_secs(1)),
    ];
    let mut failed = Vec::new();
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let verdict = run();
        let t = start.elapsed();
        let slow = if t > limit { format!(" over the {}s limit", limit.as_secs()) } else { String::new() };
        match verdict {
            Verdict::Pass(d) if slow.is_empty() => println!("[{name}] PASS ({:.2}s) {d}", t.as_secs_f64()),
            Verdict::Pass(d) | Verdict::Fail(d) => {
                println!("[{name}] FAIL ({:.2}s{slow}) {d}", t.as_secs_f64());
                failed.push(name);
            }
            Verdict::Literal(d) => println!("[{name}] FAIL literal reading ({:.2}s{slow}) {d}", t.as_secs_f64()),
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}

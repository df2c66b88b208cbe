//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so the summary is always printed. Exits nonzero if
//! any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use asynclocal::algorithms::{compose, SaveColors, SaveOneMoreColor, WaitFreeLinial};
use asynclocal::coverfree::{construct_family, reduction_schedule, verify_coverfree};
use asynclocal::engine::graph::{build_graph, GraphSpec, Shape};
use asynclocal::engine::{execute, identity_inputs, Graph};
use asynclocal::schedulers::{RandomAdversary, Scheduling};
use asynclocal::verify::{
    campaign, check_parity_reduction, check_proper, reproduce_table, CampaignConfig, CampaignReport, Palette, Table,
};
use asynclocal::wsb::{
    self, binom_divisibility, check_input_family, cycle_family, enumerate_complete, equivalence_class, trim, Toy,
};
use asynclocal::Color;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const P_CYCLE: [f64; 3] = [0.2, 0.5, 0.8];
const CRASH: f64 = 0.01;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("golden trace", golden_trace),
        ("livelock certificate", livelock),
        ("5-coloring cycles", five_coloring),
        ("palette bound", palette_bound),
        ("linial round count", linial_rounds),
        ("cover-freeness", cover_freeness),
        ("wsb combinatorics", wsb_combinatorics),
        ("parity reduction", parity_reduction),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn golden_trace() -> Outcome {
    let t = Instant::now();
    let r = reproduce_table(Table::One).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(r.verdict.pass, || format!("{}", r.verdict))?;
    ensure(r.decisions.len() == 5, || format!("{} decisions", r.decisions.len()))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("every cell and 5 decisions match, max runtime {}", r.runtimes.values().max().unwrap()))
}

fn livelock() -> Outcome {
    let t = Instant::now();
    let r = reproduce_table(Table::Two).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(r.verdict.pass, || format!("{}", r.verdict))?;
    let cert = r.certificate.ok_or("no certificate")?;
    ensure(cert.cycle_steps == 2, || format!("cycle of {} steps", cert.cycle_steps))?;
    ensure(cert.prefix == vec![vec![2, 3, 4], vec![1, 3, 4]], || format!("prefix {:?}", cert.prefix))?;
    ensure(cert.period == vec![vec![3, 4]], || format!("period {:?}", cert.period))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "configuration at period boundary {} repeats at boundary {}, undecided {:?}",
        cert.first_boundary, cert.repeat_boundary, cert.undecided
    ))
}

/// `n` distinct identifiers drawn from `1..=bound`, in cycle order.
fn shuffled_ids(n: usize, bound: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d1d5);
    sample(&mut rng, bound as usize, n).into_iter().map(|i| i as u64 + 1).collect()
}

fn random_job(graph: Graph, seed: u64) -> (Graph, asynclocal::engine::Inputs, Scheduling) {
    let adv = RandomAdversary::new(seed, P_CYCLE[(seed % 3) as usize], CRASH, Default::default(), &graph);
    let inputs = identity_inputs(&graph);
    (graph, inputs, Scheduling::Random(adv))
}

fn summarize(r: &CampaignReport) -> String {
    format!("{} runs, {} colors used, max runtime {}, {} runs left nodes undecided", r.runs, r.colors.len(), r.max_runtime, r.incomplete)
}

fn first_failure(r: &CampaignReport) -> String {
    let f = &r.failures[0];
    format!("{} failing runs; seed {}: {}", r.failed_runs, f.seed, f.failures.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
}

fn five_coloring() -> Outcome {
    const SEEDS: u64 = 10_000;
    let mut runs = 0;
    let mut max_runtime = 0;
    for n in 4..=12usize {
        let bound = (n * n) as u64;
        let algo = compose(WaitFreeLinial::new(bound, 2), SaveOneMoreColor::new(2));
        let config = CampaignConfig { palette: None, termination: true, ..Default::default() };
        let report = campaign(&algo, 0..SEEDS, &config, |seed| {
            let spec = GraphSpec::new(Shape::Cycle(n)).with_ids(shuffled_ids(n, bound, seed)).with_bound(bound);
            random_job(build_graph(&spec).expect("cycle"), seed)
        })
        .map_err(|e| format!("n={n}: {e}"))?;
        ensure(report.passed(), || format!("n={n}: {}", first_failure(&report)))?;
        // Independent palette oracle: pairs with a + b <= 2, never (2, 0).
        let ok = |c: &Color| matches!(*c, Color::Pair(a, b) if a + b <= 2 && (a, b) != (2, 0));
        ensure(report.colors.iter().all(ok), || format!("n={n}: colors {:?}", report.colors))?;
        ensure(report.colors.len() <= 5, || format!("n={n}: {} colors", report.colors.len()))?;
        runs += report.runs;
        max_runtime = max_runtime.max(report.max_runtime);
    }
    Ok(format!("{runs} runs on cycles 4..=12, proper, at most 5 colors, never (2,0), max runtime {max_runtime}"))
}

fn palette_bound() -> Outcome {
    const SEEDS: u64 = 1_000;
    let mut instances: Vec<(String, Graph)> =
        vec![("circulant(7,2)".into(), build_graph(&GraphSpec::new(Shape::Circulant { n: 7, k: 2 })).unwrap())];
    for (n, max_degree, seed) in [(12, 3, 1), (20, 4, 2), (30, 4, 3), (40, 4, 4)] {
        let g = build_graph(&GraphSpec::new(Shape::RandomTree { n, max_degree, seed })).unwrap();
        instances.push((format!("tree({n},{max_degree},{seed})"), g));
    }
    let mut summary = Vec::new();
    for (name, graph) in instances {
        let delta = graph.max_degree() as u64;
        ensure(delta <= 4, || format!("{name}: degree {delta}"))?;
        let algo = compose(WaitFreeLinial::new(graph.id_bound(), delta), SaveColors);
        let config = CampaignConfig { palette: Some(Palette::Pairs { delta, exclude_high: false }), ..Default::default() };
        let report = campaign(&algo, 0..SEEDS, &config, |seed| random_job(graph.clone(), seed))
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(report.passed(), || format!("{name}: {}", first_failure(&report)))?;
        let bound = (delta + 1) * (delta + 2) / 2;
        let ok = |c: &Color| matches!(*c, Color::Pair(a, b) if a + b <= delta);
        ensure(report.colors.iter().all(ok), || format!("{name}: colors {:?}", report.colors))?;
        ensure(report.colors.len() as u64 <= bound, || format!("{name}: {} colors > {bound}", report.colors.len()))?;
        summary.push(format!("{name} Δ={delta}: {}", summarize(&report)));
    }
    Ok(summary.join("; "))
}

fn linial_rounds() -> Outcome {
    let mut summary = Vec::new();
    for n in [10usize, 100, 1000] {
        let bound = (n * n) as u64;
        let algo = WaitFreeLinial::new(bound, 2);
        let t = algo.rounds();
        let g = build_graph(&GraphSpec::new(Shape::Cycle(n)).with_bound(bound)).unwrap();
        let trace = execute(&algo, &g, &identity_inputs(&g), &Scheduling::Sync, 1000).map_err(|e| e.to_string())?;
        ensure(trace.is_complete(), || format!("n={n}: incomplete"))?;
        ensure(trace.steps.len() == t.max(1), || format!("n={n}: {} steps, T={t}", trace.steps.len()))?;
        ensure(t <= 4, || format!("n={n}: T={t}"))?;
        ensure(check_proper(&trace).pass, || format!("n={n}: not proper"))?;
        let final_palette = reduction_schedule(bound, 2).final_palette();
        ensure(final_palette <= 81, || format!("n={n}: final palette {final_palette}"))?;
        let max = trace.decisions().values().filter_map(Color::as_single).max().unwrap_or(0);
        ensure(max <= final_palette, || format!("n={n}: color {max} above {final_palette}"))?;
        summary.push(format!("n={n}: T={t}, palette {final_palette}"));
    }
    Ok(summary.join("; "))
}

fn cover_freeness() -> Outcome {
    use rayon::prelude::*;
    let cases: Vec<(u64, u64)> = (1..=3).flat_map(|k| (2..=200).map(move |m| (k, m))).collect();
    let bad: Vec<(u64, u64)> = cases
        .par_iter()
        .filter(|&&(k, m)| !construct_family(k, m).map(|f| verify_coverfree(&f)).unwrap_or(false))
        .copied()
        .collect();
    ensure(bad.is_empty(), || format!("not cover-free: {bad:?}"))?;
    Ok(format!("{} families with k in 1..=3, m in 2..=200", cases.len()))
}

fn binomial(n: u64, k: u64) -> usize {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) as usize
}

fn lemma_eight(toy: Toy, n: usize) -> Result<(i64, i64), String> {
    let bound = wsb::DEFAULT_STEP_BOUND;
    let plain = wsb::univalued_signed_count(&toy, n, bound, false).map_err(|e| e.to_string())?;
    let trimmed = wsb::univalued_signed_count(&trim(toy, n), n, bound, false).map_err(|e| e.to_string())?;
    Ok((plain.count, trimmed.count))
}

fn wsb_combinatorics() -> Outcome {
    // (a)
    for n in [2, 3, 5, 7, 11] {
        let v = binom_divisibility(n).map_err(|e| e.to_string())?;
        ensure(v.pass, || format!("binom n={n}: {v}"))?;
    }
    // (b)
    let mut counts = Vec::new();
    for name in wsb::TOY_NAMES {
        let toy: Toy = name.parse().unwrap();
        for n in [2, 3] {
            let (a, t) = lemma_eight(toy, n)?;
            ensure(a == t, || format!("{name} n={n}: count {a}, trimmed {t}"))?;
            counts.push(format!("{name}/{n}={a}"));
        }
    }
    // (c)
    let fam = check_input_family(&cycle_family(5), 5).map_err(|e| e.to_string())?;
    ensure(fam.pass && fam.size == 24 && fam.residue == 4, || format!("cycle family: {fam:?}"))?;
    // (d)
    let sigma = cycle_family(3).remove(0);
    let mut classes = 0;
    for name in wsb::TOY_NAMES {
        let toy: Toy = name.parse().unwrap();
        let execs = enumerate_complete(&toy, 3, wsb::DEFAULT_STEP_BOUND, false).map_err(|e| e.to_string())?;
        let trimmed = enumerate_complete(&trim(toy, 3), 3, wsb::DEFAULT_STEP_BOUND, false).map_err(|e| e.to_string())?;
        for e in execs.iter().chain(&trimmed) {
            let class = equivalence_class(e, &sigma).map_err(|e| e.to_string())?;
            let m = e.classify().sim.len() as u64;
            ensure(class.len() == binomial(3, m), || format!("{name} {:?}: class {} vs C(3,{m})", e.blocks, class.len()))?;
            ensure(class.iter().all(|(b, _)| wsb::sign_of(b) == e.sign()), || format!("{:?}: sign changes", e.blocks))?;
            classes += 1;
        }
    }
    Ok(format!("binomials ok; counts {}; cycle family 24 mod 5 = 4; {classes} class sizes", counts.join(" ")))
}

/// Independent oracle: every proper coloring of C_n with colors 0..4.
fn colorings_have_both_parities(n: usize) -> (u64, bool) {
    let mut total = 0;
    let mut ok = true;
    for code in 0..4u64.pow(n as u32) {
        let c: Vec<u64> = (0..n).map(|i| code / 4u64.pow(i as u32) % 4).collect();
        if (0..n).any(|i| c[i] == c[(i + 1) % n]) {
            continue;
        }
        total += 1;
        ok &= c.iter().any(|x| x % 2 == 0) && c.iter().any(|x| x % 2 == 1);
    }
    (total, ok)
}

fn parity_reduction() -> Outcome {
    let mut counts = Vec::new();
    for n in [5, 7] {
        let (total, ok) = colorings_have_both_parities(n);
        ensure(ok, || format!("C{n}: a proper 4-coloring with one parity"))?;
        // (k-1)^n + (-1)^n (k-1) proper k-colorings of C_n.
        ensure(total == 3u64.pow(n as u32) - 3, || format!("C{n}: {total} colorings"))?;
        counts.push(format!("C{n}: {total}"));
    }
    let mut checked = 0;
    for n in [5usize, 7, 9] {
        let bound = (n * n) as u64;
        let algo = compose(WaitFreeLinial::new(bound, 2), SaveOneMoreColor::new(2));
        for seed in 0..500u64 {
            let spec = GraphSpec::new(Shape::Cycle(n)).with_ids(shuffled_ids(n, bound, seed)).with_bound(bound);
            let g = build_graph(&spec).unwrap();
            let adv = RandomAdversary::new(seed, P_CYCLE[(seed % 3) as usize], 0.0, Default::default(), &g);
            let trace = execute(&algo, &g, &identity_inputs(&g), &Scheduling::Random(adv), 1_000_000)
                .map_err(|e| e.to_string())?;
            let distinct: BTreeSet<&Color> = trace.decisions().values().collect();
            if distinct.len() > 4 {
                continue;
            }
            let v = check_parity_reduction(&trace).map_err(|e| format!("C{n} seed {seed}: {e}"))?;
            ensure(v.pass, || format!("C{n} seed {seed}: {v}"))?;
            checked += 1;
        }
    }
    ensure(checked > 0, || "no engine run used at most 4 colors".into())?;
    Ok(format!("{}; {checked} engine colorings with both parities", counts.join(", ")))
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Thresholds, sample sizes, seeds and time
//! limits are pinned below; pass criterion numbers as arguments to run a
//! subset.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treeaut::automorphism::stream::derive_seed;
use treeaut::classify::{classify, schottky_check, Kind, SchottkyOutcome, WindowPolicy};
use treeaut::experiments::{
    exp_independence, exp_nielsen_measure, exp_product_trees, exp_techno, exp_trichotomy_montecarlo, exp_uniformity,
    free_evidence, run_experiment, slice_tuple, ExperimentConfig, ExperimentReport, Slice, EXPERIMENTS,
};
use treeaut::nielsen::{trichotomy, verify_verdict, Target, TrichotomyConfig, Verdict, VerdictKind};
use treeaut::par::Exec;
use treeaut::{Aut, TreeParams, Vertex};

use common::{fuzz_aut, oracle_distance};

/// Master seed of every randomized criterion, fixed before any run.
const SEED: u64 = 42;
const ALPHA: f64 = 0.01;
const CONTROL_P: f64 = 1e-6;
const SAMPLES: usize = 100_000;

type Check = fn() -> (bool, String);

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    check: Check,
}

fn cfg() -> ExperimentConfig {
    ExperimentConfig {
        seed: SEED,
        samples: SAMPLES,
        alpha: ALPHA,
        ..ExperimentConfig::default()
    }
}

fn params() -> TreeParams {
    TreeParams::new(3).unwrap()
}

// 1 ----------------------------------------------------------------------

/// Kind and minimal displacement by exhaustive search over `B(t0, 8)`.
fn brute_force(g: &Aut) -> (Kind, usize) {
    let ball = g.params().ball(&Vertex::root(), 8);
    let (m, x) = ball
        .iter()
        .map(|x| (oracle_distance(x, &g.apply(x)), x))
        .min_by_key(|(d, _)| *d)
        .unwrap();
    if m == 0 {
        (Kind::Elliptic, 0)
    } else if oracle_distance(x, &g.apply(&g.apply(x))) == 2 * m {
        (Kind::Hyperbolic, m)
    } else {
        (Kind::Inversion, m)
    }
}

fn c1_classification_oracle() -> (bool, String) {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut matched = 0;
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..200 {
        let g = fuzz_aut(p, &mut rng);
        assert!(g.factor_count() <= 4);
        let c = classify(&g, 10_000).unwrap();
        let (kind, m) = brute_force(&g);
        *hist.entry(format!("{kind:?}")).or_default() += 1;
        if c.kind() == kind && c.min_displacement() == m {
            matched += 1;
        }
    }
    (matched == 200, format!("{matched}/200 match, kinds {hist:?}"))
}

// 2 ----------------------------------------------------------------------

fn c2_schottky_free() -> (bool, String) {
    let p = params();
    let (mut satisfied, mut passed, mut draws) = (0, 0, 0);
    while satisfied < 50 && draws < 500 {
        let t = slice_tuple(Slice::Schottky, p, derive_seed(SEED, draws));
        draws += 1;
        if schottky_check(t.entries(), WindowPolicy::default()) != SchottkyOutcome::Satisfied {
            continue;
        }
        satisfied += 1;
        passed += free_evidence(&t).unwrap() as usize;
    }
    (
        satisfied == 50 && passed == 50,
        format!("{passed}/{satisfied} SATISFIED tuples free to length 8 on B(t0,6), none fixing t0 up to length 6 ({draws} draws)"),
    )
}

// 3, 4, 5, 8 -------------------------------------------------------------

fn p_of(r: &ExperimentReport, test: &str) -> f64 {
    *r.statistics.get(&format!("p.{test}")).unwrap_or_else(|| panic!("missing {test}"))
}

fn c3_uniformity() -> (bool, String) {
    let r = exp_uniformity(&cfg()).unwrap();
    let (a, b) = (p_of(&r, "uniform_rooted(2,2)"), p_of(&r, "uniform_rooted(3,2)"));
    let c = p_of(&r, "biased_sampler(2,2)");
    (
        a > ALPHA && b > ALPHA && c < CONTROL_P && r.pass,
        format!("p(2,2) = {a:.3}, p(3,2) = {b:.3}, biased control p = {c:.1e}, all {} rows pass: {}", r.records.len(), r.pass),
    )
}

fn c4_independence() -> (bool, String) {
    let r = exp_independence(&cfg()).unwrap();
    let ps: Vec<String> = r
        .records
        .iter()
        .map(|row| format!("{} p = {}", row[0], row[6]))
        .collect();
    (r.pass, format!("N = {SAMPLES}; {}", ps.join(", ")))
}

fn c5_techno() -> (bool, String) {
    let r = exp_techno(&cfg()).unwrap();
    let row = |s: &str| r.records.iter().find(|x| x[0] == s).unwrap().clone();
    let (a, b, c) = (row("(3,2)"), row("(3,2,2)"), row("(2,2)"));
    let ok = a[2] == "48" && a[4] == "true" && b[2] == "3072" && b[4] == "true" && c[4] == "false" && r.pass;
    (ok, format!("(3,2): {}/{}, (3,2,2): {}/{}, (2,2) control: {}/{}", a[2], a[3], b[2], b[3], c[2], c[3]))
}

fn c8_nielsen_measure() -> (bool, String) {
    let r = exp_nielsen_measure(&cfg()).unwrap();
    let p = p_of(&r, "pair after R(1,2,+)");
    (r.pass && p > ALPHA, format!("48x48 table after R(1,2,+): p = {p:.3}, N = {SAMPLES}"))
}

// 6 ----------------------------------------------------------------------

fn c6_mixed_density() -> (bool, String) {
    let p = params();
    let config = TrichotomyConfig::default();
    let mut hist: BTreeMap<VerdictKind, usize> = BTreeMap::new();
    let (mut aut0, mut verified) = (0, 0);
    let master = derive_seed(SEED, 6);
    for i in 0..50 {
        let t = slice_tuple(Slice::Mixed, p, derive_seed(master, i));
        let v = trichotomy(&t, &config).unwrap();
        *hist.entry(v.kind()).or_default() += 1;
        if let Verdict::DenseToDepth { n: 2, target: Target::AutZero, .. } = v {
            aut0 += 1;
        }
        verified += verify_verdict(&t, &v).unwrap() as usize;
    }
    let count = |k| hist.get(&k).copied().unwrap_or(0);
    let ok = aut0 * 100 >= 80 * 50
        && count(VerdictKind::Compact) == 0
        && count(VerdictKind::DiscreteFree) == 0
        && aut0 + count(VerdictKind::Undecided) == 50
        && verified == 50;
    (
        ok,
        format!(
            "DENSE_TO_DEPTH(2, Aut0) {aut0}/50, UNDECIDED {}, COMPACT {}, DISCRETE_FREE {}; certificates verified {verified}/50",
            count(VerdictKind::Undecided),
            count(VerdictKind::Compact),
            count(VerdictKind::DiscreteFree)
        ),
    )
}

// 7, 9 -------------------------------------------------------------------

fn c7_trichotomy() -> (bool, String) {
    let r = exp_trichotomy_montecarlo(&cfg()).unwrap();
    let s = |k: &str| r.statistics.get(k).copied().unwrap_or(0.0);
    let inconsistent = r.counts.get("inconsistent").copied().unwrap_or(0);
    let ok = r.pass
        && s("stabilizer.COMPACT") == 1.0
        && s("schottky.DISCRETE_FREE") >= 0.9
        && s("mixed.DENSE_TO_DEPTH.Aut0") >= 0.8
        && s("mixed.COMPACT") == 0.0
        && s("mixed.DISCRETE_FREE") == 0.0
        && inconsistent == 0;
    (
        ok,
        format!(
            "50 trials/slice: stabilizer COMPACT {:.2}, schottky DISCRETE_FREE {:.2}, mixed DENSE(Aut0) {:.2}; verdict changes under doubled budgets: {inconsistent}",
            s("stabilizer.COMPACT"),
            s("schottky.DISCRETE_FREE"),
            s("mixed.DENSE_TO_DEPTH.Aut0")
        ),
    )
}

fn c9_product_trees() -> (bool, String) {
    let r = exp_product_trees(&cfg()).unwrap();
    let n = |k: &str| r.counts.get(k).copied().unwrap_or(0);
    (
        r.pass,
        format!(
            "20 trials: {} decisive, {} ok; controls: mixed U {} ok / {} failed, Schottky T {} ok / {} failed",
            n("decisive"),
            n("trial.ok"),
            n("control_u_mixed.ok"),
            n("control_u_mixed.failed"),
            n("control_t_schottky.ok"),
            n("control_t_schottky.failed")
        ),
    )
}

// 10 ---------------------------------------------------------------------

fn c10_reproducibility() -> (bool, String) {
    let mut identical = 0;
    for (i, name) in EXPERIMENTS.iter().enumerate() {
        let trials = match *name {
            "densepoint" => 300,
            "trichotomy" => 6,
            _ => 4,
        };
        let base = ExperimentConfig {
            seed: derive_seed(SEED, 10 + i as u64),
            samples: 20_000,
            trials: Some(trials),
            ..cfg()
        };
        let runs: Vec<(String, String)> = [Exec::Sequential, Exec::Jobs(2), Exec::Sequential]
            .into_iter()
            .map(|exec| {
                let r = run_experiment(name, &ExperimentConfig { exec, ..base.clone() }).unwrap();
                (r.csv().unwrap(), serde_json::to_string(&r.summary()).unwrap())
            })
            .collect();
        if runs.iter().all(|r| r == &runs[0]) {
            identical += 1;
        }
    }
    (
        identical == EXPERIMENTS.len(),
        format!("{identical}/{} experiments byte-identical across three runs (sequential, 2 workers, sequential)", EXPERIMENTS.len()),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "classification oracle equivalence", limit: Duration::from_secs(60), check: c1_classification_oracle },
        Criterion { id: 2, name: "Schottky tuples are discrete and free", limit: Duration::from_secs(120), check: c2_schottky_free },
        Criterion { id: 3, name: "uniformity of portraits and states", limit: Duration::from_secs(30), check: c3_uniformity },
        Criterion { id: 4, name: "independence of gap-2 states", limit: Duration::from_secs(60), check: c4_independence },
        Criterion { id: 5, name: "subtree fixers generate", limit: Duration::from_secs(30), check: c5_techno },
        Criterion { id: 6, name: "mixed slice dense to depth 2", limit: Duration::from_secs(600), check: c6_mixed_density },
        Criterion { id: 7, name: "trichotomy slices and exclusivity", limit: Duration::from_secs(900), check: c7_trichotomy },
        Criterion { id: 8, name: "Nielsen moves preserve the measure", limit: Duration::from_secs(60), check: c8_nielsen_measure },
        Criterion { id: 9, name: "products of trees: not compact, discrete or open", limit: Duration::from_secs(300), check: c9_product_trees },
        Criterion { id: 10, name: "reproducible experiment records", limit: Duration::from_secs(600), check: c10_reproducibility },
    ];
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    println!("acceptance: {} criteria, seed {SEED}", criteria.len());
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = ok && in_time;
        failed += !pass as usize;
        println!(
            "{} {:>2}. {}: {} [{:.1} s, limit {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
    }
    if failed == 0 {
        println!("acceptance: all selected criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}

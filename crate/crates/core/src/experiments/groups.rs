//! Monte-Carlo experiments on generating pairs: the densepoint search, the
//! trichotomy slices, products of two trees and pointwise stabilizers.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde_json::json;

use super::{slice_tuple, ExperimentConfig, ExperimentReport, Slice};
use crate::automorphism::stream::derive_seed;
use crate::automorphism::{ball_shape, Aut, RootedBall};
use crate::classify::classify_exact;
use crate::error::{Error, Result};
use crate::nielsen::{
    density_probe, freeness_probe, hyperbolic_word, short_stabilizer_word, stabilizer_image, stabilizer_witness,
    trichotomy, verify_verdict, DensityParams, FreenessOutcome, GenTuple, Letter, SignedWord, StabilizerSearch,
    Target, TrichotomyConfig, Verdict, VerdictKind,
};
use crate::par::run_trials;
use crate::rooted::PermGroup;
use crate::tree::{TreeParams, Vertex};

fn period(a: &Aut, u: &Vertex) -> usize {
    let mut x = a.apply(u);
    let mut m = 1;
    while &x != u {
        x = a.apply(&x);
        m += 1;
    }
    m
}

/// `c⁻¹ ∘ a^m ∘ c`, where `a` fixes `t0` and `m` is the period of `c(t0)`
/// under `a`; it fixes `t0` and the path from `t0` to `c⁻¹(t0)`.
struct Conjugate<'a> {
    a: &'a Aut,
    c: Aut,
    c_inv: Aut,
    m: usize,
}

impl<'a> Conjugate<'a> {
    fn new(a: &'a Aut, c: Aut) -> Self {
        let m = period(a, &c.apply(&Vertex::root()));
        let c_inv = c.inverse();
        Conjugate { a, c, c_inv, m }
    }

    fn apply(&self, v: &Vertex) -> Vertex {
        let mut x = self.c.apply(v);
        for _ in 0..self.m {
            x = self.a.apply(&x);
        }
        self.c_inv.apply(&x)
    }
}

/// Search cap for a window target.
pub const DENSEPOINT_SEARCH_CAP: usize = 32;
/// Conjugates per side tried when assembling the depth-2 ball group.
pub const DENSEPOINT_GENERATION_CAP: usize = 16;
/// Trials that also assemble the ball group.
pub const DENSEPOINT_GENERATION_TRIALS: usize = 200;
/// Allowed deviation of a mean search length, relative to its expectation.
pub const DENSEPOINT_TOLERANCE: f64 = 0.075;

struct DenseTrial {
    /// First `i` whose conjugate realizes the identity, resp. the swap.
    hits: [Option<usize>; 2],
    generation: Option<(usize, BigUint)>,
}

/// Searches the conjugates `b^{-i} a^{m_i} b^{i}` for the two window targets
/// on the children of `t0` other than `"1"`, then assembles conjugates from
/// both sides of the axis until the depth-2 ball group is generated.
fn densepoint_trial(params: TreeParams, a: &Aut, generate: bool) -> Result<DenseTrial> {
    let b = Aut::left_mult_str(params, "01")?;
    let root = Vertex::root();
    let others: Vec<Vertex> = (0..params.k() as u8).filter(|&c| c != 1).map(|c| root.step(c)).collect();
    let swapped = |images: &[Vertex]| images[0] == others[1] && images[1] == others[0];
    let mut hits = [None, None];
    for i in 1..=DENSEPOINT_SEARCH_CAP {
        let e = Conjugate::new(a, b.pow(i as i64));
        let images: Vec<Vertex> = others.iter().map(|v| e.apply(v)).collect();
        if hits[0].is_none() && images == others {
            hits[0] = Some(i);
        }
        if hits[1].is_none() && swapped(&images) && images[2..] == others[2..] {
            hits[1] = Some(i);
        }
        if hits.iter().all(Option::is_some) {
            break;
        }
    }
    let generation = if generate {
        let shape = ball_shape(params, 2)?;
        let ball = RootedBall::new(params, &root, 2);
        let mut group = PermGroup::trivial(shape.leaf_count());
        let mut used = 0;
        'outer: for i in 1..=DENSEPOINT_GENERATION_CAP as i64 {
            for c in [b.pow(i), b.pow(-i)] {
                let e = Conjugate::new(a, c);
                let images: Vec<Vertex> = ball.vertices.iter().map(|v| e.apply(v)).collect();
                group.extend(ball.action_from_images(&shape, &images)?.leaf_permutation());
                used += 1;
                if group.order() == shape.aut_order() {
                    break 'outer;
                }
            }
        }
        Some((used, group.order()))
    } else {
        None
    };
    Ok(DenseTrial { hits, generation })
}

fn opt(x: Option<usize>) -> String {
    x.map_or_else(|| "miss".to_string(), |i| i.to_string())
}

/// Realizing window targets by conjugated state powers, and assembling the
/// depth-2 ball group at `t0` from them. `a = identity` is the control.
pub fn exp_densepoint(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = cfg.params()?;
    if params.k() > 4 {
        return Err(Error::Unsupported("densepoint search needs k ≤ 4".into()));
    }
    let trials = cfg.trials_or(2000);
    let expected = (1..params.k()).product::<usize>() as f64;
    let full = ball_shape(params, 2)?.aut_order();
    let mut report = ExperimentReport::new(
        "densepoint",
        cfg,
        json!({
            "trials": trials,
            "search_cap": DENSEPOINT_SEARCH_CAP,
            "generation_cap": DENSEPOINT_GENERATION_CAP,
            "generation_trials": DENSEPOINT_GENERATION_TRIALS.min(trials),
            "expected_search_length": expected,
        }),
        &["role", "trial", "seed", "search_identity", "search_swap", "conjugates", "order", "full"],
    );
    let results = run_trials(cfg.exec, cfg.sub_seed(1), trials, |i, seed| {
        let a = Aut::random_stabilizer(params, seed);
        densepoint_trial(params, &a, i < DENSEPOINT_GENERATION_TRIALS).map(|r| (seed, r))
    });
    let mut sums = [0usize; 2];
    let mut pass = true;
    let mut full_count = 0u64;
    for (i, r) in results.into_iter().enumerate() {
        let (seed, r) = r?;
        for (s, h) in sums.iter_mut().zip(r.hits) {
            match h {
                Some(x) => *s += x,
                None => {
                    pass = false;
                    report.bump("misses");
                }
            }
        }
        let (conj, order, is_full) = match &r.generation {
            Some((used, order)) => {
                let f = *order == full;
                full_count += f as u64;
                pass &= f;
                (used.to_string(), order.to_string(), f.to_string())
            }
            None => (String::new(), String::new(), String::new()),
        };
        report.push(vec![
            "trial".into(),
            i.to_string(),
            seed.to_string(),
            opt(r.hits[0]),
            opt(r.hits[1]),
            conj,
            order,
            is_full,
        ]);
    }
    let control = densepoint_trial(params, &Aut::identity(params), true)?;
    let (c_used, c_order) = control.generation.clone().expect("generation requested");
    let control_ok = control.hits[1].is_none() && c_order == BigUint::from(1u32);
    report.push(vec![
        "control".into(),
        "0".into(),
        String::new(),
        opt(control.hits[0]),
        opt(control.hits[1]),
        c_used.to_string(),
        c_order.to_string(),
        (c_order == full).to_string(),
    ]);

    for (name, s) in ["identity", "swap"].iter().zip(sums) {
        let mean = s as f64 / trials as f64;
        report.statistics.insert(format!("mean_search.{name}"), mean);
        pass &= (mean - expected).abs() <= DENSEPOINT_TOLERANCE * expected;
    }
    let gen_trials = DENSEPOINT_GENERATION_TRIALS.min(trials);
    report.counts.insert("generation_trials".into(), gen_trials as u64);
    report.counts.insert("generated_full".into(), full_count);
    report
        .statistics
        .insert("full_rate".into(), full_count as f64 / gen_trials.max(1) as f64);
    report.statistics.insert("expected_search".into(), expected);
    report.counts.insert("control_ok".into(), control_ok as u64);
    report.pass = pass && control_ok;
    Ok(report)
}

/// Minimal DISCRETE_FREE share on the Schottky slice.
pub const SCHOTTKY_MIN_SHARE: f64 = 0.9;
/// Minimal DENSE_TO_DEPTH(Aut0) share on the mixed slice.
pub const MIXED_MIN_SHARE: f64 = 0.8;
/// Word-length budgets of the mixed-slice success curve.
pub const CURVE_BUDGETS: [usize; 6] = [2, 4, 8, 16, 32, 64];

struct TrichotomyTrial {
    verdict: Verdict,
    doubled: VerdictKind,
    certificate_ok: bool,
    /// Freeness evidence for DISCRETE_FREE verdicts.
    freeness: Option<bool>,
}

/// No relation of length ≤ 8 on `B(t0, 6)` and no word of length ≤ 6
/// fixing `t0`.
pub fn free_evidence(t: &GenTuple) -> Result<bool> {
    Ok(matches!(freeness_probe(t, 8, 6)?, FreenessOutcome::NoRelationFound { .. })
        && short_stabilizer_word(t, 6).is_none())
}

fn trichotomy_trial(t: &GenTuple, config: &TrichotomyConfig) -> Result<TrichotomyTrial> {
    let verdict = trichotomy(t, config)?;
    let doubled = trichotomy(t, &config.doubled())?.kind();
    let certificate_ok = verify_verdict(t, &verdict)?;
    let freeness = match verdict.kind() {
        VerdictKind::DiscreteFree => Some(free_evidence(t)?),
        _ => None,
    };
    Ok(TrichotomyTrial {
        verdict,
        doubled,
        certificate_ok,
        freeness,
    })
}

fn verdict_detail(v: &Verdict) -> String {
    match v {
        Verdict::Compact { witness } => serde_json::to_string(witness).expect("witness serializes"),
        Verdict::DiscreteFree { moves, .. } => format!("{} moves", moves.len()),
        Verdict::DenseToDepth { n, target, certificate } => {
            format!("{target} depth {n}, stabilizer words up to {}", certificate.word_length)
        }
        Verdict::Undecided { reason } => reason.clone(),
    }
}

/// Trichotomy verdict histograms on the stabilizer, Schottky and mixed
/// slices, each trial re-run with doubled budgets.
pub fn exp_trichotomy_montecarlo(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = cfg.params()?;
    let trials = cfg.trials_or(50);
    let mut report = ExperimentReport::new(
        "trichotomy",
        cfg,
        json!({"trials_per_slice": trials}),
        &[
            "slice",
            "trial",
            "seed",
            "verdict",
            "detail",
            "verdict_doubled",
            "consistent",
            "certificate_ok",
            "free_evidence",
        ],
    );
    let mut pass = true;
    for (si, slice) in Slice::ALL.into_iter().enumerate() {
        let rows = run_trials(cfg.exec, cfg.sub_seed(si as u64 + 1), trials, |_, seed| {
            trichotomy_trial(&slice_tuple(slice, params, seed), &cfg.trichotomy).map(|r| (seed, r))
        });
        let mut kinds: HashMap<VerdictKind, usize> = HashMap::new();
        let mut aut0 = 0usize;
        let mut dense_lengths = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            let (seed, r) = row?;
            let kind = r.verdict.kind();
            *kinds.entry(kind).or_default() += 1;
            if let Verdict::DenseToDepth { target, certificate, .. } = &r.verdict {
                aut0 += usize::from(*target == Target::AutZero);
                dense_lengths.push(certificate.word_length);
            }
            let consistent = !kind.is_decisive() || kind == r.doubled;
            pass &= consistent && r.certificate_ok && r.freeness != Some(false);
            report.bump(format!("{}.{kind}", slice.name()));
            if !consistent {
                report.bump("inconsistent");
            }
            report.push(vec![
                slice.name().into(),
                i.to_string(),
                seed.to_string(),
                kind.to_string(),
                verdict_detail(&r.verdict),
                r.doubled.to_string(),
                consistent.to_string(),
                r.certificate_ok.to_string(),
                r.freeness.map_or_else(String::new, |f| f.to_string()),
            ]);
        }
        let share = |k: VerdictKind| kinds.get(&k).copied().unwrap_or(0) as f64 / trials.max(1) as f64;
        for k in VerdictKind::ALL {
            report.statistics.insert(format!("{}.{k}", slice.name()), share(k));
        }
        pass &= match slice {
            Slice::Stabilizer => share(VerdictKind::Compact) == 1.0,
            Slice::Schottky => share(VerdictKind::DiscreteFree) >= SCHOTTKY_MIN_SHARE,
            Slice::Mixed => {
                let dense = aut0 as f64 / trials.max(1) as f64;
                report.statistics.insert("mixed.DENSE_TO_DEPTH.Aut0".into(), dense);
                for budget in CURVE_BUDGETS {
                    let within = dense_lengths.iter().filter(|&&l| l <= budget).count();
                    report
                        .statistics
                        .insert(format!("mixed.dense_within.{budget:02}"), within as f64 / trials.max(1) as f64);
                }
                dense >= MIXED_MIN_SHARE
                    && share(VerdictKind::Compact) == 0.0
                    && share(VerdictKind::DiscreteFree) == 0.0
            }
        };
    }
    report.pass = pass;
    Ok(report)
}

/// Depth of the balls on which two words must agree.
pub const PRODUCT_DISCRETE_DEPTH: usize = 2;
/// Depth of the ball quotients in the openness check.
pub const PRODUCT_OPEN_DEPTH: usize = 3;
/// Longest word in the pigeonhole search.
pub const PRODUCT_WORD_LENGTH: usize = 8;

/// Two distinct reduced words of length ≤ `max_len` acting identically on
/// `B(t0, depth)` in both trees, whose quotient acts nontrivially on
/// `B(t0, depth + 2)` in one of them.
pub fn agreeing_words(tt: &GenTuple, tu: &GenTuple, depth: usize, max_len: usize) -> Option<(SignedWord, SignedWord)> {
    let root = Vertex::root();
    let (bt, bu) = (tt.params().ball(&root, depth), tu.params().ball(&root, depth));
    let letters: Vec<(Letter, Aut, Aut)> = (0..tt.len())
        .flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
        .map(|l| (l, tt.letter(l), tu.letter(l)))
        .collect();
    let nontrivial = |z: &SignedWord| {
        let (it, iu) = (Aut::identity(tt.params()), Aut::identity(tu.params()));
        let (gt, gu) = (tt.eval(z).expect("tuple word"), tu.eval(z).expect("tuple word"));
        !gt.agree_to_depth(&it, depth + 2) || !gu.agree_to_depth(&iu, depth + 2)
    };
    let mut seen: HashMap<(Vec<Vertex>, Vec<Vertex>), SignedWord> = HashMap::new();
    seen.insert((bt.clone(), bu.clone()), SignedWord::empty());
    let mut level = vec![(SignedWord::empty(), bt, bu)];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * 3);
        for (w, it, iu) in &level {
            for (l, xt, xu) in &letters {
                if w.letters().first() == Some(&l.inv()) {
                    continue;
                }
                let word = SignedWord(vec![*l]).mul(w);
                let nt: Vec<Vertex> = it.iter().map(|v| xt.apply(v)).collect();
                let nu: Vec<Vertex> = iu.iter().map(|v| xu.apply(v)).collect();
                let key = (nt, nu);
                match seen.get(&key) {
                    Some(w1) => {
                        if nontrivial(&w1.inverse().mul(&word)) {
                            return Some((w1.clone(), word));
                        }
                    }
                    None => {
                        seen.insert(key.clone(), word.clone());
                    }
                }
                next.push((word, key.0, key.1));
            }
        }
        level = next;
    }
    None
}

struct ProductTrial {
    decisive: bool,
    not_compact: bool,
    agreeing: Option<(SignedWord, SignedWord)>,
    not_open: bool,
    t_order: BigUint,
    u_order: BigUint,
    full: BigUint,
}

impl ProductTrial {
    fn all_three(&self) -> bool {
        self.not_compact && self.agreeing.is_some() && self.not_open
    }
}

/// The three checks for the group generated by the pairs `(tt[i], tu[i])`
/// acting on the product of two trees.
fn product_trial(tt: &GenTuple, tu: &GenTuple, density: DensityParams) -> Result<ProductTrial> {
    let root = Vertex::root();
    let dp = DensityParams {
        depth: PRODUCT_OPEN_DEPTH,
        ..density
    };
    let ti = stabilizer_image(tt, &root, dp)?;
    let ui = stabilizer_image(tu, &root, dp)?;
    let hyperbolic = hyperbolic_word(tt).is_some();
    Ok(ProductTrial {
        decisive: hyperbolic && ti.is_full(),
        not_compact: hyperbolic,
        agreeing: agreeing_words(tt, tu, PRODUCT_DISCRETE_DEPTH, PRODUCT_WORD_LENGTH),
        not_open: ti.is_full() && !ui.is_full(),
        t_order: ti.group.order(),
        u_order: ui.group.order(),
        full: ti.full_order,
    })
}

/// Controls per kind in the product experiment.
pub const PRODUCT_CONTROLS: usize = 3;

/// Pairs acting on `T × U`: mixed first coordinates, stabilizer second
/// coordinates. A decisive trial (first coordinate dense to the openness
/// depth) must be neither compact, discrete nor open. Controls: a mixed
/// second coordinate must fail the openness check, a Schottky first
/// coordinate the discreteness check.
pub fn exp_product_trees(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = cfg.params()?;
    let trials = cfg.trials_or(20);
    let density = cfg.trichotomy.density;
    let mut report = ExperimentReport::new(
        "product_trees",
        cfg,
        json!({
            "trials": trials,
            "discrete_depth": PRODUCT_DISCRETE_DEPTH,
            "open_depth": PRODUCT_OPEN_DEPTH,
            "word_length": PRODUCT_WORD_LENGTH,
        }),
        &[
            "role",
            "trial",
            "seed",
            "decisive",
            "not_compact",
            "not_discrete",
            "agreeing_words",
            "not_open",
            "t_order",
            "u_order",
            "full_order",
        ],
    );
    let schottky = GenTuple::new(vec![Aut::left_mult_str(params, "01")?, Aut::left_mult_str(params, "21")?])?;
    let kinds: Vec<(&str, usize)> = [("trial", trials), ("control_u_mixed", PRODUCT_CONTROLS), ("control_t_schottky", PRODUCT_CONTROLS)]
        .into_iter()
        .collect();
    let mut pass = true;
    let mut decisive = 0u64;
    for (ki, (role, n)) in kinds.into_iter().enumerate() {
        let rows = run_trials(cfg.exec, cfg.sub_seed(ki as u64 + 1), n, |_, seed| {
            let tt = match role {
                "control_t_schottky" => schottky.clone(),
                _ => slice_tuple(Slice::Mixed, params, derive_seed(seed, 0)),
            };
            let second = if role == "control_u_mixed" { Slice::Mixed } else { Slice::Stabilizer };
            let tu = slice_tuple(second, params, derive_seed(seed, 1));
            product_trial(&tt, &tu, density).map(|r| (seed, r))
        });
        for (i, row) in rows.into_iter().enumerate() {
            let (seed, r) = row?;
            let ok = match role {
                "trial" => {
                    decisive += r.decisive as u64;
                    !r.decisive || r.all_three()
                }
                "control_u_mixed" => !r.not_open,
                _ => r.agreeing.is_none(),
            };
            pass &= ok;
            report.bump(format!("{role}.{}", if ok { "ok" } else { "failed" }));
            report.push(vec![
                role.into(),
                i.to_string(),
                seed.to_string(),
                r.decisive.to_string(),
                r.not_compact.to_string(),
                r.agreeing.is_some().to_string(),
                r.agreeing
                    .as_ref()
                    .map_or_else(String::new, |(a, b)| format!("[{a}] [{b}]")),
                r.not_open.to_string(),
                r.t_order.to_string(),
                r.u_order.to_string(),
                r.full.to_string(),
            ]);
        }
    }
    report.counts.insert("decisive".into(), decisive);
    report.pass = pass && decisive > 0;
    Ok(report)
}

/// Search budgets for `Y = B(t0, radius)`.
pub fn stabilizer_search(radius: usize) -> StabilizerSearch {
    let base = StabilizerSearch::default();
    StabilizerSearch {
        word_budget: base.word_budget * (radius + 1),
        node_cap: base.node_cap * (radius + 1),
        check_radius: base.check_radius,
    }
}

/// Radii of the balls `Y = B(t0, r)` probed; a witness for the largest one
/// fixes every subset of it.
pub const STABILIZER_RADII: [usize; 3] = [0, 1, 2];

/// Nontrivial pointwise stabilizers of finite sets in dense mixed pairs, and
/// their absence in a Schottky pair.
pub fn exp_stabilizer_nontrivial(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = cfg.params()?;
    let trials = cfg.trials_or(10);
    let root = Vertex::root();
    let mut report = ExperimentReport::new(
        "stabilizer",
        cfg,
        json!({"trials": trials, "radii": STABILIZER_RADII, "check_radius": StabilizerSearch::default().check_radius}),
        &["role", "trial", "seed", "decisive", "y_radius", "y_size", "found", "word", "length"],
    );
    let probe_ball = params.ball(&root, StabilizerSearch::default().check_radius);
    let witness_ok = |t: &GenTuple, ys: &[Vertex], w: &SignedWord| -> bool {
        let g = t.eval(w).expect("tuple word");
        ys.iter().all(|y| &g.apply(y) == y) && probe_ball.iter().any(|v| &g.apply(v) != v)
    };
    let rows = run_trials(cfg.exec, cfg.sub_seed(1), trials, |_, seed| -> Result<_> {
        let t = slice_tuple(Slice::Mixed, params, seed);
        let decisive = density_probe(&t, &root, cfg.trichotomy.density)?.is_certified();
        let found: Vec<Option<SignedWord>> = STABILIZER_RADII
            .iter()
            .map(|&r| stabilizer_witness(&t, &params.ball(&root, r), stabilizer_search(r)))
            .collect();
        Ok((seed, t, decisive, found))
    });
    let mut pass = true;
    let mut decisive_count = 0u64;
    for (i, row) in rows.into_iter().enumerate() {
        let (seed, t, decisive, found) = row?;
        decisive_count += decisive as u64;
        for (&r, w) in STABILIZER_RADII.iter().zip(&found) {
            let ys = params.ball(&root, r);
            let ok = w.as_ref().is_some_and(|w| witness_ok(&t, &ys, w));
            if decisive {
                pass &= ok;
            }
            report.bump(format!("radius{r}.{}", if ok { "found" } else { "missing" }));
            report.push(vec![
                "trial".into(),
                i.to_string(),
                seed.to_string(),
                decisive.to_string(),
                r.to_string(),
                ys.len().to_string(),
                ok.to_string(),
                w.as_ref().map_or_else(String::new, ToString::to_string),
                w.as_ref().map_or_else(String::new, |w| w.len().to_string()),
            ]);
        }
    }
    let schottky = GenTuple::new(vec![Aut::left_mult_str(params, "01")?, Aut::left_mult_str(params, "21")?])?;
    let control = stabilizer_witness(&schottky, std::slice::from_ref(&root), stabilizer_search(0));
    let control_ok = control.is_none() && classify_exact(schottky.entry(0)).is_hyperbolic();
    report.push(vec![
        "control_schottky".into(),
        "0".into(),
        String::new(),
        "false".into(),
        "0".into(),
        "1".into(),
        control.is_some().to_string(),
        control.as_ref().map_or_else(String::new, ToString::to_string),
        control.as_ref().map_or_else(String::new, |w| w.len().to_string()),
    ]);
    report.counts.insert("decisive".into(), decisive_count);
    report.counts.insert("control_ok".into(), control_ok as u64);
    report.pass = pass && control_ok && decisive_count > 0;
    Ok(report)
}

//! Chi-square experiments on rooted portraits and ball actions, and the
//! generation check for subtree fixers.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{fmt_p, fmt_stat, ExperimentConfig, ExperimentReport};
use crate::automorphism::{ball_shape, Aut};
use crate::error::{Error, Result};
use crate::nielsen::{apply_move, GenTuple, NielsenMove, Sign};
use crate::par::{run_trials, Exec};
use crate::rooted::{group_order, subtree_fixer_generators, uniform_rooted, RootedAut, RootedShape};
use crate::stats::{chi_square_independence, chi_square_uniform, ChiSquare};
use crate::tree::{TreeParams, Vertex};

/// Tallies `draw(seed)` over `n` seeded draws.
fn tally<F>(exec: Exec, master: u64, n: usize, cells: usize, draw: F) -> Vec<u64>
where
    F: Fn(u64) -> usize + Sync + Send,
{
    let mut counts = vec![0u64; cells];
    for c in run_trials(exec, master, n, |_, s| draw(s)) {
        counts[c] += 1;
    }
    counts
}

fn shape(d: &[usize]) -> RootedShape {
    RootedShape::new(d.to_vec()).expect("valid shape")
}

fn cells_of(shape: &RootedShape) -> usize {
    usize::try_from(shape.aut_order()).expect("small shape")
}

const STAT_COLUMNS: [&str; 8] = ["test", "role", "shape", "n", "statistic", "df", "p", "pass"];

/// A test passes when `p > alpha`; a negative control passes when its test
/// rejects at `p < CONTROL_P`.
pub const CONTROL_P: f64 = 1e-6;

fn record(report: &mut ExperimentReport, test: &str, control: bool, shape: &str, n: usize, t: ChiSquare, alpha: f64) -> bool {
    let pass = if control { t.p_value < CONTROL_P } else { t.p_value > alpha };
    report.push(vec![
        test.to_string(),
        if control { "control" } else { "test" }.to_string(),
        shape.to_string(),
        n.to_string(),
        fmt_stat(t.statistic),
        t.df.to_string(),
        fmt_p(t.p_value),
        pass.to_string(),
    ]);
    report.statistics.insert(format!("p.{test}"), t.p_value);
    report.bump(if pass { "passed" } else { "failed" });
    pass
}

/// Portrait and state uniformity, plus a biased-sampler control.
pub fn exp_uniformity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = cfg.params()?;
    let n = cfg.samples;
    let mut report = ExperimentReport::new("uniformity", cfg, json!({}), &STAT_COLUMNS);
    let mut pass = true;
    let mut sub = 0u64;
    let mut next_seed = || {
        sub += 1;
        cfg.sub_seed(sub)
    };

    for d in [vec![2, 2], vec![3, 2]] {
        let s = shape(&d);
        let counts = tally(cfg.exec, next_seed(), n, cells_of(&s), |seed| {
            uniform_rooted(&s, seed).code() as usize
        });
        pass &= record(&mut report, &format!("uniform_rooted{s}"), false, &s.to_string(), n, chi_square_uniform(&counts), cfg.alpha);
    }

    for d in [vec![2, 2], vec![3, 2, 2]] {
        let s = shape(&d);
        let below = s.suffix(1)?;
        for u in 0..s.degree(0) {
            let counts = tally(cfg.exec, next_seed(), n, cells_of(&below), |seed| {
                let a = uniform_rooted(&s, seed);
                a.state_power(&[u]).expect("level-1 vertex").code() as usize
            });
            pass &= record(
                &mut report,
                &format!("state_power{s}@{u}"),
                false,
                &below.to_string(),
                n,
                chi_square_uniform(&counts),
                cfg.alpha,
            );
        }
    }

    // Ball actions of Haar stabilizer elements, at the largest depth with at
    // least five expected draws per cell.
    for depth in [2, 1] {
        let bs = ball_shape(params, depth)?;
        let Ok(cells) = usize::try_from(bs.aut_order()) else { continue };
        if cells.saturating_mul(5) > n {
            continue;
        }
        let counts = tally(cfg.exec, next_seed(), n, cells, |seed| {
            Aut::random_stabilizer(params, seed)
                .ball_action(&Vertex::root(), depth)
                .expect("stabilizer element")
                .code() as usize
        });
        pass &= record(
            &mut report,
            &format!("haar_ball_action(depth={depth})"),
            false,
            &bs.to_string(),
            n,
            chi_square_uniform(&counts),
            cfg.alpha,
        );
        break;
    }

    let s = shape(&[2, 2]);
    let counts = tally(cfg.exec, next_seed(), n, cells_of(&s), |seed| biased_draw(&s, seed).code() as usize);
    pass &= record(&mut report, "biased_sampler(2,2)", true, &s.to_string(), n, chi_square_uniform(&counts), cfg.alpha);

    report.pass = pass;
    Ok(report)
}

/// Identity with probability one half, a uniform draw otherwise.
pub fn biased_draw(shape: &RootedShape, seed: u64) -> RootedAut {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.random_bool(0.5) {
        RootedAut::identity(shape)
    } else {
        uniform_rooted(shape, rng.random())
    }
}

/// Vertex pairs `(u₁, u₂)` on `(2,2,2,2,2)`: `u₁` at level 1 and `u₂` a
/// level-3 descendant.
pub const GAP_PAIRS: [([usize; 1], [usize; 3]); 3] = [([0], [0, 0, 0]), ([0], [0, 1, 1]), ([1], [1, 0, 1])];

/// Independence of truncated state powers at gap 2, plus the same-orbit
/// control `(u, a(u))`.
pub fn exp_independence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let s = shape(&[2, 2, 2, 2, 2]);
    let n = cfg.samples;
    let mut report = ExperimentReport::new(
        "independence",
        cfg,
        json!({"shape": s.degrees(), "truncation": 2}),
        &STAT_COLUMNS,
    );
    let mut pass = true;
    let code2 = |a: &RootedAut, u: &[usize]| -> usize {
        a.state_power(u)
            .and_then(|x| x.truncate(2))
            .expect("internal vertex")
            .code() as usize
    };
    let table_of = |pairs: Vec<(usize, usize)>| {
        let mut table = vec![vec![0u64; 8]; 8];
        for (x, y) in pairs {
            table[x][y] += 1;
        }
        table
    };

    for (i, (u1, u2)) in GAP_PAIRS.iter().enumerate() {
        let pairs = run_trials(cfg.exec, cfg.sub_seed(i as u64 + 1), n, |_, seed| {
            let a = uniform_rooted(&s, seed);
            (code2(&a, u1), code2(&a, u2))
        });
        let t = chi_square_independence(&table_of(pairs));
        pass &= record(&mut report, &format!("gap2 {u1:?}-{u2:?}"), false, &s.to_string(), n, t, cfg.alpha);
    }

    let pairs = run_trials(cfg.exec, cfg.sub_seed(100), n, |_, seed| {
        let a = uniform_rooted(&s, seed);
        let v = a.apply(&[0]).expect("level-1 vertex");
        (code2(&a, &[0]), code2(&a, &v))
    });
    let t = chi_square_independence(&table_of(pairs));
    pass &= record(&mut report, "same_orbit [0]-a([0])", true, &s.to_string(), n, t, cfg.alpha);

    report.pass = pass;
    Ok(report)
}

/// Subtree-fixer generation: `(shape, expected generates_full)`.
pub const TECHNO_CASES: [(&[usize], bool); 5] = [
    (&[3, 2], true),
    (&[3, 2, 2], true),
    (&[2, 2], false),
    (&[4, 3], true),
    (&[3, 2, 2, 2], true),
];

/// The fixers of the subtrees below children 0 and 1 generate the full
/// group exactly when the root degree is at least 3.
pub fn exp_techno(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "techno",
        cfg,
        json!({}),
        &["shape", "generators", "order", "aut_order", "generates_full", "expected", "pass"],
    );
    let mut pass = true;
    for (d, expected) in TECHNO_CASES {
        let s = shape(d);
        let mut gens = subtree_fixer_generators(&s, 0)?;
        gens.extend(subtree_fixer_generators(&s, 1)?);
        let order = group_order(&s, &gens)?;
        let full = order == s.aut_order();
        let ok = full == expected;
        pass &= ok;
        report.bump(if ok { "passed" } else { "failed" });
        report.push(vec![
            s.to_string(),
            gens.len().to_string(),
            order.to_string(),
            s.aut_order().to_string(),
            full.to_string(),
            expected.to_string(),
            ok.to_string(),
        ]);
    }
    report.pass = pass;
    Ok(report)
}

/// Cell index of the pair of ball actions at `t0`.
fn pair_cell(t: &GenTuple, depth: usize, cells: usize) -> usize {
    let code = |g: &Aut| {
        g.ball_action(&Vertex::root(), depth)
            .expect("stabilizer element")
            .code() as usize
    };
    code(t.entry(0)) * cells + code(t.entry(1))
}

/// Joint ball actions of a Haar stabilizer pair before and after the move
/// `R(1,2,+)`: both tables should be uniform.
pub fn exp_nielsen_measure(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let params: TreeParams = cfg.params()?;
    let n = cfg.samples;
    let depth = [2, 1]
        .into_iter()
        .find(|&d| {
            ball_shape(params, d)
                .ok()
                .and_then(|s| usize::try_from(s.aut_order()).ok())
                .is_some_and(|c| c.saturating_mul(c).saturating_mul(5) <= n)
        })
        .ok_or_else(|| Error::Unsupported(format!("{n} samples are too few for k = {}", params.k())))?;
    let bs = ball_shape(params, depth)?;
    let cells = cells_of(&bs);
    let mv = NielsenMove::R(0, 1, Sign::Plus);
    let mut report = ExperimentReport::new(
        "nielsen_measure",
        cfg,
        json!({"depth": depth, "move": mv.to_string()}),
        &STAT_COLUMNS,
    );
    let draws = run_trials(cfg.exec, cfg.sub_seed(1), n, |_, seed| {
        let t = GenTuple::new(vec![
            Aut::random_stabilizer(params, crate::automorphism::stream::derive_seed(seed, 0)),
            Aut::random_stabilizer(params, crate::automorphism::stream::derive_seed(seed, 1)),
        ])
        .expect("same tree");
        let moved = apply_move(&t, mv).expect("valid move");
        (pair_cell(&t, depth, cells), pair_cell(&moved, depth, cells))
    });
    let mut before = vec![0u64; cells * cells];
    let mut after = vec![0u64; cells * cells];
    for (x, y) in draws {
        before[x] += 1;
        after[y] += 1;
    }
    let label = format!("{bs}x{bs}");
    let mut pass = record(&mut report, "pair", false, &label, n, chi_square_uniform(&before), cfg.alpha);
    pass &= record(&mut report, &format!("pair after {mv}"), false, &label, n, chi_square_uniform(&after), cfg.alpha);
    report.pass = pass;
    Ok(report)
}

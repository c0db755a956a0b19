//! Desk-scale experiments. Each emits one CSV record per trial or test and a
//! JSON summary `{name, config, counts, statistics, pass}`. Records depend
//! only on the configuration: the execution mode never changes them.

mod groups;
mod statistical;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::automorphism::Aut;
use crate::error::{Error, Result};
use crate::nielsen::{GenTuple, TrichotomyConfig};
use crate::par::Exec;
use crate::tree::{TreeParams, Vertex};

pub use groups::{
    agreeing_words, exp_densepoint, exp_product_trees, exp_stabilizer_nontrivial, exp_trichotomy_montecarlo,
    free_evidence, stabilizer_search, DENSEPOINT_GENERATION_CAP, DENSEPOINT_GENERATION_TRIALS, DENSEPOINT_SEARCH_CAP,
    DENSEPOINT_TOLERANCE, MIXED_MIN_SHARE, PRODUCT_CONTROLS, PRODUCT_DISCRETE_DEPTH, PRODUCT_OPEN_DEPTH,
    PRODUCT_WORD_LENGTH, SCHOTTKY_MIN_SHARE, STABILIZER_RADII,
};
pub use statistical::{
    biased_draw, exp_independence, exp_nielsen_measure, exp_techno, exp_uniformity, CONTROL_P, GAP_PAIRS, TECHNO_CASES,
};

/// Names accepted by [`run_experiment`].
pub const EXPERIMENTS: [&str; 8] = [
    "uniformity",
    "independence",
    "techno",
    "densepoint",
    "trichotomy",
    "product_trees",
    "stabilizer",
    "nielsen_measure",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub seed: u64,
    /// Draws per statistical test.
    pub samples: usize,
    /// Trials per slice; `None` takes the experiment's default.
    pub trials: Option<usize>,
    /// Significance level of the chi-square tests.
    pub alpha: f64,
    pub trichotomy: TrichotomyConfig,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 3,
            seed: 42,
            samples: 100_000,
            trials: None,
            alpha: 0.01,
            trichotomy: TrichotomyConfig::default(),
            exec: Exec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<TreeParams> {
        TreeParams::new(self.k)
    }

    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    /// Master seed of the `i`-th sub-experiment.
    fn sub_seed(&self, i: u64) -> u64 {
        crate::automorphism::stream::derive_seed(self.seed, i)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: Value,
    pub columns: Vec<String>,
    pub records: Vec<Vec<String>>,
    pub counts: BTreeMap<String, u64>,
    pub statistics: BTreeMap<String, f64>,
    pub pass: bool,
}

impl ExperimentReport {
    fn new(name: &str, cfg: &ExperimentConfig, extra: Value, columns: &[&str]) -> Self {
        let mut config = serde_json::to_value(cfg).expect("config serializes");
        if let (Value::Object(base), Value::Object(extra)) = (&mut config, extra) {
            base.extend(extra);
        }
        ExperimentReport {
            name: name.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            records: Vec::new(),
            counts: BTreeMap::new(),
            statistics: BTreeMap::new(),
            pass: false,
        }
    }

    fn push(&mut self, record: Vec<String>) {
        debug_assert_eq!(record.len(), self.columns.len());
        self.records.push(record);
    }

    fn bump(&mut self, key: impl Into<String>) {
        *self.counts.entry(key.into()).or_default() += 1;
    }

    /// The trial records as CSV with a header row.
    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.records {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("records are UTF-8"))
    }

    pub fn summary(&self) -> Value {
        json!({
            "name": self.name,
            "config": self.config,
            "counts": self.counts,
            "statistics": self.statistics,
            "pass": self.pass,
        })
    }

    /// Writes `<name>.csv` and `<name>.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.json", self.name));
        fs::write(&csv_path, self.csv()?)?;
        fs::write(&json_path, serde_json::to_string_pretty(&self.summary())? + "\n")?;
        Ok((csv_path, json_path))
    }
}

pub fn run_experiment(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match name {
        "uniformity" => exp_uniformity(cfg),
        "independence" => exp_independence(cfg),
        "techno" => exp_techno(cfg),
        "densepoint" => exp_densepoint(cfg),
        "trichotomy" => exp_trichotomy_montecarlo(cfg),
        "product_trees" => exp_product_trees(cfg),
        "stabilizer" => exp_stabilizer_nontrivial(cfg),
        "nielsen_measure" => exp_nielsen_measure(cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

/// Families of generating pairs sampled by the Monte-Carlo experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slice {
    /// Two independent Haar elements of the stabilizer of `t0`.
    Stabilizer,
    /// Conjugates of long left multiplications with spread axes.
    Schottky,
    /// A stabilizer element and `lm("01")`.
    Mixed,
}

impl Slice {
    pub const ALL: [Slice; 3] = [Slice::Stabilizer, Slice::Schottky, Slice::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Slice::Stabilizer => "stabilizer",
            Slice::Schottky => "schottky",
            Slice::Mixed => "mixed",
        }
    }
}

/// A random reduced word of length `len`; with `cyclic` the first and last
/// letters differ as well.
fn random_word(rng: &mut ChaCha8Rng, k: usize, len: usize, cyclic: bool) -> Vertex {
    loop {
        let mut letters: Vec<u8> = Vec::with_capacity(len);
        for _ in 0..len {
            let c = loop {
                let c = rng.random_range(0..k as u8);
                if letters.last() != Some(&c) {
                    break c;
                }
            };
            letters.push(c);
        }
        if !cyclic || len < 2 || letters.first() != letters.last() {
            return Vertex::from_letters(letters).expect("letters are reduced");
        }
    }
}

/// `c ∘ lm(w) ∘ c⁻¹` with `w` cyclically reduced of length 6 to 8 and
/// `c = lm(u) ∘ h`, `u` of length 3 and `h` a Haar stabilizer element.
fn schottky_entry(params: TreeParams, rng: &mut ChaCha8Rng) -> Aut {
    let len = rng.random_range(6..=8);
    let w = random_word(rng, params.k(), len, true);
    let u = random_word(rng, params.k(), 3, false);
    let h = Aut::random_stabilizer(params, rng.random());
    let c = Aut::left_mult(params, &u).expect("valid word").compose(&h);
    c.compose(&Aut::left_mult(params, &w).expect("valid word"))
        .compose(&c.inverse())
}

/// The generating pair of `slice` drawn from `seed`.
pub fn slice_tuple(slice: Slice, params: TreeParams, seed: u64) -> GenTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = match slice {
        Slice::Stabilizer => vec![
            Aut::random_stabilizer(params, rng.random()),
            Aut::random_stabilizer(params, rng.random()),
        ],
        Slice::Schottky => vec![schottky_entry(params, &mut rng), schottky_entry(params, &mut rng)],
        Slice::Mixed => vec![
            Aut::random_stabilizer(params, rng.random()),
            Aut::left_mult_str(params, "01").expect("valid word"),
        ],
    };
    GenTuple::new(entries).expect("entries share the tree")
}

fn fmt_stat(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_p(p: f64) -> String {
    format!("{p:.4e}")
}

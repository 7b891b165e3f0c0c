//! Threshold experiments under independent Z noise.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(seed, size index, p index, trial)`, and failures are aggregated by
//! counting, so results do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::css::{analyze, CssCode};
use crate::decoder::{syndrome_of, Classifier, Decoder};
use crate::error::Error;
use crate::fuchsian::{load_quotient, QuotientSpec};
use crate::gf2::{BitMatrix, EdgeVector};
use crate::lattice::{build_lattice, PeriodicGraph};

pub const CSV_HEADER: &str = "pattern,N,n,k,p,trials,failures,logical_rate,ci_low,ci_high,seed";

/// 97.5% quantile of the standard normal distribution.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// `[p, q]` of the tessellation.
    pub pattern: [usize; 2],
    /// One quotient file per lattice size.
    pub quotients: Vec<PathBuf>,
    pub p_grid: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; all logical cores when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub channel: Channel,
}

/// Which Pauli type the noise flips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Z flips, detected by vertex stars and matched on the lattice.
    #[default]
    Z,
    /// X flips, detected by faces and matched on the dual lattice.
    X,
}

impl SimConfig {
    /// Reads a JSON config. Relative quotient paths are resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: SimConfig =
            serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for q in &mut config.quotients {
            if q.is_relative() {
                *q = base.join(&*q);
            }
        }
        Ok(config)
    }

    /// Checks the sampling parameters.
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.into()));
        if self.p_grid.is_empty() {
            return bad("empty p grid");
        }
        if self.p_grid.iter().any(|p| !(0.0..0.5).contains(p)) {
            return bad("p values must lie in [0, 0.5)");
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("p values must be strictly increasing");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        Ok(())
    }
}

/// A code prepared for simulation.
#[derive(Clone, Debug)]
pub struct SimCode {
    pub pattern: [usize; 2],
    pub cells: usize,
    pub graph: PeriodicGraph,
    pub dual: PeriodicGraph,
    pub code: CssCode,
    pub d_z: usize,
    pub d_x: usize,
}

impl SimCode {
    pub fn prepare(pattern: [usize; 2], spec: &QuotientSpec) -> Result<Self, Error> {
        let lat = build_lattice(pattern[0], pattern[1], spec)?;
        let a = analyze(&lat.graph, Some(&lat.cell.generators))?;
        Ok(SimCode {
            pattern,
            cells: lat.cells,
            graph: lat.graph,
            dual: a.dual,
            code: a.code,
            d_z: a.d_z,
            d_x: a.d_x,
        })
    }
}

/// Decodes one error and reports whether the residual is a logical.
pub struct TrialRunner<'a> {
    checks: &'a BitMatrix,
    n: usize,
    decoder: Decoder<'a>,
    classifier: Classifier<'a>,
}

impl<'a> TrialRunner<'a> {
    pub fn new(sim: &'a SimCode, channel: Channel) -> Self {
        let code = &sim.code;
        match channel {
            Channel::Z => TrialRunner {
                checks: &code.h_x,
                n: code.n,
                decoder: Decoder::new(&sim.graph),
                classifier: Classifier::new(code),
            },
            Channel::X => TrialRunner {
                checks: &code.h_z,
                n: code.n,
                decoder: Decoder::new(&sim.dual),
                classifier: Classifier::for_x_errors(code),
            },
        }
    }

    pub fn fails(&self, error: &EdgeVector) -> Result<bool, Error> {
        let m = self.decoder.decode(&syndrome_of(self.checks, error))?;
        Ok(self.classifier.is_logical(error, &m.correction(self.n))?)
    }
}

/// The random stream of one trial.
pub fn trial_rng(seed: u64, size: usize, point: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((size as u64) << 32) | point as u64);
    rng.set_word_pos(u128::from(trial) << 32);
    rng
}

/// Independent Z flips with probability `p` on each of `n` qubits.
pub fn sample_error(rng: &mut impl Rng, n: usize, p: f64) -> EdgeVector {
    let mut e = EdgeVector::zeros(n);
    for i in 0..n {
        if rng.gen_bool(p) {
            e.flip(i);
        }
    }
    e
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let (f, n) = (failures as f64, trials as f64);
    let z2 = Z95 * Z95;
    let centre = (f + z2 / 2.0) / (n + z2);
    let half = Z95 / (n + z2) * (f * (n - f) / n + z2 / 4.0).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimRow {
    pub pattern: [usize; 2],
    pub cells: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub logical_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimResult {
    pub rows: Vec<SimRow>,
}

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{{{};{}}},{},{},{},{},{},{},{:.8},{:.8},{:.8},{}",
                r.pattern[0],
                r.pattern[1],
                r.cells,
                r.n,
                r.k,
                r.p,
                r.trials,
                r.failures,
                r.logical_rate,
                r.ci_low,
                r.ci_high,
                r.seed
            );
        }
        s
    }

    /// Rows grouped by lattice size, each sorted by `p`.
    pub fn curves(&self) -> BTreeMap<usize, Vec<&SimRow>> {
        let mut out: BTreeMap<usize, Vec<&SimRow>> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.cells).or_default().push(r);
        }
        for c in out.values_mut() {
            c.sort_by(|a, b| a.p.total_cmp(&b.p));
        }
        out
    }

    /// Places where the logical rate drops with growing `p` by more than the
    /// confidence intervals allow.
    pub fn monotonicity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (cells, c) in self.curves() {
            for w in c.windows(2) {
                if w[1].ci_high < w[0].ci_low {
                    out.push(format!(
                        "N={cells}: rate falls from {:.6} at p={} to {:.6} at p={}",
                        w[0].logical_rate, w[0].p, w[1].logical_rate, w[1].p
                    ));
                }
            }
        }
        out
    }
}

/// Runs the experiment described by `config`.
pub fn run(config: &SimConfig) -> Result<SimResult, Error> {
    config.validate()?;
    if config.quotients.is_empty() {
        return Err(Error::ConfigInvalid("no quotient files".into()));
    }
    let specs = config
        .quotients
        .iter()
        .map(|q| load_quotient(q))
        .collect::<Result<Vec<_>, _>>()?;
    let codes = specs
        .iter()
        .map(|s| SimCode::prepare(config.pattern, s))
        .collect::<Result<Vec<_>, _>>()?;
    run_codes(&codes, config)
}

/// Runs the experiment on prepared codes, one per quotient of `config`.
pub fn run_codes(codes: &[SimCode], config: &SimConfig) -> Result<SimResult, Error> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("thread pool: {e}")))?;
    let mut rows = Vec::with_capacity(codes.len() * config.p_grid.len());
    for (si, sim) in codes.iter().enumerate() {
        let runner = TrialRunner::new(sim, config.channel);
        for (pi, &p) in config.p_grid.iter().enumerate() {
            let failures = pool.install(|| {
                (0..config.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(config.seed, si, pi, t);
                        let e = sample_error(&mut rng, sim.code.n, p);
                        runner.fails(&e).map(u64::from)
                    })
                    .try_reduce(|| 0, |a, b| Ok(a + b))
            })?;
            let (ci_low, ci_high) = wilson_interval(failures, config.trials);
            rows.push(SimRow {
                pattern: sim.pattern,
                cells: sim.cells,
                n: sim.code.n,
                k: sim.code.k,
                p,
                trials: config.trials,
                failures,
                logical_rate: failures as f64 / config.trials as f64,
                ci_low,
                ci_high,
                seed: config.seed,
            });
        }
    }
    Ok(SimResult { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub p_low: f64,
    pub p_high: f64,
    /// Interpolated crossing of every pair of curves that crosses.
    pub crossings: Vec<f64>,
    /// False when no pair crosses; the interval is then the grid hull.
    pub found: bool,
}

/// Brackets the pairwise crossings of the logical-rate curves, each found by
/// linear interpolation between adjacent grid points where the sign of the
/// rate difference changes. Points where two curves coincide are skipped.
pub fn estimate_threshold(result: &SimResult) -> Result<ThresholdEstimate, Error> {
    let curves = result.curves();
    if curves.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} lattice size(s), need 2",
            curves.len()
        )));
    }
    let grid: Vec<f64> = curves.values().next().expect("non-empty").iter().map(|r| r.p).collect();
    if grid.len() < 3 {
        return Err(Error::InsufficientData(format!("{} p value(s), need 3", grid.len())));
    }
    if curves.values().any(|c| c.iter().map(|r| r.p).ne(grid.iter().copied())) {
        return Err(Error::InsufficientData(
            "curves are sampled on different p grids".into(),
        ));
    }
    let curves: Vec<_> = curves.into_values().collect();
    let mut crossings = Vec::new();
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            let diff: Vec<(f64, f64)> = grid
                .iter()
                .enumerate()
                .map(|(i, &p)| (p, curves[a][i].logical_rate - curves[b][i].logical_rate))
                .filter(|&(_, d)| d != 0.0)
                .collect();
            for w in diff.windows(2) {
                let ((p0, d0), (p1, d1)) = (w[0], w[1]);
                if (d0 < 0.0) != (d1 < 0.0) {
                    crossings.push(p0 + (p1 - p0) * d0 / (d0 - d1));
                }
            }
        }
    }
    if crossings.is_empty() {
        return Ok(ThresholdEstimate {
            p_low: grid[0],
            p_high: grid[grid.len() - 1],
            crossings,
            found: false,
        });
    }
    crossings.sort_by(f64::total_cmp);
    Ok(ThresholdEstimate {
        p_low: crossings[0],
        p_high: crossings[crossings.len() - 1],
        crossings,
        found: true,
    })
}

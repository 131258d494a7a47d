//! Seeded experiment sweeps over the sum-rate and power-minimization solvers.
//!
//! An [`ExperimentSpec`] names a solver, a base scenario, an optional sweep
//! axis and a list of seeds. [`run`] evaluates every (axis value, seed) cell
//! on a rayon pool and returns the rows sorted by axis position and seed;
//! [`write_outputs`] stores them as CSV next to a provenance JSON file.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bdris::channel::{build_scenario, watts_to_dbm, ScenarioConfig, RNG_ALGORITHM};
use bdris::powermin::{solve_powermin, PowerMinParams};
use bdris::riscore::{make_architecture, MaskKind};
use bdris::sumrate::{solve_sumrate, SumRateParams};
use bdris::Status;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

pub const CSV_HEADER: &str = "axis,seed,objective,objective_alt_units,iters,residual,time_ms,status,margin";

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "BDRIS_THREADS";

/// Group size used when a sweep or comparison asks for `group` without one.
pub const DEFAULT_GROUP_SIZE: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid spec at `{path}`: {reason}")]
    Spec { path: String, reason: String },
    #[error("solver failed for axis {axis}, seed {seed}: {source}")]
    Solver {
        axis: String,
        seed: u64,
        #[source]
        source: bdris::Error,
    },
    #[error("{0}")]
    Core(#[from] bdris::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

fn spec_err(path: impl Into<String>, reason: impl Into<String>) -> BenchError {
    BenchError::Spec { path: path.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Sumrate,
    Powermin,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sumrate => "sumrate",
            Mode::Powermin => "powermin",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    M,
    PTDbm,
    GammaDb,
    MaskKind,
}

/// A sweep value: a number for `m`, `p_t_dbm` and `gamma_db`, a mask name
/// for `mask_kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Mask(MaskKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub sumrate: SumRateParams<f64>,
    #[serde(default)]
    pub powermin: PowerMinParams<f64>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(mode: Mode, scenario: ScenarioConfig, seeds: Vec<u64>) -> Self {
        Self {
            mode,
            scenario,
            sumrate: SumRateParams::default(),
            powermin: PowerMinParams::default(),
            sweep: None,
            seeds,
            output_path: None,
        }
    }

    pub fn with_sweep(mut self, variable: SweepVariable, values: Vec<SweepValue>) -> Self {
        self.sweep = Some(Sweep { variable, values });
        self
    }

    /// Parses either a full spec or a bare scenario; a bare scenario runs
    /// once with its own seed.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let is_spec = value
            .as_object()
            .is_some_and(|o| ["scenario", "seeds", "mode", "sweep"].iter().any(|k| o.contains_key(*k)));
        if is_spec {
            Ok(serde_json::from_value(value)?)
        } else {
            let scenario: ScenarioConfig = serde_json::from_value(value)?;
            let seed = scenario.seed;
            Ok(Self::new(Mode::default(), scenario, vec![seed]))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(spec_err("seeds", "at least one seed is required"));
        }
        let mut seen = HashSet::new();
        for (i, s) in self.seeds.iter().enumerate() {
            if !seen.insert(s) {
                return Err(spec_err(format!("seeds[{i}]"), format!("duplicate seed {s}")));
            }
        }
        self.sumrate
            .validate()
            .map_err(|e| spec_err("sumrate", e.to_string()))?;
        self.powermin
            .validate()
            .map_err(|e| spec_err("powermin", e.to_string()))?;
        match &self.sweep {
            None => {
                self.scenario
                    .validate()
                    .map_err(|e| spec_err("scenario", e.to_string()))?;
            }
            Some(sw) => {
                if sw.values.is_empty() {
                    return Err(spec_err("sweep.values", "at least one value is required"));
                }
                let mut labels = HashSet::new();
                for (i, v) in sw.values.iter().enumerate() {
                    let path = format!("sweep.values[{i}]");
                    let cfg = self.cell_config(Some(v), 0).map_err(|e| match e {
                        BenchError::Spec { reason, .. } => spec_err(path.clone(), reason),
                        other => other,
                    })?;
                    cfg.validate().map_err(|e| spec_err(path.clone(), e.to_string()))?;
                    if !labels.insert(axis_label(sw.variable, v)) {
                        return Err(spec_err(path, "duplicate sweep value"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Scenario for one cell.
    pub fn cell_config(&self, value: Option<&SweepValue>, seed: u64) -> Result<ScenarioConfig> {
        let mut cfg = self.scenario.clone();
        cfg.seed = seed;
        let (Some(sw), Some(v)) = (&self.sweep, value) else {
            return Ok(cfg);
        };
        match (sw.variable, v) {
            (SweepVariable::M, SweepValue::Number(x)) => {
                if !(x.fract() == 0.0 && *x >= 1.0 && *x <= 1e6) {
                    return Err(spec_err("sweep.values", format!("m must be a positive integer, got {x}")));
                }
                cfg.m = *x as usize;
            }
            (SweepVariable::PTDbm, SweepValue::Number(x)) => cfg.p_t_dbm = *x,
            (SweepVariable::GammaDb, SweepValue::Number(x)) => cfg.gamma_db = vec![*x; cfg.k],
            (SweepVariable::MaskKind, SweepValue::Mask(kind)) => {
                cfg.mask_kind = *kind;
                if *kind == MaskKind::Group && cfg.group_size.is_none() {
                    cfg.group_size = Some(DEFAULT_GROUP_SIZE);
                }
            }
            (var, v) => {
                return Err(spec_err("sweep.values", format!("value {v:?} does not fit axis {var:?}")));
            }
        }
        Ok(cfg)
    }

    fn cells(&self) -> Vec<(usize, Option<SweepValue>, u64)> {
        let values: Vec<Option<SweepValue>> = match &self.sweep {
            Some(sw) => sw.values.iter().cloned().map(Some).collect(),
            None => vec![None],
        };
        values
            .into_iter()
            .enumerate()
            .flat_map(|(i, v)| self.seeds.iter().map(move |&s| (i, v.clone(), s)))
            .collect()
    }
}

fn axis_label(var: SweepVariable, v: &SweepValue) -> String {
    match (var, v) {
        (SweepVariable::M, SweepValue::Number(x)) => format!("{}", *x as usize),
        (_, SweepValue::Number(x)) => format!("{x}"),
        (_, SweepValue::Mask(k)) => k.to_string(),
    }
}

/// One (axis value, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Sweep value, or `base` without a sweep.
    pub axis: String,
    pub seed: u64,
    /// Sum-rate in nats/s/Hz, or transmit power in watts.
    pub objective: f64,
    /// Sum-rate in bits/s/Hz, or transmit power in dBm.
    pub objective_alt_units: f64,
    pub iters: usize,
    /// Final relative residual (power-min: the larger of the two constraints).
    pub residual: f64,
    pub time_ms: f64,
    pub status: Status,
    /// Power-min only: `min_k SINR_k / Γ_k` of the final certificate.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisSummary {
    pub axis: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single seed).
    pub std: f64,
    pub mean_alt: f64,
    pub std_alt: f64,
    pub infeasible: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<AxisSummary>,
    pub threads: usize,
}

impl RunOutput {
    pub fn any_infeasible(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::InfeasibleSolution)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and spread per axis value, in axis order.
pub fn summarize(rows: &[ResultRow]) -> Vec<AxisSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.axis.as_str()) {
            order.push(&r.axis);
        }
    }
    order
        .into_iter()
        .map(|axis| {
            let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.axis == axis).collect();
            let obj: Vec<f64> = sel.iter().map(|r| r.objective).collect();
            let alt: Vec<f64> = sel.iter().map(|r| r.objective_alt_units).collect();
            let (mean, std) = mean_std(&obj);
            let (mean_alt, std_alt) = mean_std(&alt);
            AxisSummary {
                axis: axis.to_string(),
                n: sel.len(),
                mean,
                std,
                mean_alt,
                std_alt,
                infeasible: sel.iter().filter(|r| r.status == Status::InfeasibleSolution).count(),
            }
        })
        .collect()
}

/// Pool size: `BDRIS_THREADS` if set to a positive integer, otherwise the
/// available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(spec_err(THREADS_ENV, format!("expected a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run_cell(spec: &ExperimentSpec, value: Option<&SweepValue>, seed: u64) -> Result<ResultRow> {
    let axis = match (&spec.sweep, value) {
        (Some(sw), Some(v)) => axis_label(sw.variable, v),
        _ => "base".to_string(),
    };
    let fail = |source| BenchError::Solver { axis: axis.clone(), seed, source };
    let cfg = spec.cell_config(value, seed)?;
    let scenario = build_scenario(&cfg).map_err(fail)?;
    let start = Instant::now();
    let row = match spec.mode {
        Mode::Sumrate => {
            let r = solve_sumrate(&scenario, &spec.sumrate, None).map_err(fail)?;
            ResultRow {
                axis: axis.clone(),
                seed,
                objective: r.outcome.rate_exact,
                objective_alt_units: r.outcome.rate_exact / std::f64::consts::LN_2,
                iters: r.iterations,
                residual: r.outcome.residual_rel,
                time_ms: 0.0,
                status: r.status,
                margin: None,
            }
        }
        Mode::Powermin => {
            let r = solve_powermin(&scenario, &spec.powermin, None).map_err(fail)?;
            ResultRow {
                axis: axis.clone(),
                seed,
                objective: r.outcome.power,
                objective_alt_units: watts_to_dbm(r.outcome.power),
                iters: r.iterations,
                residual: r.outcome.residual_rel.max(r.outcome.residual_y_rel),
                time_ms: 0.0,
                status: r.status,
                margin: Some(r.outcome.qos_margin),
            }
        }
    };
    Ok(ResultRow { time_ms: start.elapsed().as_secs_f64() * 1e3, ..row })
}

/// Runs every cell of the spec. Rows come back ordered by axis position,
/// then seed, regardless of scheduling.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let cells = spec.cells();
    let mut rows: Vec<(usize, ResultRow)> = pool.install(|| {
        cells
            .par_iter()
            .map(|(i, v, seed)| run_cell(spec, v.as_ref(), *seed).map(|r| (*i, r)))
            .collect::<Result<Vec<_>>>()
    })?;
    rows.sort_by_key(|(i, r)| (*i, r.seed));
    let rows: Vec<ResultRow> = rows.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&rows);
    Ok(RunOutput { spec: spec.clone(), rows, summary, threads })
}

/// Provenance file next to the CSV: same path with a `.json` extension.
pub fn provenance_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let io = |source| BenchError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?)
}

/// Writes the CSV and its provenance JSON. `extra` is stored under the
/// `comparison` key when present.
pub fn write_outputs(out: &RunOutput, path: &Path, extra: Option<&Comparison>) -> Result<PathBuf> {
    write_csv(&out.rows, path)?;
    let json_path = provenance_path(path);
    let doc = serde_json::json!({
        "tool": "bdris",
        "version": env!("CARGO_PKG_VERSION"),
        "mode": out.spec.mode,
        "rng": RNG_ALGORITHM,
        "threads": out.threads,
        "csv": path.file_name().map(|f| f.to_string_lossy().into_owned()),
        "spec": out.spec,
        "summary": out.summary,
        "comparison": extra,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(&json_path, text + "\n").map_err(|source| BenchError::Io { path: json_path.clone(), source })?;
    Ok(json_path)
}

#[derive(Debug, Clone, Serialize)]
pub struct MaskEntry {
    pub mask: MaskKind,
    pub free_parameters: usize,
    pub interconnections: usize,
    pub mean: f64,
    pub std: f64,
    pub infeasible: usize,
}

/// Paired outcome of mask `a` against mask `b` over the shared seeds.
#[derive(Debug, Clone, Serialize)]
pub struct PairedComparison {
    pub a: MaskKind,
    pub b: MaskKind,
    /// Seeds where `a` is strictly better (higher rate or lower power).
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// Mean of `objective(a) − objective(b)`.
    pub mean_diff: f64,
    /// One-sided sign-test p-value for "`a` is better", ties dropped.
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub mode: Mode,
    /// Best first.
    pub ranking: Vec<MaskEntry>,
    pub pairs: Vec<PairedComparison>,
}

/// `P(X ≥ wins)` for `X ~ Bin(wins + losses, 1/2)`.
pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = (wins + losses) as u64;
    if n == 0 {
        return 1.0;
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial parameters");
    if wins == 0 {
        1.0
    } else {
        dist.sf(wins as u64 - 1)
    }
}

/// Runs `base` once per mask on shared seeds and ranks the masks.
pub fn compare_architectures(base: &ExperimentSpec, masks: &[MaskKind]) -> Result<(RunOutput, Comparison)> {
    if masks.is_empty() {
        return Err(spec_err("masks", "at least one mask is required"));
    }
    let spec = base
        .clone()
        .with_sweep(SweepVariable::MaskKind, masks.iter().map(|&m| SweepValue::Mask(m)).collect());
    let out = run(&spec)?;
    let higher_better = base.mode == Mode::Sumrate;

    let mut ranking = Vec::new();
    for (&mask, s) in masks.iter().zip(&out.summary) {
        let cfg = spec.cell_config(Some(&SweepValue::Mask(mask)), 0)?;
        let arch = make_architecture(mask, cfg.m, cfg.group_size)?;
        ranking.push(MaskEntry {
            mask,
            free_parameters: arch.free_parameters(),
            interconnections: arch.interconnections(),
            mean: s.mean,
            std: s.std,
            infeasible: s.infeasible,
        });
    }
    ranking.sort_by(|x, y| {
        let o = x.mean.total_cmp(&y.mean);
        if higher_better {
            o.reverse()
        } else {
            o
        }
    });

    let by_mask = |m: MaskKind| -> Vec<&ResultRow> { out.rows.iter().filter(|r| r.axis == m.to_string()).collect() };
    let mut pairs = Vec::new();
    for (i, &a) in masks.iter().enumerate() {
        for &b in &masks[i + 1..] {
            let (ra, rb) = (by_mask(a), by_mask(b));
            let (mut wins, mut losses, mut ties, mut diff) = (0, 0, 0, 0.0);
            for (x, y) in ra.iter().zip(&rb) {
                let d = x.objective - y.objective;
                diff += d;
                let better = if higher_better { d } else { -d };
                if better > 0.0 {
                    wins += 1;
                } else if better < 0.0 {
                    losses += 1;
                } else {
                    ties += 1;
                }
            }
            pairs.push(PairedComparison {
                a,
                b,
                wins,
                losses,
                ties,
                mean_diff: diff / ra.len().max(1) as f64,
                p_value: sign_test_p(wins, losses),
            });
        }
    }
    Ok((out, Comparison { mode: base.mode, ranking, pairs }))
}

/// Parses `1,2,7` and half-open ranges such as `1..21`.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    let bad = |item: &str| spec_err("--seed-list", format!("cannot parse `{item}`"));
    let mut seeds = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(item))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(item))?;
            if b <= a {
                return Err(spec_err("--seed-list", format!("empty range `{item}`")));
            }
            seeds.extend(a..b);
        } else {
            seeds.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if seeds.is_empty() {
        return Err(spec_err("--seed-list", "no seeds given"));
    }
    Ok(seeds)
}

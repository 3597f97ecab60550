//! Experiment configuration and batch runners.
//!
//! A configuration is a TOML document. Top-level keys hold the scalar
//! parameters; `[grid]`, `[model]`, `[potential]` and `[reference]` are
//! sections. Unknown keys are rejected.
//!
//! ```toml
//! kind = "direct"          # optional; must agree with the command line
//! lambda = 1.0             # required
//! seed = 0
//! h = [0.1, 0.05]          # h schedule
//! eps = 0.1
//! m_max = 4
//! match_radius = 7.0
//! probes = [[0.0, 0.0]]
//! point = [0.0, 0.0]       # base point of the phase
//! gamma = 1.0              # Gaussian rate (paleywiener)
//! eta = [[0.0, 0.0]]       # imaginary frequency shifts (paleywiener)
//! functions = 10           # seeded test functions
//!
//! [grid]
//! n = 128
//! half_width = 8.0
//!
//! [model]
//! punctures = []
//! growth = 2
//! delta = 0.5
//!
//! [potential]
//! family = "gaussianBump"
//! center = [0.1, -0.1]
//! width = 0.6
//! amplitude = 0.9
//!
//! [reference]              # second potential of identify / uniqueness
//! family = "zero"
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleman::{carleman_sweep, CarlemanConfig};
use crate::cgo::{assemble_cgo, CgoConfig};
use crate::error::{Error, Result};
use crate::fieldops::io::write_cgf1;
use crate::fieldops::{Field, Grid};
use crate::geometry::SurfaceModel;
use crate::identify::{
    loglog_slope, pointwise_difference, stationary_phase_constant, uniqueness_chain, write_probe_csv, ChainBudget,
    IdentifyOptions,
};
use crate::paleywiener::{apply_symbol, complex_fourier, random_gaussian_class, sphere_division};
use crate::phase::{construct_amplitude, construct_phase};
use crate::potentials::Potential;
use crate::scattering::extract_s_matrix;
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Direct,
    Cgo,
    Carleman,
    Identify,
    Paleywiener,
    Uniqueness,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Direct,
        ExperimentKind::Cgo,
        ExperimentKind::Carleman,
        ExperimentKind::Identify,
        ExperimentKind::Paleywiener,
        ExperimentKind::Uniqueness,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Direct => "direct",
            ExperimentKind::Cgo => "cgo",
            ExperimentKind::Carleman => "carleman",
            ExperimentKind::Identify => "identify",
            ExperimentKind::Paleywiener => "paleywiener",
            ExperimentKind::Uniqueness => "uniqueness",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 128, half_width: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub punctures: Vec<[f64; 2]>,
    #[serde(default = "default_growth")]
    pub growth: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { punctures: Vec::new(), growth: default_growth(), delta: None }
    }
}

fn default_growth() -> u8 {
    2
}
fn default_eps() -> f64 {
    0.1
}
fn default_m_max() -> usize {
    4
}
fn default_gamma() -> f64 {
    1.0
}
fn default_functions() -> usize {
    10
}
fn default_probes() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}
fn default_eta() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [1.0, 0.0], [0.0, -2.0], [2.1, 2.1], [-3.0, 0.0]]
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_radius: Option<f64>,
    #[serde(default = "default_probes")]
    pub probes: Vec<[f64; 2]>,
    #[serde(default)]
    pub point: [f64; 2],
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_eta")]
    pub eta: Vec<[f64; 2]>,
    #[serde(default = "default_functions")]
    pub functions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default = "zero_potential")]
    pub potential: Potential,
    #[serde(default = "zero_potential")]
    pub reference: Potential,
}

fn zero_potential() -> Potential {
    Potential::Zero
}

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl ExperimentConfig {
    /// Parses and validates against `kind`; every failure is an [`Error::Config`].
    pub fn parse(text: &str, kind: ExperimentKind) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        if let Some(k) = cfg.kind {
            if k != kind {
                return Err(Error::Config(format!("config is for `{}`, command is `{}`", k.name(), kind.name())));
            }
        }
        cfg.kind = Some(kind);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, kind: ExperimentKind) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, kind)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.kind.unwrap_or(ExperimentKind::Direct)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if let Err(err) = Grid::new(self.grid.n, self.grid.half_width) {
            return bad(format!("grid: {err}"));
        }
        if self.h.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return bad("every h must lie in (0, 1)".into());
        }
        if !(self.eps > 0.0) || !(self.gamma > 0.0) {
            return bad("eps and gamma must be positive".into());
        }
        if !matches!(self.model.growth, 1 | 2) {
            return bad(format!("model.growth must be 1 or 2, got {}", self.model.growth));
        }
        if let Some(r) = self.match_radius {
            if !(r > 0.0 && r < self.grid.half_width) {
                return bad("match_radius must lie inside the grid".into());
            }
        }
        let needs_h = matches!(self.kind(), ExperimentKind::Cgo | ExperimentKind::Carleman | ExperimentKind::Identify);
        if needs_h && self.h.len() < 2 {
            return bad(format!("`{}` needs at least two h values", self.kind().name()));
        }
        if matches!(self.kind(), ExperimentKind::Identify | ExperimentKind::Uniqueness) && self.probes.is_empty() {
            return bad("probes must not be empty".into());
        }
        if self.functions == 0 {
            return bad("functions must be positive".into());
        }
        self.surface()?;
        Ok(())
    }

    fn surface(&self) -> Result<SurfaceModel> {
        SurfaceModel::new(self.model.punctures.iter().map(|&p| c(p)).collect()).map_err(|e| Error::Config(e.to_string()))
    }

    fn grid(&self) -> Grid {
        Grid::new(self.grid.n, self.grid.half_width).expect("validated")
    }

    fn match_radius(&self) -> f64 {
        self.match_radius.unwrap_or(0.75 * self.grid.half_width)
    }

    /// The configuration with every default filled in.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

/// One pass/fail line of a run summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }
}

/// Everything a run produces, written only once the run has finished.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
}

impl RunOutput {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    fn dump(&mut self, name: &str, field: &Field) -> Result<()> {
        let mut buf = Vec::new();
        write_cgf1(field, &mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("check,value,threshold,pass\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{:.6e},{:.6e},{}", c.name, c.value, c.threshold, c.pass);
        }
        s
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

fn e(x: f64) -> String {
    format!("{x:.15e}")
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>, out: &mut Vec<u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the pipeline of `cfg.kind` in memory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.kind() {
        ExperimentKind::Direct => run_direct(cfg),
        ExperimentKind::Cgo => run_cgo(cfg),
        ExperimentKind::Carleman => run_carleman(cfg),
        ExperimentKind::Identify => run_identify(cfg),
        ExperimentKind::Paleywiener => run_paleywiener(cfg),
        ExperimentKind::Uniqueness => run_uniqueness(cfg),
    }
}

fn run_direct(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.surface()?;
    if !model.is_plane() {
        return Err(Error::UnsupportedModel("direct scattering is implemented on the plane model".into()));
    }
    let grid = cfg.grid();
    let v = cfg.potential.sample(grid, &model);
    let s = extract_s_matrix(&v, cfg.lambda, cfg.m_max, cfg.match_radius())?;
    let mut out = RunOutput::default();
    out.csv("s_matrix.csv", |b| s.write_csv(b))?;
    out.dump("potential.cgf1", &v)?;
    out.checks.push(Check::at_most("unitarity_defect", s.unitarity_defect(), 1e-2));
    out.checks.push(Check::at_most("fit_residual", s.max_fit_residual, 1e-6));
    if cfg.potential == Potential::Zero {
        let m = cfg.m_max as i64;
        let mut worst: f64 = 0.0;
        for mo in -m..=m {
            for mi in -m..=m {
                let want = if mo == mi { Complex64::new(0.0, if mi % 2 == 0 { 1.0 } else { -1.0 }) } else { Complex64::default() };
                worst = worst.max((s.entry(mo, mi) - want).norm());
            }
        }
        out.checks.push(Check::at_most("free_diagonal", worst, 1e-3));
    }
    Ok(out)
}

fn run_cgo(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.surface()?;
    let keys = ["conjugated_residual", "xJ_r1", "weighted_r2", "pde_residual_relative"];
    let mut h_values = cfg.h.clone();
    h_values.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    let mut last = None;
    for &h in &h_values {
        let mut cc = CgoConfig::new(c(cfg.point), cfg.lambda, h);
        cc.eps = cfg.eps;
        cc.seed = cfg.seed;
        let sol = assemble_cgo(&model, &cfg.potential, &cc)?;
        rows.push(keys.map(|k| sol.norm(k)));
        last = Some(sol);
    }
    let mut out = RunOutput::default();
    out.csv("cgo_norms.csv", |b| {
        let body = h_values.iter().zip(&rows).map(|(&h, r)| std::iter::once(e(h)).chain(r.iter().map(|&x| e(x))).collect());
        table(&["h", keys[0], keys[1], keys[2], keys[3]], body, b)
    })?;
    if let Some(sol) = &last {
        out.dump("amplitude.cgf1", &sol.amplitude_total())?;
    }
    let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let log_h: Vec<f64> = h_values.iter().map(|h| h.ln().abs()).collect();
    let conj: Vec<f64> = col(0).iter().zip(&log_h).map(|(r, l)| r / l).collect();
    out.checks.push(Check::at_least("conjugated_residual_slope", loglog_slope(&h_values, &conj), 0.85));
    out.checks.push(Check::at_least("xJ_r1_slope", loglog_slope(&h_values, &col(1)), 0.9));
    out.checks.push(Check::at_least("weighted_r2_slope", loglog_slope(&h_values, &col(2)), 1.4));
    Ok(out)
}

fn run_carleman(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.surface()?;
    let j = cfg.model.growth;
    let phase = construct_phase(c(cfg.point), &model, j, cfg.seed)?;
    let mut cc = CarlemanConfig::new(j, cfg.model.delta, cfg.lambda, cfg.eps, cfg.h.clone(), cfg.seed);
    cc.tests = cfg.functions;
    let rep = carleman_sweep(&model, &phase, &cfg.potential, &cc)?;
    let mut out = RunOutput::default();
    out.csv("carleman.csv", |b| rep.write_csv(b))?;
    out.checks.push(Check::at_most("constant_stability", rep.stability, cc.stability_factor));
    Ok(out)
}

fn run_identify(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let model = cfg.surface()?;
    let opts = IdentifyOptions { lambda: cfg.lambda, seed: cfg.seed, cross_terms: false, ..IdentifyOptions::default() };
    let reports = cfg
        .probes
        .iter()
        .map(|&p| pointwise_difference(&cfg.potential, &cfg.reference, c(p), &model, cfg.model.growth, &cfg.h, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut out = RunOutput::default();
    out.csv("probes.csv", |b| write_probe_csv(&reports, b))?;
    let worst = reports.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    out.checks.push(Check::at_most("probe_relative_error", worst, 0.05));
    let p = c(cfg.probes[0]);
    let phase = construct_phase(p, &model, cfg.model.growth, cfg.seed)?;
    let a = construct_amplitude(p, &phase.other_critical_points(), opts.vanishing_order)?;
    let k = stationary_phase_constant(&phase, &a, &model)?;
    out.checks.push(Check::at_most("constant_oracle_difference", k.relative_difference, 1e-2));
    Ok(out)
}

fn run_paleywiener(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let grid = cfg.grid();
    let gamma = cfg.gamma;
    let mut bound_rows = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..cfg.functions as u64 {
        let f = random_gaussian_class(grid, gamma, cfg.seed + k);
        for &eta in &cfg.eta {
            let s = complex_fourier(&f, eta, gamma)?;
            worst = worst.max(s.bound_ratio()).max(s.sup_ratio());
            bound_rows.push(vec![(cfg.seed + k).to_string(), e(eta[0]), e(eta[1]), e(s.bound_ratio()), e(s.sup_ratio())]);
        }
    }
    let mut division_rows = Vec::new();
    let (mut round_trip, mut min_decay): (f64, f64) = (0.0, f64::INFINITY);
    for k in 0..cfg.functions.min(2) as u64 {
        let u = random_gaussian_class(grid, gamma, cfg.seed + k);
        let d = sphere_division(&apply_symbol(&u, cfg.lambda), cfg.lambda, gamma)?;
        let err = (&d.g - &u).max_abs() / u.max_abs();
        round_trip = round_trip.max(err);
        min_decay = min_decay.min(d.decay_rate);
        division_rows.push(vec![(cfg.seed + k).to_string(), e(err), e(d.decay_rate), d.band_points.to_string()]);
    }
    let mut out = RunOutput::default();
    out.csv("bounds.csv", |b| table(&["seed", "eta1", "eta2", "l2_ratio", "sup_ratio"], bound_rows, b))?;
    out.csv("division.csv", |b| table(&["seed", "round_trip_error", "decay_rate", "band_points"], division_rows, b))?;
    out.checks.push(Check::at_most("bound_ratio", worst, 1.0));
    out.checks.push(Check::at_most("round_trip_error", round_trip, 1e-5));
    out.checks.push(Check::at_least("decay_rate", min_decay, 0.9 * gamma));
    Ok(out)
}

fn run_uniqueness(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if !cfg.surface()?.is_plane() {
        return Err(Error::UnsupportedModel("the uniqueness chain runs on the plane model".into()));
    }
    let probes: Vec<Complex64> = cfg.probes.iter().map(|&p| c(p)).collect();
    let probe_h = if cfg.h.len() >= 2 { cfg.h.clone() } else { vec![0.16, 0.08, 0.04, 0.02] };
    let budget = ChainBudget {
        scattering_grid: cfg.grid(),
        m_max: cfg.m_max,
        match_radius: cfg.match_radius(),
        probe_h,
        cgo_h: Vec::new(),
    };
    let rep = uniqueness_chain(&cfg.potential, &cfg.reference, cfg.lambda, &probes, &budget)?;
    let mut out = RunOutput::default();
    out.csv("probes.csv", |b| write_probe_csv(&rep.probes, b))?;
    let (lhs, rhs) = rep.identity;
    out.csv("chain.csv", |b| {
        let rows = vec![
            vec!["s_difference".into(), e(rep.s_difference)],
            vec!["unitarity_defect_1".into(), e(rep.unitarity_defects.0)],
            vec!["unitarity_defect_2".into(), e(rep.unitarity_defects.1)],
            vec!["identity_volume_re".into(), e(lhs.re)],
            vec!["identity_volume_im".into(), e(lhs.im)],
            vec!["identity_boundary_re".into(), e(rhs.re)],
            vec!["identity_boundary_im".into(), e(rhs.im)],
        ];
        table(&["quantity", "value"], rows, b)
    })?;
    let identity_gap = (lhs - rhs).norm() / (lhs.norm() + rhs.norm()).max(1e-300);
    let scale = (lhs.norm() + rhs.norm()).max(f64::MIN_POSITIVE);
    out.checks.push(Check::at_most("unitarity_defect", rep.unitarity_defects.0.max(rep.unitarity_defects.1), 1e-2));
    out.checks.push(Check::at_most("identity_gap", if scale < 1e-12 { 0.0 } else { identity_gap }, 5e-2));
    out.checks.push(Check::at_most("probe_relative_error", rep.max_probe_error(), 0.05));
    Ok(out)
}

/// Writes the outputs of a finished run together with the resolved config and version.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.resolved.toml"), cfg.resolved_toml())?;
    fs::write(dir.join("VERSION"), format!("{VERSION}\n"))?;
    for (name, bytes) in &out.files {
        fs::write(dir.join(name), bytes)?;
    }
    fs::write(dir.join("summary.csv"), out.summary_csv())?;
    Ok(())
}

/// Writes the resolved config, version and a diagnostic report of a failed run.
pub fn write_failure(dir: &Path, cfg: &ExperimentConfig, err: &Error) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.resolved.toml"), cfg.resolved_toml())?;
    fs::write(dir.join("VERSION"), format!("{VERSION}\n"))?;
    fs::write(dir.join("diagnostics.txt"), format!("kind: {}\nerror: {err}\n", cfg.kind().name()))?;
    Ok(())
}

/// Exit status of an experiment invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Numerical = 1,
    Schema = 2,
}

/// Parse, run and write; the single entry point used by the binary and the FFI.
pub fn run_experiment(kind: ExperimentKind, config: &Path, seed: Option<u64>, out_dir: Option<&Path>) -> (ExitStatus, String) {
    let mut cfg = match ExperimentConfig::from_path(config, kind) {
        Ok(c) => c,
        Err(err) => return (ExitStatus::Schema, err.to_string()),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(d) = out_dir {
        cfg.output = Some(d.to_path_buf());
    }
    let Some(dir) = cfg.output.clone() else {
        return (ExitStatus::Schema, Error::Config("no output directory: set `output` or pass --out".into()).to_string());
    };
    match run(&cfg) {
        Ok(out) => match write_outputs(&dir, &cfg, &out) {
            Ok(()) => {
                let status = if out.pass() { "pass" } else { "fail" };
                (ExitStatus::Success, format!("{}: {status}\n{}", kind.name(), out.summary_csv()))
            }
            Err(err) => (ExitStatus::Numerical, err.to_string()),
        },
        Err(err) => {
            let _ = write_failure(&dir, &cfg, &err);
            (ExitStatus::Numerical, err.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_lambda_is_a_schema_error() {
        let err = ExperimentConfig::parse("seed = 1\n", ExperimentKind::Direct).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("lambda = 1.0\nlambada = 2\n", ExperimentKind::Direct).is_err());
    }

    #[test]
    fn kind_must_agree() {
        assert!(ExperimentConfig::parse("kind = \"cgo\"\nlambda = 1.0\n", ExperimentKind::Direct).is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let text = "lambda = 1.5\n[potential]\nfamily = \"gaussianBump\"\ncenter = [0.1, 0.2]\nwidth = 0.5\namplitude = 1.0\n";
        let cfg = ExperimentConfig::parse(text, ExperimentKind::Direct).unwrap();
        let again = ExperimentConfig::parse(&cfg.resolved_toml(), ExperimentKind::Direct).unwrap();
        assert_eq!(cfg, again);
    }
}

//! Experiment configuration: a TOML document with a top-level `kind` and one
//! section named after it.
//!
//! Criticality experiments are dimensionless (ω̃ = 1). Dynamics experiments
//! take ordinary frequencies in MHz or GHz and times in ns; the unit is part
//! of every key name and the conversion to angular units happens here.

use std::collections::BTreeSet;
use std::fmt;

use aqrm_core::criticality::{CollapseKind, CriticalOptions, FsMethod, FsOptions, PeakOptions, DEFAULT_ETAS, X_WINDOW};
use aqrm_core::dynamics::{EvolutionMode, GridSpec, Integrator, Measurement, Outcome, PropagateOptions};
use aqrm_core::models::{drives_for_aqrm, AqrmParams, CircuitParams, DegenerateParams, Drive, MAX_DEGENERATE_QUBITS};
use aqrm_core::spectra::CutoffPolicy;
use aqrm_core::units::{ghz, mhz, with_energy_scale};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SweepFs,
    Scaling,
    Cumulant,
    Collapse,
    Dynamics,
    Wigner,
    Cat,
    Gate,
}

impl Kind {
    pub fn section(self) -> &'static str {
        match self {
            Kind::SweepFs => "sweep-fs",
            Kind::Scaling => "scaling",
            Kind::Cumulant => "cumulant",
            Kind::Collapse => "collapse",
            Kind::Dynamics => "dynamics",
            Kind::Wigner => "wigner",
            Kind::Cat => "cat",
            Kind::Gate => "gate",
        }
    }

    fn is_criticality(self) -> bool {
        matches!(self, Kind::SweepFs | Kind::Scaling | Kind::Cumulant | Kind::Collapse)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.section())
    }
}

/// Either an explicit list or `{ start, stop, points }` (inclusive, evenly spaced).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range(Linspace),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range(r) if r.points == 1 => vec![r.start],
            Grid::Range(r) => {
                (0..r.points).map(|i| r.start + (r.stop - r.start) * i as f64 / (r.points - 1) as f64).collect()
            }
        }
    }

    fn check(&self, path: &str, min_points: usize, issues: &mut Issues) {
        if let Grid::Range(r) = self {
            if !(r.start.is_finite() && r.stop.is_finite()) {
                issues.push(path, "range ends must be finite");
                return;
            }
        }
        let v = self.values();
        if v.is_empty() {
            issues.push(path, "grid is empty");
        } else if v.len() < min_points {
            issues.push(path, format!("grid needs at least {min_points} points, got {}", v.len()));
        } else if v.iter().any(|x| !x.is_finite()) {
            issues.push(path, "grid values must be finite");
        } else if v.windows(2).any(|w| !(w[1] > w[0])) {
            issues.push(path, "grid must be strictly ascending");
        }
    }
}

fn default_cutoff_policy() -> CutoffPolicy {
    CutoffPolicy::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Seed for every random choice the experiment makes.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; the command line and `AQRM_JOBS` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Truncation policy for criticality experiments.
    #[serde(default = "default_cutoff_policy")]
    pub cutoff: CutoffPolicy,
    #[serde(default, rename = "sweep-fs", skip_serializing_if = "Option::is_none")]
    pub sweep_fs: Option<SweepFs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulant: Option<Cumulant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse: Option<Collapse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<Dynamics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<Wigner>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cat: Option<Cat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<Gate>,
}

fn default_step() -> f64 {
    FsOptions::default().step
}
fn default_richardson() -> f64 {
    FsOptions::default().richardson_tol
}
fn default_refinements() -> usize {
    FsOptions::default().max_refinements
}

/// χ_F settings shared by the susceptibility experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsSettings {
    #[serde(default)]
    pub method: FsMethod,
    /// Overlap stencil step in units of g̃_c.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_richardson")]
    pub richardson_tol: f64,
    #[serde(default = "default_refinements")]
    pub max_refinements: usize,
}

impl Default for FsSettings {
    fn default() -> Self {
        FsSettings {
            method: FsMethod::default(),
            step: default_step(),
            richardson_tol: default_richardson(),
            max_refinements: default_refinements(),
        }
    }
}

impl FsSettings {
    pub fn options(&self, cutoff: CutoffPolicy) -> FsOptions {
        FsOptions {
            method: self.method,
            step: self.step,
            richardson_tol: self.richardson_tol,
            max_refinements: self.max_refinements,
            cutoff,
        }
    }

    fn check(&self, path: &str, issues: &mut Issues) {
        if !(self.step > 0.0 && self.step < 0.1) {
            issues.push(&format!("{path}.step"), "stencil step must lie in (0, 0.1) g_c");
        }
        if !(self.richardson_tol > 0.0) {
            issues.push(&format!("{path}.richardson_tol"), "must be positive");
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFs {
    pub etas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Couplings in units of g̃_c.
    pub ratios: Grid,
    #[serde(default)]
    pub fs: FsSettings,
}

fn default_etas() -> Vec<f64> {
    DEFAULT_ETAS.to_vec()
}
fn default_bracket() -> [f64; 2] {
    CriticalOptions::default().bracket
}
fn default_scan() -> usize {
    CriticalOptions::default().peak.scan_points
}
fn default_xtol() -> f64 {
    CriticalOptions::default().peak.xtol
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scaling {
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Peak search bracket in units of g̃_c.
    #[serde(default = "default_bracket")]
    pub bracket: [f64; 2],
    #[serde(default = "default_scan")]
    pub scan_points: usize,
    #[serde(default = "default_xtol")]
    pub xtol: f64,
    #[serde(default)]
    pub fs: FsSettings,
}

impl Scaling {
    pub fn options(&self, cutoff: CutoffPolicy) -> CriticalOptions {
        CriticalOptions {
            fs: self.fs.options(cutoff),
            bracket: self.bracket,
            peak: PeakOptions { scan_points: self.scan_points, xtol: self.xtol, ..PeakOptions::default() },
        }
    }
}

fn default_min_ratio() -> f64 {
    1.5
}
fn default_crossing_xtol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cumulant {
    /// `[η̃, λ̃]` pairs.
    pub pairs: Vec<[f64; 2]>,
    /// Couplings in units of g̃_c on which the curves are sampled.
    pub ratios: Grid,
    /// Only curves whose η̃′ differ by at least this factor are crossed.
    #[serde(default = "default_min_ratio")]
    pub min_eta_prime_ratio: f64,
    /// Bisection tolerance on the crossing, in units of g̃_c.
    #[serde(default = "default_crossing_xtol")]
    pub xtol: f64,
}

fn default_half_width() -> f64 {
    X_WINDOW
}
fn default_collapse_points() -> usize {
    41
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Collapse {
    pub pairs: Vec<[f64; 2]>,
    pub d_a: f64,
    pub nu: f64,
    /// A second ν to collapse the same data with, for comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_nu: Option<f64>,
    #[serde(default)]
    pub observable: CollapseKind,
    /// Sampling half-width in the scaling variable.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_collapse_points")]
    pub points: usize,
    #[serde(default)]
    pub fs: FsSettings,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub strength_mhz: f64,
    pub coupling_mhz: f64,
    pub frequency_ghz: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DriveSpec {
    fn drive(&self) -> Drive {
        Drive {
            strength: mhz(self.strength_mhz),
            coupling: mhz(self.coupling_mhz),
            frequency: ghz(self.frequency_ghz),
            phase: self.phase,
        }
    }
}

/// Drives chosen to realise given effective parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub eta: f64,
    pub lambda: f64,
    /// g̃_r / g̃_c.
    pub ratio: f64,
    /// g̃_r in MHz; fixes the energy scale.
    pub g_mhz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub omega_ghz: f64,
    pub omega_q_ghz: f64,
    pub g_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red: Option<DriveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blue: Option<DriveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
}

impl CircuitSpec {
    pub fn circuit(&self) -> CircuitParams {
        let (w, wq, g) = (ghz(self.omega_ghz), ghz(self.omega_q_ghz), mhz(self.g_mhz));
        match (self.red, self.blue, self.target) {
            (Some(r), Some(b), None) => CircuitParams { omega: w, omega_q: wq, g, red: r.drive(), blue: b.drive() },
            (None, None, Some(t)) => {
                let unit = AqrmParams::at_ratio(t.eta, t.lambda, t.ratio);
                let target = with_energy_scale(&unit, mhz(t.g_mhz) / unit.g_r);
                drives_for_aqrm(w, wq, g, &target)
            }
            _ => unreachable!("checked by validation"),
        }
    }

    fn check(&self, path: &str, issues: &mut Issues) {
        for (k, v) in [("omega_ghz", self.omega_ghz), ("omega_q_ghz", self.omega_q_ghz)] {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(&format!("{path}.{k}"), "must be a positive frequency");
            }
        }
        if !(self.g_mhz >= 0.0 && self.g_mhz.is_finite()) {
            issues.push(&format!("{path}.g_mhz"), "must be non-negative");
        }
        match (self.red, self.blue, self.target) {
            (Some(r), Some(b), None) => {
                for (name, d) in [("red", r), ("blue", b)] {
                    let all = [d.strength_mhz, d.coupling_mhz, d.frequency_ghz, d.phase];
                    if all.iter().any(|v| !v.is_finite()) {
                        issues.push(&format!("{path}.{name}"), "drive parameters must be finite");
                    } else if !(d.frequency_ghz > 0.0) {
                        issues.push(&format!("{path}.{name}.frequency_ghz"), "must be positive");
                    }
                }
            }
            (None, None, Some(t)) => {
                if !(t.eta > 0.0 && t.lambda > 0.0 && t.ratio > 0.0 && t.g_mhz > 0.0)
                    || [t.eta, t.lambda, t.ratio, t.g_mhz].iter().any(|v| !v.is_finite())
                {
                    issues.push(&format!("{path}.target"), "eta, lambda, ratio and g_mhz must be positive");
                }
            }
            _ => issues.push(path, "give both `red` and `blue` drives, or a `target` (not both)"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsMode {
    /// Lab-frame circuit and effective model, compared.
    #[default]
    Compare,
    Lab,
    Effective,
}

impl DynamicsMode {
    pub fn lab(self) -> bool {
        self != DynamicsMode::Effective
    }
    pub fn effective(self) -> bool {
        self != DynamicsMode::Lab
    }
}

fn default_records() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dynamics {
    pub circuit: CircuitSpec,
    pub cutoff: usize,
    pub t_end_ns: f64,
    /// Record intervals; the trajectory has `records + 1` samples.
    #[serde(default = "default_records")]
    pub records: usize,
    #[serde(default)]
    pub mode: DynamicsMode,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max_ps: Option<f64>,
}

fn propagate_options(integrator: Integrator, dt_max_ps: Option<f64>) -> PropagateOptions {
    PropagateOptions { method: integrator, dt_max: dt_max_ps.map(|d| d * 1e-12), keep_states: false }
}

impl Dynamics {
    pub fn options(&self) -> PropagateOptions {
        propagate_options(self.integrator, self.dt_max_ps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wigner {
    pub circuit: CircuitSpec,
    pub cutoff: usize,
    /// Snapshot times, ascending.
    pub times_ns: Vec<f64>,
    #[serde(default)]
    pub mode: DynamicsMode,
    pub grid: GridSpec,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max_ps: Option<f64>,
}

impl Wigner {
    pub fn options(&self) -> PropagateOptions {
        propagate_options(self.integrator, self.dt_max_ps).keeping_states()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementChoice {
    #[default]
    Both,
    G,
    E,
    /// One outcome drawn with the top-level seed.
    Sampled,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cat {
    #[serde(default = "one")]
    pub n_qubits: usize,
    pub g_bar_mhz: f64,
    pub delta_mhz: f64,
    #[serde(default)]
    pub phi: f64,
    pub t_ns: f64,
    #[serde(default)]
    pub mode: EvolutionMode,
    #[serde(default)]
    pub measurement: MeasurementChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// Wigner grid for the post-measurement field states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl Cat {
    pub fn params(&self) -> DegenerateParams {
        DegenerateParams { n_qubits: self.n_qubits, g_bar: mhz(self.g_bar_mhz), delta: mhz(self.delta_mhz), phi: self.phi }
    }

    pub fn measurement(&self, seed: u64) -> Measurement {
        match self.measurement {
            MeasurementChoice::Both => Measurement::Both,
            MeasurementChoice::G => Measurement::Fixed { outcome: Outcome::G },
            MeasurementChoice::E => Measurement::Fixed { outcome: Outcome::E },
            MeasurementChoice::Sampled => Measurement::Sampled { seed },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub g_bar_mhz: f64,
    pub delta_mhz: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub mode: EvolutionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl Gate {
    pub fn params(&self) -> DegenerateParams {
        DegenerateParams { n_qubits: 2, g_bar: mhz(self.g_bar_mhz), delta: mhz(self.delta_mhz), phi: self.phi }
    }
}

/// One semantic problem, addressed by its dotted key path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

#[derive(Default)]
struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(Issue { path: path.to_string(), message: message.into() });
    }
}

fn check_list(path: &str, v: &[f64], positive: bool, issues: &mut Issues) {
    if v.is_empty() {
        issues.push(path, "list is empty");
    } else if v.iter().any(|x| !x.is_finite() || (positive && !(*x > 0.0))) {
        issues.push(path, if positive { "values must be positive and finite" } else { "values must be finite" });
    }
}

fn check_pairs(path: &str, pairs: &[[f64; 2]], min: usize, issues: &mut Issues) {
    if pairs.len() < min {
        issues.push(path, format!("need at least {min} (eta, lambda) pairs, got {}", pairs.len()));
    }
    if pairs.iter().any(|[e, l]| !(*e > 0.0 && *l > 0.0 && e.is_finite() && l.is_finite())) {
        issues.push(path, "eta and lambda must be positive (the rescaled eta needs lambda > 0)");
    }
}

fn check_cutoff(path: &str, nc: usize, issues: &mut Issues) {
    if nc < 2 {
        issues.push(path, "field cutoff must be at least 2");
    }
}

fn check_grid_spec(path: &str, g: &GridSpec, issues: &mut Issues) {
    if let Err(e) = g.validate() {
        issues.push(path, e.to_string());
    }
}

impl ExperimentConfig {
    /// Every semantic check that can be made before computing anything.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Issues::default();
        let present: Vec<&str> = [
            ("sweep-fs", self.sweep_fs.is_some()),
            ("scaling", self.scaling.is_some()),
            ("cumulant", self.cumulant.is_some()),
            ("collapse", self.collapse.is_some()),
            ("dynamics", self.dynamics.is_some()),
            ("wigner", self.wigner.is_some()),
            ("cat", self.cat.is_some()),
            ("gate", self.gate.is_some()),
        ]
        .into_iter()
        .filter_map(|(n, p)| p.then_some(n))
        .collect();
        let want = self.kind.section();
        if !present.contains(&want) {
            issues.push("kind", format!("kind `{want}` needs a [{want}] section"));
        }
        for other in present.iter().filter(|s| **s != want) {
            issues.push(other, format!("section [{other}] does not belong to kind `{want}`"));
        }
        if self.jobs == Some(0) {
            issues.push("jobs", "worker count must be at least 1");
        }
        if self.kind.is_criticality() {
            match self.cutoff {
                CutoffPolicy::Fixed { cutoff } if cutoff < 2 => issues.push("cutoff.cutoff", "must be at least 2"),
                CutoffPolicy::Converge { tol, start, cap } => {
                    if !(tol > 0.0) {
                        issues.push("cutoff.tol", "must be positive");
                    }
                    if start < 2 || cap < start {
                        issues.push("cutoff", format!("need 2 <= start <= cap, got start {start}, cap {cap}"));
                    }
                }
                _ => {}
            }
        }
        if let Some(s) = &self.sweep_fs {
            check_list("sweep-fs.etas", &s.etas, true, &mut issues);
            check_list("sweep-fs.lambdas", &s.lambdas, false, &mut issues);
            if s.lambdas.iter().any(|l| !(*l > -1.0)) {
                issues.push("sweep-fs.lambdas", "lambda must exceed -1");
            }
            s.ratios.check("sweep-fs.ratios", 1, &mut issues);
            s.fs.check("sweep-fs.fs", &mut issues);
        }
        if let Some(s) = &self.scaling {
            check_list("scaling.etas", &s.etas, true, &mut issues);
            if s.etas.len() < 3 {
                issues.push("scaling.etas", "an exponent fit needs at least 3 eta values");
            }
            check_list("scaling.lambdas", &s.lambdas, true, &mut issues);
            if !(s.bracket[0] > 0.0 && s.bracket[1] > s.bracket[0]) {
                issues.push("scaling.bracket", "need 0 < lo < hi");
            }
            if s.scan_points < 3 {
                issues.push("scaling.scan_points", "need at least 3");
            }
            if !(s.xtol > 0.0) {
                issues.push("scaling.xtol", "must be positive");
            }
            s.fs.check("scaling.fs", &mut issues);
        }
        if let Some(s) = &self.cumulant {
            check_pairs("cumulant.pairs", &s.pairs, 2, &mut issues);
            s.ratios.check("cumulant.ratios", 2, &mut issues);
            if s.ratios.values().iter().any(|r| *r < 0.0) {
                issues.push("cumulant.ratios", "coupling ratios must be non-negative");
            }
            if !(s.min_eta_prime_ratio >= 1.0) {
                issues.push("cumulant.min_eta_prime_ratio", "must be at least 1");
            }
            if !(s.xtol > 0.0) {
                issues.push("cumulant.xtol", "must be positive");
            }
        }
        if let Some(s) = &self.collapse {
            check_pairs("collapse.pairs", &s.pairs, 2, &mut issues);
            if !s.d_a.is_finite() {
                issues.push("collapse.d_a", "must be finite");
            }
            if !(s.nu > 0.0) {
                issues.push("collapse.nu", "must be positive");
            }
            if let Some(c) = s.contrast_nu {
                if !(c > 0.0) {
                    issues.push("collapse.contrast_nu", "must be positive");
                }
            }
            if !(s.half_width > 0.0 && s.half_width.is_finite()) {
                issues.push("collapse.half_width", "must be positive");
            }
            if s.points < 3 {
                issues.push("collapse.points", "need at least 3 points per curve");
            }
            if s.observable == CollapseKind::Susceptibility {
                s.fs.check("collapse.fs", &mut issues);
            }
        }
        if let Some(s) = &self.dynamics {
            s.circuit.check("dynamics.circuit", &mut issues);
            check_cutoff("dynamics.cutoff", s.cutoff, &mut issues);
            if !(s.t_end_ns > 0.0 && s.t_end_ns.is_finite()) {
                issues.push("dynamics.t_end_ns", "must be positive");
            }
            if s.records == 0 {
                issues.push("dynamics.records", "need at least one record interval");
            }
            if let Some(d) = s.dt_max_ps {
                if !(d > 0.0) {
                    issues.push("dynamics.dt_max_ps", "must be positive");
                }
            }
        }
        if let Some(s) = &self.wigner {
            s.circuit.check("wigner.circuit", &mut issues);
            check_cutoff("wigner.cutoff", s.cutoff, &mut issues);
            if s.times_ns.is_empty() {
                issues.push("wigner.times_ns", "list is empty");
            } else if s.times_ns[0] < 0.0 || s.times_ns.windows(2).any(|w| !(w[1] > w[0])) {
                issues.push("wigner.times_ns", "times must be non-negative and strictly ascending");
            }
            check_grid_spec("wigner.grid", &s.grid, &mut issues);
            if let Some(d) = s.dt_max_ps {
                if !(d > 0.0) {
                    issues.push("wigner.dt_max_ps", "must be positive");
                }
            }
        }
        if let Some(s) = &self.cat {
            if s.n_qubits == 0 || (s.n_qubits > 1 && s.n_qubits % 2 == 1) || s.n_qubits > MAX_DEGENERATE_QUBITS {
                issues.push(
                    "cat.n_qubits",
                    format!("use 1 qubit, or an even number up to {MAX_DEGENERATE_QUBITS}"),
                );
            }
            if !(s.g_bar_mhz >= 0.0) || !s.g_bar_mhz.is_finite() {
                issues.push("cat.g_bar_mhz", "must be non-negative");
            }
            if !s.delta_mhz.is_finite() {
                issues.push("cat.delta_mhz", "must be finite");
            }
            if !(s.t_ns > 0.0 && s.t_ns.is_finite()) {
                issues.push("cat.t_ns", "must be positive");
            }
            if s.n_qubits > 1 && s.measurement != MeasurementChoice::Both {
                issues.push("cat.measurement", "the multi-qubit cat is not measured; leave `both`");
            }
            if let Some(nc) = s.cutoff {
                check_cutoff("cat.cutoff", nc, &mut issues);
            }
            if let Some(g) = &s.grid {
                check_grid_spec("cat.grid", g, &mut issues);
            }
        }
        if let Some(s) = &self.gate {
            if !(s.g_bar_mhz >= 0.0) || !s.g_bar_mhz.is_finite() {
                issues.push("gate.g_bar_mhz", "must be non-negative");
            }
            if !(s.delta_mhz > 0.0 && s.delta_mhz.is_finite()) {
                issues.push("gate.delta_mhz", "the gate needs delta > 0");
            }
            if let Some(nc) = s.cutoff {
                check_cutoff("gate.cutoff", nc, &mut issues);
            }
        }
        issues.0
    }
}

/// Where a configuration came from, for diagnostics.
pub struct Source<'a> {
    pub name: &'a str,
    pub text: &'a str,
    /// Dotted paths set with `--set`.
    pub overridden: BTreeSet<String>,
}

/// A configuration error rendered with file and line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn header_name(line: &str) -> Option<String> {
    let t = line.trim();
    let inner = t.strip_prefix("[[").and_then(|s| s.strip_suffix("]]")).or_else(|| t.strip_prefix('[').and_then(|s| s.split(']').next()))?;
    Some(inner.split('.').map(|p| p.trim().trim_matches('"')).collect::<Vec<_>>().join("."))
}

fn defines_key(line: &str, key: &str) -> bool {
    let t = line.trim_start();
    let Some(rest) = t.strip_prefix(key).or_else(|| t.strip_prefix(&format!("\"{key}\""))) else {
        return false;
    };
    rest.trim_start().starts_with('=')
}

/// 1-based line that defines `path` (a key or a table header). Falls back to
/// the closest enclosing key or table that appears in the text.
pub fn locate(text: &str, path: &str) -> Option<usize> {
    let parts: Vec<&str> = path.split('.').collect();
    for k in (1..=parts.len()).rev() {
        let table = parts[..k - 1].join(".");
        let key = parts[k - 1];
        let full = parts[..k].join(".");
        let mut current = String::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(h) = header_name(line) {
                if h == full {
                    return Some(i + 1);
                }
                current = h;
                continue;
            }
            if current == table && defines_key(line, key) {
                return Some(i + 1);
            }
        }
    }
    None
}

impl Source<'_> {
    fn render_issue(&self, issue: &Issue) -> String {
        if self.overridden.iter().any(|o| issue.path == *o || issue.path.starts_with(&format!("{o}."))) {
            return format!("error: {}: {} (value given with --set)", issue.path, issue.message);
        }
        match locate(self.text, &issue.path) {
            Some(line) => {
                let src = self.text.lines().nth(line - 1).unwrap_or("");
                format!("error: {}: {}\n  --> {}:{line}\n   | {}", issue.path, issue.message, self.name, src.trim_end())
            }
            None => format!("error: {}: {}\n  --> {}", issue.path, issue.message, self.name),
        }
    }
}

/// Split `section.key=value` into the path and a TOML value. Values that do
/// not parse as TOML are taken as strings.
pub fn parse_override(s: &str) -> Result<(Vec<String>, toml::Value), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ConfigError(format!("error: --set `{s}`: expected key=value")))?;
    let path: Vec<String> = k.trim().split('.').map(|p| p.trim().to_string()).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError(format!("error: --set `{s}`: empty key component")));
    }
    let v = v.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {v}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(v.to_string()),
    };
    Ok((path, value))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<(), ConfigError> {
    let mut cur = table;
    for p in &path[..path.len() - 1] {
        let entry = cur.entry(p.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("error: --set {}: `{p}` is not a table", path.join("."))))?;
    }
    cur.insert(path[path.len() - 1].clone(), value);
    Ok(())
}

/// Parse, apply `--set` overrides (which win over the file) and validate.
pub fn load(name: &str, text: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    let mut source = Source { name, text, overridden: BTreeSet::new() };
    let parsed = if overrides.is_empty() {
        toml::from_str::<ExperimentConfig>(text).map_err(|e| ConfigError(format!("error: invalid config {name}\n{e}")))?
    } else {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError(format!("error: invalid config {name}\n{e}")))?;
        for o in overrides {
            let (path, value) = parse_override(o)?;
            apply_override(&mut table, &path, value)?;
            source.overridden.insert(path.join("."));
        }
        toml::Value::Table(table).try_into::<ExperimentConfig>().map_err(|e| {
            // the typed error carries no span once the table has been edited;
            // re-parse the file alone to point at a line when it is the culprit
            match toml::from_str::<ExperimentConfig>(text) {
                Err(fe) if fe.message() == e.message() => ConfigError(format!("error: invalid config {name}\n{fe}")),
                _ => ConfigError(format!("error: invalid config {name} (after --set overrides): {}", e.message())),
            }
        })?
    };
    let issues = parsed.validate();
    if issues.is_empty() {
        Ok(parsed)
    } else {
        Err(ConfigError(issues.iter().map(|i| source.render_issue(i)).collect::<Vec<_>>().join("\n")))
    }
}

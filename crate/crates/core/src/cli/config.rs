//! TOML run configuration. Every section and field is optional; missing
//! values take the defaults below. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates_lab::{default_dilations, DataFamily, FamilyKind};
use crate::exponents::{parse_rational, ProblemParams, Rational, SelectionPolicy};
use crate::solver::SolverConfig;

/// Environment variable that replaces `output_dir` from the config file.
pub const OUT_DIR_ENV: &str = "RADNLS_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Seed for randomized sampling.
    pub seed: u64,
    /// Never part of the manifest, so reruns into different directories agree.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub duhamel: DuhamelSection,
    pub solve: SolveSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("radnls-out"),
            problem: ProblemSection::default(),
            grid: GridSection::default(),
            sweep: SweepSection::default(),
            duhamel: DuhamelSection::default(),
            solve: SolveSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies the output-directory environment override, if set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    pub fn problem_params(&self) -> Result<ProblemParams> {
        self.problem.params()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    Midpoint,
    TwoOverQ0,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub n: u32,
    /// Exact power, e.g. `"11/5"` or `"2.2"`.
    pub p: String,
    /// `[re, im]`.
    pub lambda: [f64; 2],
    pub policy: PolicyName,
    /// Required with `policy = "two-over-q0"`.
    pub two_over_q0: Option<String>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { n: 3, p: "11/5".into(), lambda: [1.0, 0.0], policy: PolicyName::Midpoint, two_over_q0: None }
    }
}

impl ProblemSection {
    pub fn power(&self) -> Result<Rational> {
        parse_rational(&self.p)
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.n, self.power()?, Complex64::new(self.lambda[0], self.lambda[1]))
    }

    pub fn policy(&self) -> Result<SelectionPolicy> {
        match (self.policy, &self.two_over_q0) {
            (PolicyName::Midpoint, None) => Ok(SelectionPolicy::Midpoint),
            (PolicyName::Midpoint, Some(_)) => {
                Err(Error::Config("two_over_q0 is only used with policy = \"two-over-q0\"".into()))
            }
            (PolicyName::TwoOverQ0, Some(v)) => Ok(SelectionPolicy::TwoOverQ0(parse_rational(v)?)),
            (PolicyName::TwoOverQ0, None) => {
                Err(Error::Config("policy = \"two-over-q0\" needs a two_over_q0 value".into()))
            }
        }
    }
}

/// Radial grid for the sweep and Duhamel commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nodes: usize,
    pub radius: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { nodes: crate::radial_transform::DEFAULT_NODES, radius: crate::radial_transform::DEFAULT_RADIUS }
    }
}

impl GridSection {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::Config(format!("grid.nodes = {} is too small", self.nodes)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("grid.radius = {} must be positive", self.radius)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TripleChoice {
    /// `(q0, alpha0, s0)`.
    Primary,
    /// `(q1, alpha1, -s0)`.
    Dual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub families: Vec<String>,
    pub dilations: Vec<f64>,
    /// Per-family `[param1, param2]` lists replacing the built-in members.
    pub members: BTreeMap<String, Vec<[f64; 2]>>,
    pub triple: TripleChoice,
    /// Exact shift added to alpha; nonzero values break the scaling balance.
    pub alpha_shift: String,
    pub two_sided: bool,
    /// Time horizon; absent means all of `R`.
    pub horizon: Option<f64>,
    pub dilation_tolerance: f64,
    pub slope_tolerance: f64,
    pub pointwise: PointwiseSection,
    pub kernel: KernelSection,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            families: FamilyKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            dilations: default_dilations(),
            members: BTreeMap::new(),
            triple: TripleChoice::Primary,
            alpha_shift: "0".into(),
            two_sided: true,
            horizon: None,
            dilation_tolerance: 0.02,
            slope_tolerance: 0.10,
            pointwise: PointwiseSection::default(),
            kernel: KernelSection::default(),
        }
    }
}

impl SweepSection {
    pub fn data_families(&self) -> Result<Vec<DataFamily>> {
        if self.families.is_empty() {
            return Err(Error::Config("sweep.families is empty".into()));
        }
        for key in self.members.keys() {
            if !self.families.iter().any(|f| f == key) {
                return Err(Error::Config(format!("sweep.members.{key} names a family that is not swept")));
            }
        }
        self.families
            .iter()
            .map(|name| {
                let kind: FamilyKind = name.parse()?;
                let members = match self.members.get(name) {
                    Some(list) => list.iter().map(|m| (m[0], m[1])).collect(),
                    None => kind.default_members(),
                };
                DataFamily::new(kind, members, self.dilations.clone())
            })
            .collect()
    }

    pub fn alpha_shift(&self) -> Result<Rational> {
        parse_rational(&self.alpha_shift)
    }

    pub fn validate(&self) -> Result<()> {
        self.data_families()?;
        self.alpha_shift()?;
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("sweep.horizon = {h} must be positive")));
            }
        }
        if !(self.dilation_tolerance > 0.0 && self.slope_tolerance > 0.0) {
            return Err(Error::Config("sweep tolerances must be positive".into()));
        }
        self.pointwise.validate()?;
        self.kernel.validate()
    }
}

/// Sampled check of `r^{n/2-s}|U(t)φ(r)| ≤ C ‖|D|^s φ‖_{L²}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointwiseSection {
    pub enabled: bool,
    pub families: Vec<String>,
    pub s: f64,
    /// Times sampled in `[-horizon/μ², horizon/μ²]`.
    pub horizon: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for PointwiseSection {
    fn default() -> Self {
        Self {
            enabled: true,
            families: vec!["gaussian".into(), "bump".into()],
            s: 1.0,
            horizon: 2.0,
            samples: 201,
            tolerance: 0.02,
        }
    }
}

impl PointwiseSection {
    fn validate(&self) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        for f in &self.families {
            f.parse::<FamilyKind>()?;
        }
        if !(self.horizon > 0.0) || self.samples < 2 || !(self.tolerance > 0.0) {
            return Err(Error::Config("sweep.pointwise needs horizon > 0, samples >= 2, tolerance > 0".into()));
        }
        Ok(())
    }
}

/// Truncated integrals of the weighted surface-measure transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub enabled: bool,
    pub cutoffs: Vec<f64>,
    /// Weights to test; empty means the window midpoint, its lower end, and
    /// 0.1 below it.
    pub alphas: Vec<f64>,
    /// Largest relative change per cutoff step accepted as converged.
    pub stable_tolerance: f64,
    /// Smallest relative change per step accepted as divergence.
    pub growth_threshold: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self {
            enabled: true,
            cutoffs: vec![32.0, 64.0, 128.0],
            alphas: Vec::new(),
            stable_tolerance: 0.01,
            growth_threshold: 0.10,
        }
    }
}

impl KernelSection {
    fn validate(&self) -> Result<()> {
        if self.enabled && (self.cutoffs.len() < 2 || self.cutoffs.windows(2).any(|w| !(w[1] > w[0] && w[0] > 1.0))) {
            return Err(Error::Config("sweep.kernel.cutoffs must be at least two increasing values above 1".into()));
        }
        Ok(())
    }
}

/// Separable forcing `F(τ, r) = A·b(τ/L)·exp(-r²/(2w²))` with `b` a smooth
/// bump on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DuhamelSection {
    pub amplitude: f64,
    pub width: f64,
    pub duration: f64,
    pub time_step: f64,
    /// Also run on a grid with twice the nodes and half the time step.
    pub refine: bool,
    /// Parabolic rescalings compared against the unscaled run.
    pub dilations: Vec<f64>,
    pub tolerance: f64,
}

impl Default for DuhamelSection {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            width: 1.0,
            duration: 1.0,
            time_step: 0.01,
            refine: true,
            dilations: vec![0.5, 2.0],
            tolerance: 0.03,
        }
    }
}

impl DuhamelSection {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("duhamel.{name} = {v} must be positive")))
            }
        };
        positive("width", self.width)?;
        positive("duration", self.duration)?;
        positive("time_step", self.time_step)?;
        positive("tolerance", self.tolerance)?;
        if !self.amplitude.is_finite() {
            return Err(Error::Config("duhamel.amplitude must be finite".into()));
        }
        if self.time_step > self.duration {
            return Err(Error::Config("duhamel.time_step exceeds the duration".into()));
        }
        for &mu in &self.dilations {
            positive("dilations", mu)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub family: String,
    /// Defaults to the family's first built-in member.
    pub member: Option<[f64; 2]>,
    /// Data are rescaled to this `‖|D|^{-s0}φ‖_{L²}`; defaults to `solver.delta`.
    pub data_norm: Option<f64>,
    /// Re-solve on a doubled horizon and compare the measured constant.
    pub doubling_check: bool,
    pub doubling_tolerance: f64,
    pub splitting_check: bool,
    pub splitting_tolerance: f64,
    /// Time at which the two solvers are compared.
    pub check_time: f64,
    /// Search for the largest δ whose contraction ratio stays below 1/2.
    pub bisect: bool,
    pub bisect_steps: usize,
    pub lipschitz_samples: usize,
    pub solver: SolverConfig,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            family: "gaussian".into(),
            member: None,
            data_norm: None,
            doubling_check: true,
            doubling_tolerance: 0.05,
            splitting_check: true,
            splitting_tolerance: 1e-3,
            check_time: 1.0,
            bisect: false,
            bisect_steps: 8,
            lipschitz_samples: 1000,
            solver: SolverConfig::default(),
        }
    }
}

impl SolveSection {
    pub fn family_kind(&self) -> Result<FamilyKind> {
        self.family.parse()
    }

    pub fn member(&self) -> Result<(f64, f64)> {
        let kind = self.family_kind()?;
        let m = match self.member {
            Some([a, b]) => (a, b),
            None => kind.default_members()[0],
        };
        kind.check_member(m.0, m.1)?;
        Ok(m)
    }

    pub fn data_norm(&self) -> f64 {
        self.data_norm.unwrap_or(self.solver.delta)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.member()?;
        let norm = self.data_norm();
        if !(norm >= 0.0 && norm.is_finite()) {
            return Err(Error::Config(format!("solve.data_norm = {norm} must be nonnegative")));
        }
        if norm > self.solver.delta * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "solve.data_norm = {norm} exceeds the smallness bound solver.delta = {}",
                self.solver.delta
            )));
        }
        if !(self.check_time >= 0.0 && self.check_time <= self.solver.horizon) {
            return Err(Error::Config("solve.check_time must lie in [0, solver.horizon]".into()));
        }
        if self.bisect && self.bisect_steps == 0 {
            return Err(Error::Config("solve.bisect_steps must be positive".into()));
        }
        Ok(())
    }
}

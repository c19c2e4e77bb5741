//! Scenario files: one JSON document describing the system, the two-site
//! scenario, and per-command run options.

use std::path::Path;

use fermi_lattice_core::dressing::DressingScheme;
use fermi_lattice_core::kernels::KernelMethod;
use fermi_lattice_core::modes::{build_harmonic_chain, build_ion_trap};
use fermi_lattice_core::quadrature::QuadratureOptions;
use fermi_lattice_core::{ChainParams, ModeBasis, Scenario, TrapParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKindTag {
    Chain,
    Trap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: SystemKindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapParams>,
}

impl SystemSpec {
    pub fn check(&self) -> Result<(), CliError> {
        match (self.kind, &self.chain, &self.trap) {
            (SystemKindTag::Chain, Some(_), None) | (SystemKindTag::Trap, None, Some(_)) => Ok(()),
            (kind, _, _) => Err(CliError::Schema(format!(
                "system of kind {kind:?} needs exactly the matching `{}` block",
                match kind {
                    SystemKindTag::Chain => "chain",
                    SystemKindTag::Trap => "trap",
                }
            ))),
        }
    }

    pub fn basis(&self) -> Result<ModeBasis, CliError> {
        self.check()?;
        let basis = match (self.chain, self.trap) {
            (Some(c), _) => build_harmonic_chain(c),
            (_, Some(t)) => build_ion_trap(t),
            _ => unreachable!("checked above"),
        };
        Ok(basis?)
    }

    /// The same system with a different number of chain sites.
    pub fn with_sites(&self, n: usize) -> Result<SystemSpec, CliError> {
        match self.chain {
            Some(c) => Ok(SystemSpec {
                chain: Some(ChainParams { n_sites: n, ..c }),
                ..self.clone()
            }),
            None => Err(CliError::Usage("size sweeps need a chain system".into())),
        }
    }
}

/// Evenly spaced values `start..=stop`, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Linspace { start: f64, stop: f64, count: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match *self {
            Grid::Linspace { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
            Grid::Values(ref v) => v.clone(),
        };
        if v.is_empty() {
            return Err(CliError::Usage("grid is empty".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Usage("grid values must be finite".into()));
        }
        Ok(v)
    }
}

/// Integers `start..=stop` in steps of `step`, or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntList {
    Range { start: usize, stop: usize, step: usize },
    Values(Vec<usize>),
}

impl IntList {
    pub fn values(&self) -> Result<Vec<usize>, CliError> {
        let v: Vec<usize> = match *self {
            IntList::Range { step: 0, .. } => return Err(CliError::Usage("range step must be > 0".into())),
            IntList::Range { start, stop, step } => (start..=stop).step_by(step).collect(),
            IntList::Values(ref v) => v.clone(),
        };
        if v.is_empty() {
            return Err(CliError::Usage("integer list is empty".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    #[default]
    ClosedForm,
    Quadrature,
}

impl KernelChoice {
    pub fn method(self) -> KernelMethod {
        match self {
            KernelChoice::ClosedForm => KernelMethod::ClosedForm,
            KernelChoice::Quadrature => KernelMethod::Quadrature(QuadratureOptions::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalityMode {
    #[default]
    Trace,
    DistanceSweep,
    SizeSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightconeRun {
    pub tau_max: f64,
    #[serde(default = "default_lightcone_samples")]
    pub n_samples: usize,
}

fn default_lightcone_samples() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CausalityRun {
    pub mode: CausalityMode,
    /// `trace` and `size_sweep`.
    pub taus: Option<Grid>,
    /// `distance_sweep`.
    pub tau: Option<f64>,
    /// `distance_sweep`; defaults to `1..=N/2`.
    pub distances: Option<IntList>,
    /// `size_sweep`.
    pub sizes: Option<IntList>,
    /// `size_sweep`: `R = round(fraction·N)`.
    pub distance_fraction: Option<f64>,
    pub lightcone: Option<LightconeRun>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BareRun {
    pub times: Option<Grid>,
    pub kernel: KernelChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DressedTable {
    #[default]
    Probability,
    StaticDressing,
    GMin,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DressedRun {
    pub table: DressedTable,
    pub times: Option<Grid>,
    pub schemes: Option<Vec<DressingScheme>>,
    pub kernel: KernelChoice,
    /// `static_dressing`; defaults to `1..=N/2`.
    pub distances: Option<IntList>,
    /// `g_min`.
    pub sizes: Option<IntList>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ion2Run {
    /// Defaults to the two trap mode frequencies.
    pub omega0: Option<f64>,
    pub omega1: Option<f64>,
    /// Pulse areas; when absent they are derived from the scenario, or
    /// default to 1 without one.
    pub alpha_a: Option<f64>,
    pub alpha_b: Option<f64>,
    /// Equal-pulse scan of `α`.
    pub alpha_scan: Option<Grid>,
    /// Schmidt terms kept in the full series; off when absent.
    pub schmidt_cutoff: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudComponent {
    #[default]
    Total,
    Up,
    Down,
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloudRun {
    pub times: Option<Grid>,
    pub scheme: DressingScheme,
    pub component: CloudComponent,
    pub kernel: KernelChoice,
}

impl Default for CloudRun {
    fn default() -> Self {
        CloudRun {
            times: None,
            scheme: DressingScheme::Bare,
            component: CloudComponent::Total,
            kernel: KernelChoice::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleRun {
    pub epsilons: Option<Vec<f64>>,
    pub start_cutoff: usize,
    pub max_cutoff: usize,
    pub cutoff_tol: f64,
    pub step_fraction: f64,
}

impl Default for OracleRun {
    fn default() -> Self {
        let d = fermi_lattice_core::oracle::OracleOptions::default();
        OracleRun {
            epsilons: None,
            start_cutoff: d.start_cutoff,
            max_cutoff: d.max_cutoff,
            cutoff_tol: d.cutoff_tol,
            step_fraction: d.step_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunOptions {
    pub causality: CausalityRun,
    pub bare: BareRun,
    pub dressed: DressedRun,
    pub ion2: Ion2Run,
    pub cloud: CloudRun,
    pub oracle: OracleRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub run: RunOptions,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile, CliError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| {
            CliError::Schema(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        file.system.check()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        ScenarioFile::parse(&text)
    }

    pub fn scenario(&self) -> Result<&Scenario, CliError> {
        self.scenario
            .as_ref()
            .ok_or_else(|| CliError::Schema("this command needs a `scenario` block".into()))
    }

    /// SHA-256 of the parsed document re-serialized in canonical field
    /// order, so whitespace, key order and number spelling do not matter.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario files always serialize");
        hex::encode(Sha256::digest(&canonical))
    }
}

//! Run configuration: a TOML file with nested sections; complex numbers are
//! written as [re, im] pairs.

use qmemnet::linsys::PassiveLinearSystem;
use qmemnet::presets::{self, AtomicNetworkParams};
use qmemnet::{C64, CMatrix, CVector};
use serde::{Deserialize, Serialize};

use crate::CmdError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CmdError> {
        toml::from_str(text).map_err(|e| CmdError::usage(format!("config error: {e}")))
    }
}

/// Simulation frame for the atomic network: raw node modes, or the frame in
/// which the memory pair occupies the trailing coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Node,
    Primed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `single-mode`, `atomic-network`, or `active-opo`; omit for explicit
    /// matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Frame>,
    /// Explicit Hamiltonian matrix, row-major, entries as [re, im].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Vec<[f64; 2]>>>,
    /// Explicit coupling row, entries as [re, im].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// `single_photon` or `coherent`.
    pub kind: String,
    /// Coefficients s_k or alpha_k, as [re, im].
    pub coefficients: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub t1: f64,
    pub t2: f64,
    /// Storage-stage detuning for the atomic-network preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub store_delta: Option<f64>,
    /// Explicit storage-stage system, for non-preset models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub store: Option<StoreConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreConfig {
    pub omega: Vec<Vec<[f64; 2]>>,
    pub coupling: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Integrator step; default 0.01 / spectral radius of A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Writing-window length t1 − t0; default from the truncation horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Protocol pass/fail threshold; default 0.999.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// Any of "csv", "json"; default both.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
}

fn to_c64(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

impl SystemConfig {
    fn param(&self, name: &str, value: Option<f64>) -> Result<f64, CmdError> {
        value.ok_or_else(|| {
            CmdError::usage(format!(
                "config error: [system] preset {:?} requires field `{name}`",
                self.preset.as_deref().unwrap_or("")
            ))
        })
    }

    pub fn frame(&self) -> Frame {
        self.frame.unwrap_or(Frame::Primed)
    }

    /// Atomic-network parameters, when this config describes the network.
    pub fn network_params(&self) -> Result<AtomicNetworkParams, CmdError> {
        Ok(AtomicNetworkParams {
            kappa: self.param("kappa", self.kappa)?,
            g: self.param("g", self.g)?,
            delta: self.param("delta", self.delta)?,
        })
    }

    /// Build the model in its simulation frame.
    pub fn build(&self) -> Result<PassiveLinearSystem, CmdError> {
        match self.preset.as_deref() {
            Some("single-mode") => {
                presets::single_mode(self.param("kappa", self.kappa)?).map_err(CmdError::from)
            }
            Some("atomic-network") => {
                let params = self.network_params()?;
                match self.frame() {
                    Frame::Node => presets::atomic_network(&params).map_err(CmdError::from),
                    Frame::Primed => {
                        presets::atomic_network_primed(&params).map_err(CmdError::from)
                    }
                }
            }
            Some("active-opo") => Err(CmdError::usage(
                "config error: the active-opo preset only supports `analyze`".into(),
            )),
            Some(other) => Err(CmdError::usage(format!(
                "config error: unknown preset `{other}` (expected single-mode, \
                 atomic-network, or active-opo)"
            ))),
            None => {
                let omega = self.omega.as_ref().ok_or_else(|| {
                    CmdError::usage(
                        "config error: [system] needs `preset` or explicit `omega`/`coupling`"
                            .into(),
                    )
                })?;
                let coupling = self.coupling.as_ref().ok_or_else(|| {
                    CmdError::usage("config error: [system] explicit model needs `coupling`".into())
                })?;
                build_explicit(omega, coupling)
            }
        }
    }
}

pub fn build_explicit(
    omega: &[Vec<[f64; 2]>],
    coupling: &[[f64; 2]],
) -> Result<PassiveLinearSystem, CmdError> {
    let n = omega.len();
    for (i, row) in omega.iter().enumerate() {
        if row.len() != n {
            return Err(CmdError::usage(format!(
                "config error: [system] omega row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    let omega = CMatrix::from_fn(n, n, |i, j| to_c64(omega[i][j]));
    let coupling = CVector::from_vec(coupling.iter().map(|p| to_c64(*p)).collect());
    PassiveLinearSystem::new(omega, coupling).map_err(CmdError::from)
}

impl InputConfig {
    pub fn coefficient_vector(&self) -> CVector {
        CVector::from_vec(self.coefficients.iter().map(|p| to_c64(*p)).collect())
    }

    pub fn is_single_photon(&self) -> Result<bool, CmdError> {
        match self.kind.as_str() {
            "single_photon" => Ok(true),
            "coherent" => Ok(false),
            other => Err(CmdError::usage(format!(
                "config error: [input] kind `{other}` (expected single_photon or coherent)"
            ))),
        }
    }
}

//! Scenario files: a single strict JSON document driving every command.
//! Unknown keys are rejected before any computation runs.

use crate::classical::{Trajectory, TrajectoryInit, DEFAULT_STEPS_PER_TAU};
use crate::error::{Error, Result};
use crate::model::{Label, ModelSpec, Variant};
use crate::poly::{SymmetricPolynomial, Term};
use crate::quad::QuadratureSpec;
use crate::schedule::Schedule;
use crate::wavefn::DressingNorm;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub variant: Variant,
    pub n: usize,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub allow_weak_coupling: bool,
}

fn default_hbar() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    pub m: String,
    pub w2: String,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum TrajectoryBlock {
    Floquet {
        #[serde(default = "default_steps")]
        steps_per_tau: usize,
        #[serde(default = "default_tau_prime_factor")]
        tau_prime_factor: usize,
    },
    Explicit {
        u0: f64,
        udot0: f64,
        v0: f64,
        vdot0: f64,
        #[serde(default)]
        uf0: f64,
        #[serde(default)]
        ufdot0: f64,
        #[serde(default = "default_steps")]
        steps_per_tau: usize,
        #[serde(default = "default_tau_prime_factor")]
        tau_prime_factor: usize,
    },
}

fn default_steps() -> usize {
    DEFAULT_STEPS_PER_TAU
}

fn default_tau_prime_factor() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dressing_norm: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelBlock,
    pub schedule: ScheduleBlock,
    pub trajectory: TrajectoryBlock,
    pub quantum: QuantumBlock,
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

pub const KNOWN_TOLERANCES: &[(&str, f64)] = &[
    ("eigen_residual", 1e-6),
    ("schrodinger_residual", 1e-5),
    ("composition_defect", 1e-10),
    ("orthogonality", 1e-3),
    ("superposition", 1e-10),
    ("derivative", 1e-5),
    ("route_agreement", 1e-5),
    ("gamma_discrepancy", 1e-4),
    ("quasi_periodicity", 1e-6),
    ("rho_periodicity", 1e-8),
];

impl Scenario {
    pub fn from_json(src: &str) -> Result<Scenario> {
        let scenario: Scenario =
            serde_json::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, value) in &self.tolerances {
            if !KNOWN_TOLERANCES.iter().any(|(k, _)| k == key) {
                return Err(Error::Config(format!("unknown tolerance `{key}`")));
            }
            if !(*value > 0.0) {
                return Err(Error::Config(format!(
                    "tolerance `{key}` must be positive, got {value}"
                )));
            }
        }
        self.model_spec()?;
        Ok(())
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        if let Some(v) = self.tolerances.get(key) {
            return *v;
        }
        KNOWN_TOLERANCES
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("unknown tolerance key `{key}`"))
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let spec = ModelSpec {
            variant: self.model.variant,
            n: self.model.n,
            lambda: self.model.lambda,
            alpha: self.model.alpha,
            hbar: self.model.hbar,
            allow_weak_coupling: self.model.allow_weak_coupling,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Schedule::parse(&self.schedule.m, &self.schedule.w2, self.schedule.tau)
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        let schedule = self.schedule()?;
        match &self.trajectory {
            TrajectoryBlock::Floquet {
                steps_per_tau,
                tau_prime_factor,
            } => Trajectory::floquet(schedule, *steps_per_tau, *tau_prime_factor),
            TrajectoryBlock::Explicit {
                u0,
                udot0,
                v0,
                vdot0,
                uf0,
                ufdot0,
                steps_per_tau,
                tau_prime_factor,
            } => Trajectory::explicit(
                schedule,
                TrajectoryInit::Explicit {
                    u0: *u0,
                    udot0: *udot0,
                    v0: *v0,
                    vdot0: *vdot0,
                    uf0: *uf0,
                    ufdot0: *ufdot0,
                },
                *steps_per_tau,
                *tau_prime_factor,
            ),
        }
    }

    pub fn label(&self) -> Result<Label> {
        let q = &self.quantum;
        let forbid = |cond: bool, what: &str| -> Result<()> {
            if cond {
                Err(Error::Config(format!(
                    "quantum key `{what}` does not apply to variant {:?}",
                    self.model.variant
                )))
            } else {
                Ok(())
            }
        };
        match self.model.variant {
            Variant::A => {
                forbid(q.level.is_some(), "level")?;
                Ok(Label::A {
                    m: q.m.unwrap_or(0),
                    n: q.n.unwrap_or(0),
                    k: q.k.unwrap_or(0),
                })
            }
            Variant::W => {
                forbid(q.m.is_some(), "m")?;
                forbid(q.n.is_some(), "n")?;
                forbid(q.k.is_some(), "k")?;
                forbid(q.polynomial.is_some(), "polynomial")?;
                Ok(Label::W {
                    level: q.level.unwrap_or(0),
                })
            }
            Variant::B => {
                forbid(q.m.is_some(), "m")?;
                forbid(q.k.is_some(), "k")?;
                forbid(q.level.is_some(), "level")?;
                forbid(q.polynomial.is_some(), "polynomial")?;
                Ok(Label::B { n: q.n.unwrap_or(0) })
            }
        }
    }

    pub fn polynomial(&self) -> Result<Option<SymmetricPolynomial>> {
        match &self.quantum.polynomial {
            None => Ok(None),
            Some(terms) => Ok(Some(SymmetricPolynomial::new(
                terms.clone(),
                self.model.n,
            )?)),
        }
    }

    pub fn dressing_norm(&self) -> Result<DressingNorm> {
        match self.quantum.dressing_norm.as_deref() {
            None | Some("sqrt_omega") => Ok(DressingNorm::SqrtOmega),
            Some("omega") => Ok(DressingNorm::OmegaLiteral),
            Some(other) => Err(Error::Config(format!(
                "dressing_norm must be `sqrt_omega` or `omega`, got `{other}`"
            ))),
        }
    }
}

//! Run configuration. A JSON file and command-line flags both produce a
//! [`PartialConfig`]; flags are merged over the file and the result is
//! resolved into a validated family, grid and tolerances plus an echo of
//! every value actually used.

use std::fs;
use std::path::PathBuf;

use dynmap_core::models::DephasingPreset;
use dynmap_core::{MapFamily, MatrixJson, TimeGrid, ToleranceConfig};
use serde::{Deserialize, Serialize};

/// Default number of grid steps, giving a 512-point grid.
pub const DEFAULT_STEPS: usize = 511;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialModel {
    pub name: Option<String>,
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub r: Option<f64>,
    pub tstar: Option<f64>,
    pub lambda: Option<f64>,
    pub preset: Option<String>,
    pub dim: Option<usize>,
    /// Path to a generator in the JSON matrix format.
    pub generator: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialGrid {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(default)]
    pub model: PartialModel,
    #[serde(default)]
    pub grid: PartialGrid,
    pub tolerances: Option<ToleranceConfig>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub t: Option<f64>,
    pub noise: Option<f64>,
    pub out: Option<PathBuf>,
}

macro_rules! take {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field; } )+
    };
}

impl PartialConfig {
    pub fn from_file(path: &PathBuf) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Values set in `over` replace those in `self`.
    pub fn merge(mut self, over: PartialConfig) -> Self {
        take!(self.model, over.model, name, gamma, a, r, tstar, lambda, preset, dim, generator);
        take!(self.grid, over.grid, t_min, t_max, steps);
        take!(self, over, tolerances, seed, threads, t, noise, out);
        self
    }
}

/// Model as echoed into reports.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelEcho {
    Identity { dim: usize },
    AmplitudeDamping { gamma: f64 },
    MixedPauli { a: f64, r: f64 },
    Dephasing { preset: String },
    DecayG {
        preset: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        tstar: Option<f64>,
    },
    Semigroup { generator: MatrixJson },
}

#[derive(Debug, Clone, Serialize)]
pub struct GridEcho {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
}

/// Fully resolved configuration. The thread count is left out on purpose:
/// results do not depend on it.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub command: String,
    pub model: ModelEcho,
    pub grid: GridEcho,
    pub tolerances: ToleranceConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
}

/// How a command uses `--t` and `--noise`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUse {
    Ignored,
    Optional,
    Required,
}

pub struct Resolved {
    pub echo: ConfigEcho,
    pub family: MapFamily,
    pub grid: TimeGrid,
    pub tol: ToleranceConfig,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

fn need(v: Option<f64>, model: &str, flag: &str) -> Result<f64, String> {
    v.ok_or_else(|| format!("model {model} requires --{flag}"))
}

fn reject_extra(m: &PartialModel, model: &str, allowed: &[&str]) -> Result<(), String> {
    let present = [
        ("gamma", m.gamma.is_some()),
        ("a", m.a.is_some()),
        ("r", m.r.is_some()),
        ("tstar", m.tstar.is_some()),
        ("lambda", m.lambda.is_some()),
        ("preset", m.preset.is_some()),
        ("dim", m.dim.is_some()),
        ("generator", m.generator.is_some()),
    ];
    for (flag, set) in present {
        if set && !allowed.contains(&flag) {
            return Err(format!("--{flag} does not apply to model {model}"));
        }
    }
    Ok(())
}

fn resolve_model(m: &PartialModel) -> Result<(MapFamily, ModelEcho), String> {
    let name = m.model_name()?;
    let err = |e: dynmap_core::Error| e.to_string();
    match name {
        "identity" => {
            reject_extra(m, name, &["dim"])?;
            let dim = m.dim.unwrap_or(2);
            Ok((MapFamily::identity(dim).map_err(err)?, ModelEcho::Identity { dim }))
        }
        "amplitude-damping" => {
            reject_extra(m, name, &["gamma"])?;
            let gamma = need(m.gamma, name, "gamma")?;
            Ok((MapFamily::amplitude_damping(gamma).map_err(err)?, ModelEcho::AmplitudeDamping { gamma }))
        }
        "mixed-pauli" => {
            reject_extra(m, name, &["a", "r"])?;
            let a = need(m.a, name, "a")?;
            let r = need(m.r, name, "r")?;
            Ok((MapFamily::mixed_pauli(a, r).map_err(err)?, ModelEcho::MixedPauli { a, r }))
        }
        "dephasing" => {
            reject_extra(m, name, &["preset"])?;
            let (preset, label) = match m.preset.as_deref().unwrap_or("invertible") {
                "invertible" => (DephasingPreset::Invertible, "invertible"),
                "singular-crossing" => (DephasingPreset::SingularCrossing, "singular-crossing"),
                other => {
                    return Err(format!(
                        "unknown dephasing preset {other:?} (expected invertible or singular-crossing)"
                    ))
                }
            };
            let echo = ModelEcho::Dephasing { preset: label.into() };
            Ok((MapFamily::dephasing(preset).map_err(err)?, echo))
        }
        "decay-g" => {
            reject_extra(m, name, &["preset", "lambda", "tstar"])?;
            let preset = match (m.preset.as_deref(), m.lambda, m.tstar) {
                (Some("exponential"), _, None) | (None, Some(_), None) => "exponential",
                (Some("linear-cutoff"), None, _) | (None, None, Some(_)) => "linear-cutoff",
                (Some(p @ ("exponential" | "linear-cutoff")), _, _) => {
                    return Err(format!("decay-g preset {p} takes only --lambda (exponential) or --tstar (linear-cutoff)"))
                }
                (Some(other), _, _) => {
                    return Err(format!(
                        "unknown decay-g preset {other:?} (expected exponential or linear-cutoff)"
                    ))
                }
                (None, _, _) => return Err("model decay-g requires exactly one of --lambda or --tstar".into()),
            };
            if preset == "exponential" {
                let lambda = need(m.lambda, name, "lambda")?;
                let echo = ModelEcho::DecayG { preset: preset.into(), lambda: Some(lambda), tstar: None };
                Ok((MapFamily::decay_exponential(lambda).map_err(err)?, echo))
            } else {
                let tstar = need(m.tstar, name, "tstar")?;
                let echo = ModelEcho::DecayG { preset: preset.into(), lambda: None, tstar: Some(tstar) };
                Ok((MapFamily::decay_linear_cutoff(tstar).map_err(err)?, echo))
            }
        }
        "semigroup" => {
            reject_extra(m, name, &["generator"])?;
            let path = m.generator.as_ref().ok_or("model semigroup requires --generator")?;
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let json: MatrixJson =
                serde_json::from_str(&text).map_err(|e| format!("invalid generator {}: {e}", path.display()))?;
            let gen = json.to_cmat().map_err(err)?;
            if gen.rows() != json.dim * json.dim {
                return Err(format!("generator must be {0}^2 x {0}^2 for dim {0}", json.dim));
            }
            let family = MapFamily::semigroup(gen.clone()).map_err(err)?;
            Ok((family, ModelEcho::Semigroup { generator: MatrixJson::new(json.dim, &gen) }))
        }
        other => Err(format!(
            "unknown model {other:?} (expected identity, amplitude-damping, mixed-pauli, dephasing, decay-g or semigroup)"
        )),
    }
}

impl PartialModel {
    fn model_name(&self) -> Result<&str, String> {
        self.name.as_deref().ok_or_else(|| "--model is required".to_string())
    }
}

fn finite(name: &str, v: f64) -> Result<f64, String> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{name} must be finite, got {v}"))
    }
}

impl PartialConfig {
    pub fn resolve(self, command: &str, time_use: TimeUse) -> Result<Resolved, String> {
        let (family, model) = resolve_model(&self.model)?;

        let t_min = finite("t_min", self.grid.t_min.unwrap_or(0.0))?;
        if t_min < family.t_min() {
            return Err(format!("t_min must be >= {}, got {t_min}", family.t_min()));
        }
        let t_max = finite("t_max", self.grid.t_max.unwrap_or(family.t_max()))?;
        let steps = self.grid.steps.unwrap_or(DEFAULT_STEPS);
        let grid = TimeGrid::new(t_min, t_max, steps).map_err(|e| e.to_string())?;

        let tol = self.tolerances.unwrap_or_default();
        tol.validate().map_err(|e| e.to_string())?;

        if self.threads == Some(0) {
            return Err("--threads must be >= 1".into());
        }

        let (t, noise) = match time_use {
            TimeUse::Ignored => {
                if self.t.is_some() || self.noise.is_some() {
                    return Err(format!("--t and --noise do not apply to {command}"));
                }
                (None, None)
            }
            TimeUse::Optional => {
                if self.noise.is_some() {
                    return Err(format!("--noise does not apply to {command}"));
                }
                (self.t, None)
            }
            TimeUse::Required => {
                let t = self.t.ok_or_else(|| format!("{command} requires --t"))?;
                (Some(t), Some(self.noise.unwrap_or(0.0)))
            }
        };
        if let Some(t) = t {
            if !(t.is_finite() && t >= family.t_min()) {
                return Err(format!("--t must be finite and >= {}, got {t}", family.t_min()));
            }
        }
        if let Some(n) = noise {
            if !(n.is_finite() && n >= 0.0) {
                return Err(format!("--noise must be finite and >= 0, got {n}"));
            }
        }

        // the family domain must cover every time the command touches
        let reach = t.unwrap_or(t_max).max(t_max);
        let family = if reach > family.t_max() {
            family.with_t_max(reach).map_err(|e| e.to_string())?
        } else {
            family
        };

        let echo = ConfigEcho {
            command: command.to_string(),
            model,
            grid: GridEcho { t_min, t_max, steps },
            tolerances: tol,
            seed: self.seed.unwrap_or(0),
            t,
            noise,
        };
        Ok(Resolved {
            echo,
            family,
            grid,
            tol,
            threads: self.threads,
            out: self.out,
        })
    }
}

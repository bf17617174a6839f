//! Run configuration: a TOML document with one section per subsystem.
//! Every key is optional and falls back to the module default; unknown
//! keys are rejected. The fully resolved configuration (defaults filled
//! in, patient embedded) is what manifests carry.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use infusim_core::frac::OraConfig;
use infusim_core::patient::{nominal_patient, PatientDoc, PatientModel, Topology};
use infusim_core::pso::SwarmConfig;
use infusim_core::sim::{DeltaUMode, SimConfig};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimSection {
    t_end: Option<f64>,
    step_h: Option<f64>,
    setpoint_amplitude: Option<f64>,
    setpoint_time: Option<f64>,
    w1: Option<f64>,
    w2: Option<f64>,
    deriv_filter_nf: Option<f64>,
    clamp_nonnegative_u: Option<bool>,
    delta_u_mode: Option<DeltaUMode>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OraSection {
    order_n: Option<u32>,
    omega_b: Option<f64>,
    omega_h: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SwarmSection {
    n_particles: Option<usize>,
    n_iterations: Option<usize>,
    c1: Option<f64>,
    c2: Option<f64>,
    inertia_start: Option<f64>,
    inertia_end: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TuningSection {
    gain_lo: Option<f64>,
    gain_hi: Option<f64>,
    order_margin: Option<f64>,
    max_simulations: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PatientSection {
    /// Path to a saved patient document; absent means the built-in
    /// nominal patient.
    file: Option<PathBuf>,
    topology: Option<Topology>,
    concentration_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepSection {
    factors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BodeSection {
    gamma: Option<f64>,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    points_per_decade: Option<u32>,
}

/// Provenance block written into manifests; on load its values provide
/// fallbacks for the corresponding command-line flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunRecord {
    pub command: Option<String>,
    pub version: Option<String>,
    pub params: Option<String>,
    pub class: Option<String>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    sim: SimSection,
    ora: OraSection,
    swarm: SwarmSection,
    tuning: TuningSection,
    patient: PatientSection,
    sweep: SweepSection,
    bode: BodeSection,
    /// Embedded resolved patient; present in manifests so replays do not
    /// depend on external patient files.
    patient_doc: Option<PatientDoc>,
    run: RunRecord,
}

/// Swarm settings prior to binding the per-problem search box.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SwarmSettings {
    pub n_particles: usize,
    pub n_iterations: usize,
    pub c1: f64,
    pub c2: f64,
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub seed: u64,
}

impl SwarmSettings {
    pub fn to_swarm_config(&self, bounds: Vec<(f64, f64)>) -> SwarmConfig {
        let mut cfg = SwarmConfig::new(bounds, self.seed);
        cfg.n_particles = self.n_particles;
        cfg.n_iterations = self.n_iterations;
        cfg.c1 = self.c1;
        cfg.c2 = self.c2;
        cfg.inertia_start = self.inertia_start;
        cfg.inertia_end = self.inertia_end;
        cfg
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TuningSettings {
    pub gain_lo: f64,
    pub gain_hi: f64,
    pub order_margin: f64,
    pub max_simulations: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepSettings {
    pub factors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BodeSettings {
    pub gamma: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: u32,
}

/// Fully resolved run configuration: concrete values everywhere and the
/// patient embedded as a document.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub ora: OraConfig,
    pub swarm: SwarmSettings,
    pub tuning: TuningSettings,
    pub sweep: SweepSettings,
    pub bode: BodeSettings,
    pub patient_doc: PatientDoc,
    #[serde(skip)]
    pub run: RunRecord,
}

impl RunConfig {
    /// All defaults with the nominal patient.
    pub fn defaults() -> Self {
        RunConfig {
            sim: SimConfig::default(),
            ora: OraConfig::default(),
            swarm: SwarmSettings {
                n_particles: 30,
                n_iterations: 200,
                c1: 0.5,
                c2: 1.0,
                inertia_start: 0.9,
                inertia_end: 0.1,
                seed: 42,
            },
            tuning: TuningSettings {
                gain_lo: 0.001,
                gain_hi: 10.0,
                order_margin: 1e-3,
                max_simulations: None,
            },
            sweep: SweepSettings {
                factors: vec![0.5, 1.0, 1.5],
            },
            bode: BodeSettings {
                gamma: 0.5,
                omega_min: 1e-3,
                omega_max: 1e3,
                points_per_decade: 10,
            },
            patient_doc: PatientDoc::from(&nominal_patient()),
            run: RunRecord::default(),
        }
    }

    /// Parses and resolves a config file; `None` yields pure defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let raw = match path {
            None => RawConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str::<RawConfig>(&text)
                    .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?
            }
        };
        Self::resolve(raw, path)
    }

    fn resolve(raw: RawConfig, origin: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::defaults();

        let s = &raw.sim;
        let d = SimConfig::default();
        cfg.sim = SimConfig {
            t_end: s.t_end.unwrap_or(d.t_end),
            step_h: s.step_h.unwrap_or(d.step_h),
            setpoint_amplitude: s.setpoint_amplitude.unwrap_or(d.setpoint_amplitude),
            setpoint_time: s.setpoint_time.unwrap_or(d.setpoint_time),
            w1: s.w1.unwrap_or(d.w1),
            w2: s.w2.unwrap_or(d.w2),
            deriv_filter_nf: s.deriv_filter_nf.unwrap_or(d.deriv_filter_nf),
            clamp_nonnegative_u: s.clamp_nonnegative_u.unwrap_or(d.clamp_nonnegative_u),
            delta_u_mode: s.delta_u_mode.unwrap_or(d.delta_u_mode),
        };
        cfg.sim.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let o = &raw.ora;
        let d = OraConfig::default();
        cfg.ora = OraConfig {
            order_n: o.order_n.unwrap_or(d.order_n),
            omega_b: o.omega_b.unwrap_or(d.omega_b),
            omega_h: o.omega_h.unwrap_or(d.omega_h),
        };
        cfg.ora.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let w = &raw.swarm;
        cfg.swarm = SwarmSettings {
            n_particles: w.n_particles.unwrap_or(cfg.swarm.n_particles),
            n_iterations: w.n_iterations.unwrap_or(cfg.swarm.n_iterations),
            c1: w.c1.unwrap_or(cfg.swarm.c1),
            c2: w.c2.unwrap_or(cfg.swarm.c2),
            inertia_start: w.inertia_start.unwrap_or(cfg.swarm.inertia_start),
            inertia_end: w.inertia_end.unwrap_or(cfg.swarm.inertia_end),
            seed: w.seed.unwrap_or(cfg.swarm.seed),
        };

        let t = &raw.tuning;
        cfg.tuning = TuningSettings {
            gain_lo: t.gain_lo.unwrap_or(cfg.tuning.gain_lo),
            gain_hi: t.gain_hi.unwrap_or(cfg.tuning.gain_hi),
            order_margin: t.order_margin.unwrap_or(cfg.tuning.order_margin),
            max_simulations: t.max_simulations,
        };

        if let Some(f) = &raw.sweep.factors {
            if f.is_empty() {
                return Err(CliError::Config("sweep.factors must be non-empty".into()));
            }
            cfg.sweep.factors = f.clone();
        }

        let b = &raw.bode;
        cfg.bode = BodeSettings {
            gamma: b.gamma.unwrap_or(cfg.bode.gamma),
            omega_min: b.omega_min.unwrap_or(cfg.bode.omega_min),
            omega_max: b.omega_max.unwrap_or(cfg.bode.omega_max),
            points_per_decade: b.points_per_decade.unwrap_or(cfg.bode.points_per_decade),
        };
        if !(cfg.bode.omega_min > 0.0 && cfg.bode.omega_min < cfg.bode.omega_max) {
            return Err(CliError::Config(format!(
                "bode omega range [{}, {}] invalid",
                cfg.bode.omega_min, cfg.bode.omega_max
            )));
        }
        if cfg.bode.points_per_decade == 0 {
            return Err(CliError::Config(
                "bode.points_per_decade must be positive".into(),
            ));
        }

        // patient resolution: embedded document wins (manifest replay),
        // then a referenced file, then the nominal patient
        let mut doc = match (&raw.patient_doc, &raw.patient.file) {
            (Some(doc), _) => doc.clone(),
            (None, Some(file)) => {
                let base = origin.and_then(|p| p.parent()).unwrap_or(Path::new("."));
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base.join(file)
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::Config(format!("cannot read patient {}: {e}", path.display()))
                })?;
                toml::from_str::<PatientDoc>(&text)
                    .map_err(|e| CliError::Config(format!("patient {}: {e}", path.display())))?
            }
            (None, None) => PatientDoc::from(&nominal_patient()),
        };
        if let Some(topology) = raw.patient.topology {
            doc.topology = topology;
        }
        if let Some(scale) = raw.patient.concentration_scale {
            doc.concentration_scale = scale;
        }
        // validate by constructing the model once
        PatientModel::try_from(&doc).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.patient_doc = doc;

        cfg.run = raw.run;
        Ok(cfg)
    }

    pub fn patient(&self) -> PatientModel {
        PatientModel::try_from(&self.patient_doc).expect("validated at load")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_defaults() {
        let cfg = RunConfig::resolve(RawConfig::default(), None).unwrap();
        assert_eq!(cfg.sim, SimConfig::default());
        assert_eq!(cfg.swarm.seed, 42);
        assert_eq!(cfg.sweep.factors, vec![0.5, 1.0, 1.5]);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = toml::from_str::<RawConfig>("[sim]\nt_end = 10.0\nbogus = 1\n");
        assert!(err.is_err());
        let err = toml::from_str::<RawConfig>("[nonsense]\nx = 1\n");
        assert!(err.is_err());
    }

    #[test]
    fn partial_overrides_keep_other_defaults() {
        let raw: RawConfig =
            toml::from_str("[sim]\nt_end = 25.0\n[swarm]\nseed = 7\n").unwrap();
        let cfg = RunConfig::resolve(raw, None).unwrap();
        assert_eq!(cfg.sim.t_end, 25.0);
        assert_eq!(cfg.sim.step_h, SimConfig::default().step_h);
        assert_eq!(cfg.swarm.seed, 7);
        assert_eq!(cfg.swarm.n_particles, 30);
    }

    #[test]
    fn invalid_values_rejected_with_config_error() {
        let raw: RawConfig = toml::from_str("[sim]\nstep_h = -0.1\n").unwrap();
        assert!(matches!(
            RunConfig::resolve(raw, None),
            Err(CliError::Config(_))
        ));
        let raw: RawConfig = toml::from_str("[bode]\nomega_min = 10.0\nomega_max = 1.0\n").unwrap();
        assert!(matches!(
            RunConfig::resolve(raw, None),
            Err(CliError::Config(_))
        ));
    }
}

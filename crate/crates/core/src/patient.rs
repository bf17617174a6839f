//! Multi-organ fentanyl interaction model: nine organ transfer functions,
//! a peripheral shunt gain, and the sigmoid concentration-to-effect map.
//!
//! Each organ model relates the incoming arterial pool drug amount to the
//! outgoing drug concentration in model units; time constants are in
//! minutes. The effect map works in ng/ml, so the patient carries an
//! explicit `concentration_scale` from model output units to ng/ml
//! (default 1000, i.e. model concentrations read as ug/ml).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::lti::{is_hurwitz, LtiError, Polynomial, TransferFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatientError {
    #[error("unknown organ name: {0}")]
    UnknownOrgan(String),
    #[error("organ {0} appears more than once")]
    DuplicateOrgan(&'static str),
    #[error("patient document must define all nine organs, missing {0}")]
    MissingOrgan(&'static str),
    #[error("effect-site concentration must be nonnegative, got {0}")]
    NegativeConcentration(f64),
    #[error("effect must lie in [0, 1), got {0}")]
    EffectOutOfRange(f64),
    #[error("hill parameters must be positive (ec50 = {ec50}, gamma_h = {gamma_h})")]
    InvalidHill { ec50: f64, gamma_h: f64 },
    #[error("dc-gain scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("shunt gain must be nonnegative, got {0}")]
    InvalidShunt(f64),
    #[error("concentration scale must be positive, got {0}")]
    InvalidConcentrationScale(f64),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// The nine compartments of the interaction model, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Organ {
    Fat,
    Lungs,
    GutSpleen,
    Kidneys,
    Liver,
    OtherViscera,
    Muscle,
    Brain,
    Nasal,
}

impl Organ {
    pub const ALL: [Organ; 9] = [
        Organ::Fat,
        Organ::Lungs,
        Organ::GutSpleen,
        Organ::Kidneys,
        Organ::Liver,
        Organ::OtherViscera,
        Organ::Muscle,
        Organ::Brain,
        Organ::Nasal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Organ::Fat => "fat",
            Organ::Lungs => "lungs",
            Organ::GutSpleen => "gut_spleen",
            Organ::Kidneys => "kidneys",
            Organ::Liver => "liver",
            Organ::OtherViscera => "other_viscera",
            Organ::Muscle => "muscle",
            Organ::Brain => "brain",
            Organ::Nasal => "nasal",
        }
    }

    pub fn parse(s: &str) -> Result<Self, PatientError> {
        Organ::ALL
            .iter()
            .find(|o| o.name() == s)
            .copied()
            .ok_or_else(|| PatientError::UnknownOrgan(s.to_string()))
    }
}

impl std::fmt::Display for Organ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One organ's dynamic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganModel {
    pub organ: Organ,
    pub tf: TransferFunction,
}

/// Sigmoid effect-map parameters, ng/ml domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    /// Concentration producing half of the maximal effect, ng/ml.
    pub ec50: f64,
    /// Slope factor.
    pub gamma_h: f64,
}

impl Default for HillParams {
    fn default() -> Self {
        HillParams {
            ec50: 7.8,
            gamma_h: 4.3,
        }
    }
}

impl HillParams {
    pub fn validate(&self) -> Result<(), PatientError> {
        if self.ec50 > 0.0 && self.gamma_h > 0.0 {
            Ok(())
        } else {
            Err(PatientError::InvalidHill {
                ec50: self.ec50,
                gamma_h: self.gamma_h,
            })
        }
    }
}

/// Plant interconnection variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Infusion feeds the lungs (arterial pool); the brain path drives the
    /// output while the remaining organs observe the pool in parallel.
    Feedforward,
    /// Venous sum of every organ output (plus the shunt) re-enters the
    /// lungs together with the infusion. Kept behind this flag: the summed
    /// dc loop gain exceeds one, so the naive recirculation is unstable.
    Recirculating,
}

/// Dc-gain perturbation of one organ's numerator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub organ: Organ,
    pub dc_scale: f64,
}

/// Complete patient: nine organs, shunt gain, effect map, topology, and
/// the model-to-ng/ml concentration scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientModel {
    organs: Vec<OrganModel>,
    pub shunt_gain: f64,
    pub hill: HillParams,
    pub topology: Topology,
    /// Multiplies the brain-path model output before the effect map and
    /// trace reporting. The published effect map takes ng/ml while organ
    /// gains are scaled to the injected-amount unit, three decades up.
    pub concentration_scale: f64,
}

/// Default model-output-to-ng/ml factor (model concentrations in ug/ml).
pub const DEFAULT_CONCENTRATION_SCALE: f64 = 1000.0;

/// Peripheral shunt gain of the base patient.
pub const NOMINAL_SHUNT_GAIN: f64 = 0.0241;

/// The published 93 kg / 5.4 l-per-min patient with verbatim organ
/// coefficients.
pub fn nominal_patient() -> PatientModel {
    let tf = |num: &[f64], den: &[f64]| TransferFunction::from_coeffs(num, den).expect("valid");
    let organs = vec![
        OrganModel {
            organ: Organ::Fat,
            tf: tf(&[-1.437e-8, 1.722e-6], &[1.0, 0.4126, 0.0003241]),
        },
        OrganModel {
            organ: Organ::Lungs,
            tf: tf(&[64.78], &[1.0, 4.17, 6.97]),
        },
        OrganModel {
            organ: Organ::GutSpleen,
            tf: tf(&[-1.34e-5, 0.001604], &[1.0, 0.9059, 0.09356]),
        },
        OrganModel {
            organ: Organ::Kidneys,
            tf: tf(&[0.0132], &[1.0, 0.7436]),
        },
        OrganModel {
            organ: Organ::Liver,
            tf: tf(&[0.006243], &[1.0, 0.04257]),
        },
        OrganModel {
            organ: Organ::OtherViscera,
            tf: tf(&[0.001725], &[1.0, 0.09009]),
        },
        OrganModel {
            organ: Organ::Muscle,
            tf: tf(&[-2.764e-7, 3.312e-5], &[1.0, 0.4152, 0.001867]),
        },
        OrganModel {
            organ: Organ::Brain,
            tf: tf(&[1.614e-5], &[1.0, 0.1533]),
        },
        OrganModel {
            organ: Organ::Nasal,
            tf: tf(&[5.459e-6], &[1.0, 0.08507]),
        },
    ];
    PatientModel {
        organs,
        shunt_gain: NOMINAL_SHUNT_GAIN,
        hill: HillParams::default(),
        topology: Topology::Feedforward,
        concentration_scale: DEFAULT_CONCENTRATION_SCALE,
    }
}

impl PatientModel {
    pub fn organs(&self) -> &[OrganModel] {
        &self.organs
    }

    pub fn organ(&self, organ: Organ) -> &OrganModel {
        self.organs
            .iter()
            .find(|m| m.organ == organ)
            .expect("all nine organs present by construction")
    }

    pub fn validate(&self) -> Result<(), PatientError> {
        for o in Organ::ALL {
            let count = self.organs.iter().filter(|m| m.organ == o).count();
            if count == 0 {
                return Err(PatientError::MissingOrgan(o.name()));
            }
            if count > 1 {
                return Err(PatientError::DuplicateOrgan(o.name()));
            }
        }
        if !self.shunt_gain.is_finite() || self.shunt_gain < 0.0 {
            return Err(PatientError::InvalidShunt(self.shunt_gain));
        }
        if !self.concentration_scale.is_finite() || self.concentration_scale <= 0.0 {
            return Err(PatientError::InvalidConcentrationScale(
                self.concentration_scale,
            ));
        }
        self.hill.validate()?;
        Ok(())
    }
}

/// Sigmoid drug effect `C^g / (EC50^g + C^g)` for `c_b` in ng/ml.
pub fn hill_effect(c_b: f64, hill: &HillParams) -> Result<f64, PatientError> {
    hill.validate()?;
    if !c_b.is_finite() || c_b < 0.0 {
        return Err(PatientError::NegativeConcentration(c_b));
    }
    Ok(hill_effect_unchecked(c_b, hill))
}

pub(crate) fn hill_effect_unchecked(c_b: f64, hill: &HillParams) -> f64 {
    if c_b == 0.0 {
        return 0.0;
    }
    let cg = c_b.powf(hill.gamma_h);
    cg / (hill.ec50.powf(hill.gamma_h) + cg)
}

/// Slope d(effect)/d(c_b) of the sigmoid, used for pointwise signal
/// derivatives during simulation.
pub(crate) fn hill_slope(c_b: f64, hill: &HillParams) -> f64 {
    if c_b <= 0.0 {
        return 0.0;
    }
    let g = hill.gamma_h;
    let eg = hill.ec50.powf(g);
    let cg = c_b.powf(g);
    let denom = eg + cg;
    g * cg / c_b * eg / (denom * denom)
}

/// Analytic inverse of the effect map: the concentration producing a
/// given effect in [0, 1).
pub fn hill_inverse(effect: f64, hill: &HillParams) -> Result<f64, PatientError> {
    hill.validate()?;
    if !(0.0..1.0).contains(&effect) {
        return Err(PatientError::EffectOutOfRange(effect));
    }
    if effect == 0.0 {
        return Ok(0.0);
    }
    Ok(hill.ec50 * (effect / (1.0 - effect)).powf(1.0 / hill.gamma_h))
}

/// Scales the named organ's numerator by `dc_scale`, leaving every
/// denominator coefficient bit-identical; the organ dc gain scales by
/// exactly `dc_scale`.
pub fn apply_dc_perturbation(
    model: &PatientModel,
    spec: &PerturbationSpec,
) -> Result<PatientModel, PatientError> {
    if !spec.dc_scale.is_finite() || spec.dc_scale <= 0.0 {
        return Err(PatientError::InvalidScale(spec.dc_scale));
    }
    let mut out = model.clone();
    let organ = out
        .organs
        .iter_mut()
        .find(|m| m.organ == spec.organ)
        .ok_or_else(|| PatientError::UnknownOrgan(spec.organ.name().to_string()))?;
    organ.tf = organ.tf.scale(spec.dc_scale);
    Ok(out)
}

/// Assembled interconnection ready for simulation or analysis.
#[derive(Debug, Clone)]
pub struct AssembledPlant {
    /// Transfer from infusion input to brain outflow concentration in
    /// model units (apply `concentration_scale` for ng/ml).
    pub control_path: TransferFunction,
    /// Observation channels fed from the arterial pool output: the seven
    /// non-path organs plus the shunt gain, in report order.
    pub observers: Vec<(String, TransferFunction)>,
    pub lungs: TransferFunction,
    pub brain: TransferFunction,
    pub topology: Topology,
    /// Dc loop gain of the venous return; only present for the
    /// recirculating topology.
    pub dc_loop_gain: Option<f64>,
    /// Set when the recirculating return makes the dc loop gain >= 1.
    pub flagged_unstable: bool,
}

/// Wires the patient's organs into the configured topology.
pub fn assemble_plant(model: &PatientModel) -> Result<AssembledPlant, PatientError> {
    model.validate()?;
    let lungs = model.organ(Organ::Lungs).tf.clone();
    let brain = model.organ(Organ::Brain).tf.clone();

    let mut observers = Vec::new();
    for m in &model.organs {
        if m.organ != Organ::Lungs && m.organ != Organ::Brain {
            observers.push((m.organ.name().to_string(), m.tf.clone()));
        }
    }
    observers.push(("shunt".to_string(), TransferFunction::gain(model.shunt_gain)?));

    match model.topology {
        Topology::Feedforward => Ok(AssembledPlant {
            control_path: lungs.series(&brain),
            observers,
            lungs,
            brain,
            topology: model.topology,
            dc_loop_gain: None,
            flagged_unstable: false,
        }),
        Topology::Recirculating => {
            // venous return: every non-lungs organ plus the shunt
            let mut venous = TransferFunction::gain(model.shunt_gain)?;
            for m in &model.organs {
                if m.organ != Organ::Lungs {
                    venous = venous.parallel(&m.tf);
                }
            }
            let dc_loop = lungs.dc_gain()? * venous.dc_gain()?;
            // positive feedback: lungs_in = u + venous(lungs_out)
            let negated = venous.scale(-1.0);
            let pool = lungs.feedback(&negated)?;
            Ok(AssembledPlant {
                control_path: pool.series(&brain),
                observers,
                lungs,
                brain,
                topology: model.topology,
                dc_loop_gain: Some(dc_loop),
                flagged_unstable: dc_loop >= 1.0,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Flat document form for saving and replaying (possibly perturbed) patients.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfDoc {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// Serialization mirror of [`PatientModel`]: organ name -> coefficient
/// arrays plus the scalar parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientDoc {
    pub organs: BTreeMap<String, TfDoc>,
    pub shunt_gain: f64,
    pub hill_ec50: f64,
    pub hill_gamma: f64,
    pub topology: Topology,
    pub concentration_scale: f64,
}

impl From<&PatientModel> for PatientDoc {
    fn from(model: &PatientModel) -> Self {
        let mut organs = BTreeMap::new();
        for m in &model.organs {
            organs.insert(
                m.organ.name().to_string(),
                TfDoc {
                    num: m.tf.num().coeffs().to_vec(),
                    den: m.tf.den().coeffs().to_vec(),
                },
            );
        }
        PatientDoc {
            organs,
            shunt_gain: model.shunt_gain,
            hill_ec50: model.hill.ec50,
            hill_gamma: model.hill.gamma_h,
            topology: model.topology,
            concentration_scale: model.concentration_scale,
        }
    }
}

impl TryFrom<&PatientDoc> for PatientModel {
    type Error = PatientError;

    fn try_from(doc: &PatientDoc) -> Result<Self, PatientError> {
        let mut organs = Vec::with_capacity(9);
        for (name, tfd) in &doc.organs {
            let organ = Organ::parse(name)?;
            let tf = TransferFunction::new(
                Polynomial::new(tfd.num.clone())?,
                Polynomial::new(tfd.den.clone())?,
            )?;
            organs.push(OrganModel { organ, tf });
        }
        // keep the canonical report order regardless of document order
        organs.sort_by_key(|m| Organ::ALL.iter().position(|&o| o == m.organ));
        let model = PatientModel {
            organs,
            shunt_gain: doc.shunt_gain,
            hill: HillParams {
                ec50: doc.hill_ec50,
                gamma_h: doc.hill_gamma,
            },
            topology: doc.topology,
            concentration_scale: doc.concentration_scale,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Stability and properness check over every organ of a patient.
pub fn all_organs_stable_and_proper(model: &PatientModel) -> Result<bool, PatientError> {
    for m in &model.organs {
        if !m.tf.is_proper() || !is_hurwitz(m.tf.den())? {
            return Ok(false);
        }
    }
    Ok(true)
}

use serde::{Deserialize, Serialize};

use super::{EndoField, Trig, TrigForm};
use crate::error::{Error, Result};
use crate::exalg::{Endo, EndoJson, MultiForm, MultiFormJson};
use crate::scalar::ComplexScalar;

/// Relative tolerance for the reality check on load.
const REALITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormModeJson {
    pub freq: Vec<i32>,
    pub coeff: MultiFormJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigFormJson {
    pub torus_dim: usize,
    pub degrees: Vec<usize>,
    pub modes: Vec<FormModeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndoModeJson {
    pub freq: Vec<i32>,
    pub matrix: EndoJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndoFieldJson {
    pub torus_dim: usize,
    pub modes: Vec<EndoModeJson>,
}

impl<S: ComplexScalar> TrigForm<S> {
    pub fn to_json(&self) -> TrigFormJson {
        TrigFormJson {
            torus_dim: self.torus_dim(),
            degrees: self.degrees(),
            modes: self.modes().iter().map(|(k, c)| FormModeJson { freq: k.clone(), coeff: c.to_json() }).collect(),
        }
    }

    /// Parses and checks c_{−k} = conj(c_k).
    pub fn from_json(j: &TrigFormJson) -> Result<Self> {
        let proto = MultiForm::zero(j.torus_dim, &j.degrees);
        let mut modes = Vec::with_capacity(j.modes.len());
        for m in &j.modes {
            let c = MultiForm::<S>::from_json(&m.coeff)?;
            if c.degrees() != j.degrees {
                return Err(Error::InvalidInput(format!("mode {:?} has degrees {:?}", m.freq, c.degrees())));
            }
            modes.push((m.freq.clone(), c));
        }
        let t = Trig::from_modes(j.torus_dim, &proto, modes)?;
        t.check_real(REALITY_TOL)?;
        Ok(t)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

impl<S: ComplexScalar> EndoField<S> {
    pub fn to_json(&self) -> EndoFieldJson {
        EndoFieldJson {
            torus_dim: self.torus_dim(),
            modes: self.modes().iter().map(|(k, c)| EndoModeJson { freq: k.clone(), matrix: c.to_json() }).collect(),
        }
    }

    pub fn from_json(j: &EndoFieldJson) -> Result<Self> {
        let proto = Endo::zero(j.torus_dim);
        let mut modes = Vec::with_capacity(j.modes.len());
        for m in &j.modes {
            modes.push((m.freq.clone(), Endo::<S>::from_json(&m.matrix)?));
        }
        let t = Trig::from_modes(j.torus_dim, &proto, modes)?;
        t.check_real(REALITY_TOL)?;
        Ok(t)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

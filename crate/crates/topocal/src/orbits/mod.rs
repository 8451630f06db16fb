//! The calibration orbits: model points, validators, isotropy algebras, the
//! spaces E^k(V), the metrical and elliptic predicates, isotypic projectors,
//! and the G2 operators.

mod analysis;
mod g2;
pub mod models;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exalg::{Metric, MultiForm};
use crate::scalar::Q;

pub use analysis::{
    analyze, check_elliptic, check_metrical, ek_generators, ek_generators_exact, ek_space, irrep_projectors,
    isotropy_algebra, rho_image_matrix, rho_matrix, EllipticRecord, EllipticVerdict, EllipticWitness, IrrepProjector, MetricalVerdict, OrbitAnalysis,
    OrbitReport,
};
pub use g2::{
    g2_bilinear, g2_j, g2_lambda2_7, intrinsic_g2_metric, j_symbol_solve, metric_from_calibration, pushforward_metric,
    G2Operators, JSymbolIdentity,
};
pub(crate) use analysis::subspace_gap;
pub use validate::{reduce_to_model, validate_structure, Check, Diagnostics, Reduction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Symplectic,
    Sl,
    Cy,
    Hk,
    G2,
    Spin7,
    Degenerate2form,
}

impl Kind {
    pub const ALL: [Kind; 7] =
        [Kind::Symplectic, Kind::Sl, Kind::Cy, Kind::Hk, Kind::G2, Kind::Spin7, Kind::Degenerate2form];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Symplectic => "symplectic",
            Kind::Sl => "sl",
            Kind::Cy => "cy",
            Kind::Hk => "hk",
            Kind::G2 => "g2",
            Kind::Spin7 => "spin7",
            Kind::Degenerate2form => "degenerate2form",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown structure kind '{s}'")))
    }
}

/// Structure parameters. Unset fields take the kind's default.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    /// Real dimension (symplectic, degenerate2form).
    pub dim: Option<usize>,
    /// Complex dimension (sl, cy).
    pub complex_dim: Option<usize>,
    /// Quaternionic dimension (hk).
    pub m: Option<usize>,
}

impl Params {
    pub fn dim(dim: usize) -> Self {
        Params { dim: Some(dim), ..Default::default() }
    }

    pub fn complex_dim(n: usize) -> Self {
        Params { complex_dim: Some(n), ..Default::default() }
    }

    pub fn m(m: usize) -> Self {
        Params { m: Some(m), ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationSpec {
    pub kind: Kind,
    pub dim: usize,
    pub degrees: Vec<usize>,
    pub phi0: MultiForm<f64>,
    pub g_v: Metric,
    pub params: Params,
}

/// The standard model point of each orbit.
pub fn model_calibration(kind: Kind, params: &Params) -> Result<CalibrationSpec> {
    let bad = |msg: &str| Err(Error::InvalidInput(format!("{kind}: {msg}")));
    let mut resolved = Params::default();
    let phi0 = match kind {
        Kind::Symplectic => {
            let d = params.dim.unwrap_or(4);
            if d == 0 || d % 2 == 1 || d > 16 {
                return bad("dim must be even, between 2 and 16");
            }
            resolved.dim = Some(d);
            models::symplectic(d)
        }
        Kind::Sl | Kind::Cy => {
            let n = params.complex_dim.unwrap_or(if kind == Kind::Sl { 2 } else { 3 });
            if n == 0 || n > 6 {
                return bad("complex dimension must be between 1 and 6");
            }
            resolved.complex_dim = Some(n);
            if kind == Kind::Sl {
                models::sl(n)
            } else {
                models::cy(n)
            }
        }
        Kind::Hk => {
            let m = params.m.unwrap_or(1);
            if m == 0 || m > 3 {
                return bad("m must be between 1 and 3");
            }
            resolved.m = Some(m);
            models::hk(m)
        }
        Kind::G2 => models::g2(),
        Kind::Spin7 => models::spin7(),
        Kind::Degenerate2form => {
            let d = params.dim.unwrap_or(4);
            if !(3..=16).contains(&d) {
                return bad("dim must be between 3 and 16");
            }
            resolved.dim = Some(d);
            models::degenerate(d)
        }
    };
    let dim = phi0.dim();
    Ok(CalibrationSpec { kind, dim, degrees: phi0.degrees(), phi0, g_v: Metric::euclidean(dim), params: resolved })
}

impl CalibrationSpec {
    /// The same structure type at another point φ (for example ρ_g Φ⁰).
    pub fn with_phi(&self, phi: MultiForm<f64>) -> Result<Self> {
        if phi.dim() != self.dim || phi.degrees() != self.degrees {
            return Err(Error::DimensionMismatch(format!(
                "expected dim {} degrees {:?}, got dim {} degrees {:?}",
                self.dim,
                self.degrees,
                phi.dim(),
                phi.degrees()
            )));
        }
        Ok(CalibrationSpec { phi0: phi, ..self.clone() })
    }

    /// Φ⁰ over Q when every coefficient is an integer.
    pub fn phi0_exact(&self) -> Option<MultiForm<Q>> {
        let integral = self.phi0.parts().iter().all(|p| p.terms().values().all(|c| c.fract() == 0.0 && c.abs() < 1e15));
        integral.then(|| self.phi0.map(|&c| Q::from_integer((c as i64).into())))
    }

    /// Isotropy dimension of the model point.
    pub fn expected_isotropy_dim(&self) -> Option<usize> {
        let n = self.dim;
        Some(match self.kind {
            Kind::Symplectic => n * (n + 1) / 2,
            Kind::Sl => {
                let c = n / 2;
                2 * (c * c - 1)
            }
            Kind::Cy => {
                let c = n / 2;
                c * c - 1
            }
            Kind::Hk => {
                let m = n / 4;
                m * (2 * m + 1)
            }
            Kind::G2 => 14,
            Kind::Spin7 => 21,
            Kind::Degenerate2form => return None,
        })
    }
}

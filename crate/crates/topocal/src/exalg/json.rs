//! JSON payloads for forms and endomorphisms. Indices are 1-based on the wire.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exalg::form::bits;
use crate::exalg::{Endo, Form, MultiForm};
use crate::scalar::{Scalar, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub idx: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartJson {
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiFormJson {
    pub dim: usize,
    pub scalar: ScalarKind,
    pub parts: Vec<PartJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndoJson {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows_im: Option<Vec<Vec<f64>>>,
}

fn scalar_from_json<S: Scalar>(re: f64, im: f64, kind: ScalarKind) -> Result<S> {
    if kind == ScalarKind::Real && im != 0.0 {
        return Err(Error::InvalidInput("imaginary part in a real payload".into()));
    }
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::InvalidInput("non-finite coefficient".into()));
    }
    S::from_c64(C64::new(re, im))
        .ok_or_else(|| Error::InvalidInput("complex coefficient for a real scalar type".into()))
}

impl<S: Scalar> Form<S> {
    fn part_json(&self) -> PartJson {
        PartJson {
            degree: self.degree(),
            terms: self
                .terms()
                .iter()
                .map(|(&m, c)| {
                    let z = c.to_c64();
                    TermJson { idx: bits::indices(m).into_iter().map(|i| i + 1).collect(), re: z.re, im: z.im }
                })
                .collect(),
        }
    }

    fn from_part_json(dim: usize, kind: ScalarKind, part: &PartJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(part.terms.len());
        let mut seen = std::collections::BTreeSet::new();
        for t in &part.terms {
            if t.idx.iter().any(|&i| i == 0) {
                return Err(Error::InvalidInput(format!("index tuple {:?} must be 1-based", t.idx)));
            }
            if !seen.insert(t.idx.clone()) {
                return Err(Error::InvalidInput(format!("duplicate index tuple {:?}", t.idx)));
            }
            let idx: Vec<usize> = t.idx.iter().map(|i| i - 1).collect();
            terms.push((idx, scalar_from_json::<S>(t.re, t.im, kind)?));
        }
        Form::from_terms(dim, part.degree, terms)
    }

    pub fn to_json(&self) -> MultiFormJson {
        MultiForm::single(self.clone()).to_json()
    }
}

impl<S: Scalar> MultiForm<S> {
    pub fn to_json(&self) -> MultiFormJson {
        MultiFormJson {
            dim: self.dim(),
            scalar: if S::COMPLEX { ScalarKind::Complex } else { ScalarKind::Real },
            parts: self.parts().iter().map(|p| p.part_json()).collect(),
        }
    }

    pub fn from_json(j: &MultiFormJson) -> Result<Self> {
        let parts =
            j.parts.iter().map(|p| Form::from_part_json(j.dim, j.scalar, p)).collect::<Result<Vec<_>>>()?;
        MultiForm::new(parts)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

impl<S: Scalar> Endo<S> {
    pub fn to_json(&self) -> EndoJson {
        let rows = self.rows();
        let re = rows.iter().map(|r| r.iter().map(|x| x.to_c64().re).collect()).collect();
        let rows_im = S::COMPLEX.then(|| rows.iter().map(|r| r.iter().map(|x| x.to_c64().im).collect()).collect());
        EndoJson { dim: self.dim(), rows: re, rows_im }
    }

    pub fn from_json(j: &EndoJson) -> Result<Self> {
        if j.rows.len() != j.dim || j.rows.iter().any(|r| r.len() != j.dim) {
            return Err(Error::InvalidInput(format!("endomorphism rows must be {0}x{0}", j.dim)));
        }
        let kind = if j.rows_im.is_some() { ScalarKind::Complex } else { ScalarKind::Real };
        let im = j.rows_im.clone().unwrap_or_else(|| vec![vec![0.0; j.dim]; j.dim]);
        if im.len() != j.dim || im.iter().any(|r| r.len() != j.dim) {
            return Err(Error::InvalidInput("rows_im shape mismatch".into()));
        }
        let rows = j
            .rows
            .iter()
            .zip(&im)
            .map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| scalar_from_json::<S>(a, b, kind)).collect())
            .collect::<Result<Vec<Vec<S>>>>()?;
        Endo::from_rows(rows)
    }
}

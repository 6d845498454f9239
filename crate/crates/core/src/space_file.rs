//! JSON space descriptions:
//!
//! ```json
//! { "n": 4, "blocks": [[0,1],[2,3]], "rho": ["1/6","1/3","1/4","1/4"] }
//! ```
//!
//! Rationals travel as `"p/q"` strings. An optional `"kernel"` field holds a
//! candidate kernel as `n` rows of `n` rationals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measurable::{FinitePartition, FiniteSpace, MeasurableError, RationalMeasure};
use crate::rational::{format_rational, parse_rational, ParseRationalError};
use crate::rcd::Kernel;

#[derive(Debug, Error)]
pub enum SpaceFileError {
    #[error("malformed JSON")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Invalid(#[from] MeasurableError),
    #[error("kernel must have {expected} rows, got {got}")]
    KernelShape { expected: usize, got: usize },
}

/// The file as written on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescription {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
    pub rho: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<Vec<String>>>,
}

/// A validated measure and partition on a common finite space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub rho: RationalMeasure,
    pub g: FinitePartition,
}

impl Instance {
    pub fn new(rho: RationalMeasure, g: FinitePartition) -> Result<Self, MeasurableError> {
        if rho.space_size() != g.space_size() {
            return Err(MeasurableError::WrongLength { expected: g.space_size(), got: rho.space_size() });
        }
        Ok(Self { rho, g })
    }

    pub fn n(&self) -> usize {
        self.rho.space_size()
    }

    pub fn to_description(&self) -> SpaceDescription {
        SpaceDescription {
            n: self.n(),
            blocks: self.g.blocks().to_vec(),
            rho: self.rho.weights().iter().map(format_rational).collect(),
            kernel: None,
        }
    }
}

/// An instance plus the optional candidate kernel from the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSpace {
    pub instance: Instance,
    pub kernel: Option<Kernel>,
}

impl SpaceDescription {
    pub fn from_json(text: &str) -> Result<Self, SpaceFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("space description serializes")
    }

    pub fn validate(&self) -> Result<LoadedSpace, SpaceFileError> {
        let space = FiniteSpace::new(self.n)?;
        let g = FinitePartition::new(space, self.blocks.clone())?;
        let weights = self.rho.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        let rho = RationalMeasure::on(space, weights)?;
        let kernel = match &self.kernel {
            None => None,
            Some(rows) => {
                if rows.len() != self.n {
                    return Err(SpaceFileError::KernelShape { expected: self.n, got: rows.len() });
                }
                let rows = rows
                    .iter()
                    .map(|row| {
                        let ws = row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
                        Ok(RationalMeasure::on(space, ws)?)
                    })
                    .collect::<Result<Vec<_>, SpaceFileError>>()?;
                Some(Kernel::new(rows)?)
            }
        };
        Ok(LoadedSpace { instance: Instance { rho, g }, kernel })
    }
}

/// Parses and validates in one step.
pub fn load_space(text: &str) -> Result<LoadedSpace, SpaceFileError> {
    SpaceDescription::from_json(text)?.validate()
}

//! JSON encodings of operators and state vectors.
//!
//! Complex numbers are `[re, im]` pairs. Operators are stored row-major:
//!
//! ```json
//! { "dim": 2, "data": [[1, 0], [0, 0], [0, 0], [-1, 0]] }
//! ```
//!
//! States list their amplitudes: `{ "amplitudes": [[0.6, 0], [0, 0.8]] }`.

use qfilter_core::{Operator, StateVector, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dim: usize,
    pub data: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub amplitudes: Vec<[f64; 2]>,
}

fn to_c64(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|z| C64::new(z[0], z[1])).collect()
}

fn from_c64(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

impl OperatorJson {
    pub fn to_operator(&self) -> CliResult<Operator> {
        if self.data.len() != self.dim * self.dim {
            return Err(CliError::Validation(format!(
                "operator: dim {} needs {} entries, found {}",
                self.dim,
                self.dim * self.dim,
                self.data.len()
            )));
        }
        Ok(Operator::from_rows(self.dim, to_c64(&self.data))?)
    }
}

impl From<&Operator> for OperatorJson {
    fn from(a: &Operator) -> Self {
        Self { dim: a.dim(), data: from_c64(a.entries()) }
    }
}

impl StateJson {
    pub fn to_state(&self) -> CliResult<StateVector> {
        Ok(StateVector::new(to_c64(&self.amplitudes))?)
    }
}

impl From<&StateVector> for StateJson {
    fn from(psi: &StateVector) -> Self {
        Self { amplitudes: from_c64(psi.amplitudes()) }
    }
}

//! File formats: JSON for matrices, states, generators and reports; CSV for
//! trajectories and scan tables.
//!
//! Complex matrices use `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major
//! IEEE-754 doubles, independent of the scalar type used in memory.

use serde::{Deserialize, Serialize, Serializer};

use crate::density::{DensityOperator, HermitianObservable};
use crate::dynamics::{Channel, GkslGenerator};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::{lit, to_f64, Cx, Real};

/// Wire form of a complex square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ComplexMatrixJson {
    pub fn from_matrix<T: Real>(m: &CMatrix<T>) -> Self {
        let rows = m.to_rows();
        Self {
            dim: m.rows(),
            re: rows.iter().map(|r| r.iter().map(|z| to_f64(z.re)).collect()).collect(),
            im: rows.iter().map(|r| r.iter().map(|z| to_f64(z.im)).collect()).collect(),
        }
    }

    /// Checks that both parts are `dim × dim` and assembles the matrix.
    pub fn to_matrix<T: Real>(&self) -> Result<CMatrix<T>> {
        let d = self.dim;
        let shape_ok = |part: &Vec<Vec<f64>>| part.len() == d && part.iter().all(|r| r.len() == d);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Shape(format!("\"re\" and \"im\" must both be {d}x{d}")));
        }
        if d == 0 {
            return Err(Error::NotSquare { rows: 0, cols: 0 });
        }
        Ok(CMatrix::from_fn(d, d, |i, j| Cx::new(lit(self.re[i][j]), lit(self.im[i][j]))))
    }
}

impl<T: Real> Serialize for DensityOperator<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexMatrixJson::from_matrix(self.matrix()).serialize(s)
    }
}

impl<T: Real> Serialize for HermitianObservable<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexMatrixJson::from_matrix(self.matrix()).serialize(s)
    }
}

/// Parses and validates a state file.
pub fn state_from_json<T: Real>(text: &str) -> Result<DensityOperator<T>> {
    let raw: ComplexMatrixJson = serde_json::from_str(text)?;
    DensityOperator::new(raw.to_matrix()?)
}

pub fn state_to_json<T: Real>(rho: &DensityOperator<T>) -> String {
    serde_json::to_string_pretty(rho).expect("state serialization is infallible")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ChannelJson {
    gamma: f64,
    #[serde(rename = "L")]
    l: ComplexMatrixJson,
}

/// Wire form of a generator: `{"H": matrix, "channels": [{"gamma": g, "L": matrix}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GeneratorJson {
    #[serde(rename = "H")]
    h: ComplexMatrixJson,
    #[serde(default)]
    channels: Vec<ChannelJson>,
}

impl<T: Real> Serialize for GkslGenerator<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratorJson {
            h: ComplexMatrixJson::from_matrix(self.hamiltonian().matrix()),
            channels: self
                .channels()
                .iter()
                .map(|c| ChannelJson { gamma: to_f64(c.gamma), l: ComplexMatrixJson::from_matrix(&c.l) })
                .collect(),
        }
        .serialize(s)
    }
}

/// Parses and validates a generator file.
pub fn generator_from_json<T: Real>(text: &str) -> Result<GkslGenerator<T>> {
    let raw: GeneratorJson = serde_json::from_str(text)?;
    let h = HermitianObservable::new(raw.h.to_matrix()?)?;
    let channels = raw
        .channels
        .iter()
        .map(|c| Ok(Channel { gamma: lit(c.gamma), l: c.l.to_matrix()? }))
        .collect::<Result<Vec<_>>>()?;
    GkslGenerator::new(h, channels)
}

pub fn generator_to_json<T: Real>(gen: &GkslGenerator<T>) -> String {
    serde_json::to_string_pretty(gen).expect("generator serialization is infallible")
}

/// Formats a number with 12 significant digits in scientific notation.
/// Non-finite values render as `n/a`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "n/a".to_string()
    }
}

pub(crate) fn fmt_opt<T: Real>(x: Option<T>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| fmt_sig(to_f64(v)))
}

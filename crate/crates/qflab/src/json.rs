//! JSON forms of complex matrices and vectors.
//!
//! A matrix is `{"rows": r, "cols": c, "re": [...], "im": [...]}` with the
//! entries in row-major order; a vector is `{"re": [...], "im": [...]}`.
//! Two-particle objects use the pair index `(k, l) ↦ k·n + l`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QfError, Result};
use crate::linalg::{CMat, CVec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let len = self.rows * self.cols;
        let im_ok = self.im.len() == len || self.im.is_empty();
        if self.re.len() != len || !im_ok {
            return Err(QfError::Shape(format!(
                "matrix {}×{} has {} real and {} imaginary entries",
                self.rows,
                self.cols,
                self.re.len(),
                self.im.len()
            )));
        }
        if self.re.iter().chain(&self.im).any(|x| !x.is_finite()) {
            return Err(QfError::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            Complex64::new(self.re[k], self.im.get(k).copied().unwrap_or(0.0))
        }))
    }
}

impl VectorJson {
    pub fn from_vector(v: &CVec) -> Self {
        VectorJson { re: v.iter().map(|z| z.re).collect(), im: v.iter().map(|z| z.im).collect() }
    }

    pub fn to_vector(&self) -> Result<CVec> {
        if !(self.im.is_empty() || self.im.len() == self.re.len()) {
            return Err(QfError::Shape("vector re and im lengths differ".into()));
        }
        if self.re.iter().chain(&self.im).any(|x| !x.is_finite()) {
            return Err(QfError::InvalidArgument("vector entries must be finite".into()));
        }
        Ok(CVec::from_fn(self.re.len(), |k, _| {
            Complex64::new(self.re[k], self.im.get(k).copied().unwrap_or(0.0))
        }))
    }
}

fn invalid<E: serde::de::Error>(e: QfError) -> E {
    E::custom(e.to_string())
}

/// `#[serde(with = "json::mat")]`.
pub mod mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        MatrixJson::deserialize(d)?.to_matrix().map_err(invalid)
    }
}

/// `#[serde(with = "json::vec")]`.
pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
        VectorJson::from_vector(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVec, D::Error> {
        VectorJson::deserialize(d)?.to_vector().map_err(invalid)
    }
}

/// `#[serde(with = "json::opt_mat", default)]`.
pub mod opt_mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixJson::from_matrix).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMat>, D::Error> {
        Option::<MatrixJson>::deserialize(d)?.map(|m| m.to_matrix()).transpose().map_err(invalid)
    }
}

/// `#[serde(with = "json::opt_vec", default)]`.
pub mod opt_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<CVec>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(VectorJson::from_vector).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CVec>, D::Error> {
        Option::<VectorJson>::deserialize(d)?.map(|v| v.to_vector()).transpose().map_err(invalid)
    }
}

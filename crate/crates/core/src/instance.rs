//! QUBO instances, sign vectors, and conversions between the `{0,1}` and
//! `{-1,+1}` forms.

use std::collections::BTreeMap;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Metadata key for the additive constant dropped by a reduction.
pub const OFFSET_KEY: &str = "objective_offset";
/// Metadata key for the multiplier linking the QUBO objective to the
/// original problem value (`original = scale * objective + offset`).
pub const SCALE_KEY: &str = "objective_scale";
/// Set on instances produced by [`QuboInstance::to_plus_minus_one`];
/// coordinate 0 is the fixed-sign slot.
pub const HOMOGENIZED_KEY: &str = "homogenized";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    PlusMinusOne,
    ZeroOne,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::PlusMinusOne => "plus_minus_one",
            Convention::ZeroOne => "zero_one",
        }
    }

    fn admits(self, v: f64) -> bool {
        match self {
            Convention::PlusMinusOne => v == 1.0 || v == -1.0,
            Convention::ZeroOne => v == 0.0 || v == 1.0,
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus_minus_one" | "pm1" | "spin" => Ok(Convention::PlusMinusOne),
            "zero_one" | "01" | "binary" => Ok(Convention::ZeroOne),
            other => Err(Error::InvalidArgument(format!(
                "unknown convention `{other}`"
            ))),
        }
    }
}

/// A vector with entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if let Some((index, &v)) = entries.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::InvalidEntry {
                index,
                value: f64::from(v),
                convention: Convention::PlusMinusOne,
            });
        }
        Ok(SignVector(entries))
    }

    /// Signs of `values`, with `sgn(0) = +1`.
    pub fn from_signs(values: impl IntoIterator<Item = f64>) -> Self {
        SignVector(values.into_iter().map(sign_of).collect())
    }

    pub fn ones(n: usize) -> Self {
        SignVector(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        SignVector(self.0.iter().map(|&v| -v).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }
}

/// `sgn` with the convention `sgn(0) = +1`.
#[inline]
pub fn sign_of(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// `x^T Q x` for a sign vector. `q` must be in standard layout.
pub(crate) fn sign_energy(q: &Array2<f64>, x: &[i8]) -> f64 {
    let n = x.len();
    let data = q.as_slice().expect("standard layout");
    let mut total = 0.0;
    for i in 0..n {
        let row = &data[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for (qij, &xj) in row.iter().zip(x) {
            acc += if xj > 0 { *qij } else { -*qij };
        }
        total += if x[i] > 0 { acc } else { -acc };
    }
    total
}

/// Local fields `Q x`.
pub(crate) fn sign_field(q: &Array2<f64>, x: &[i8]) -> Vec<f64> {
    let n = x.len();
    let data = q.as_slice().expect("standard layout");
    (0..n)
        .map(|i| {
            data[i * n..(i + 1) * n]
                .iter()
                .zip(x)
                .map(|(qij, &xj)| if xj > 0 { *qij } else { -*qij })
                .sum()
        })
        .collect()
}

/// A QUBO instance with a dense symmetric cost matrix.
///
/// For [`Convention::PlusMinusOne`] the objective is `y^T Q y`; for
/// [`Convention::ZeroOne`] it is `x^T Q x + b^T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    q: Array2<f64>,
    convention: Convention,
    linear: Option<Array1<f64>>,
    name: String,
    metadata: BTreeMap<String, String>,
}

impl QuboInstance {
    pub fn new(
        q: Array2<f64>,
        convention: Convention,
        linear: Option<Array1<f64>>,
    ) -> Result<Self> {
        let (rows, cols) = q.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        if rows == 0 {
            return Err(Error::InvalidArgument(
                "instance must have at least one variable".into(),
            ));
        }
        for i in 0..rows {
            for j in (i + 1)..rows {
                if q[[i, j]].to_bits() != q[[j, i]].to_bits() {
                    return Err(Error::InvalidArgument(format!(
                        "cost matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "cost matrix has non-finite entries".into(),
            ));
        }
        let linear = match (convention, linear) {
            (Convention::PlusMinusOne, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "linear term is only allowed for the zero_one convention".into(),
                ))
            }
            (_, Some(b)) if b.len() != rows => {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: b.len(),
                })
            }
            (_, b) => b,
        };
        Ok(QuboInstance {
            q: q.as_standard_layout().into_owned(),
            convention,
            linear,
            name: String::new(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn plus_minus_one(q: Array2<f64>) -> Result<Self> {
        Self::new(q, Convention::PlusMinusOne, None)
    }

    pub fn zero_one(q: Array2<f64>, linear: Option<Array1<f64>>) -> Result<Self> {
        Self::new(q, Convention::ZeroOne, linear)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn linear(&self) -> Option<&Array1<f64>> {
        self.linear.as_ref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn metadata_f64(&self, key: &str) -> Option<f64> {
        self.metadata.get(key).and_then(|v| v.trim().parse().ok())
    }

    /// Constant dropped by reductions (0 if none).
    pub fn offset(&self) -> f64 {
        self.metadata_f64(OFFSET_KEY).unwrap_or(0.0)
    }

    pub fn scale(&self) -> f64 {
        self.metadata_f64(SCALE_KEY).unwrap_or(1.0)
    }

    /// Maps a QUBO objective value back to the value of the problem the
    /// instance was reduced from.
    pub fn original_value(&self, objective: f64) -> f64 {
        self.scale() * objective + self.offset()
    }

    pub(crate) fn require(&self, convention: Convention) -> Result<()> {
        if self.convention != convention {
            return Err(Error::WrongConvention {
                expected: convention,
                found: self.convention,
            });
        }
        Ok(())
    }

    /// Objective at `x`, whose entries must belong to the instance's alphabet.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        if let Some((index, &value)) = x
            .iter()
            .enumerate()
            .find(|(_, &v)| !self.convention.admits(v))
        {
            return Err(Error::InvalidEntry {
                index,
                value,
                convention: self.convention,
            });
        }
        let xv = Array1::from(x.to_vec());
        let mut value = xv.dot(&self.q.dot(&xv));
        if let Some(b) = &self.linear {
            value += b.dot(&xv);
        }
        Ok(value)
    }

    /// `x^T Q x` for a sign vector on a `PlusMinusOne` instance.
    pub fn evaluate(&self, x: &SignVector) -> Result<f64> {
        self.require(Convention::PlusMinusOne)?;
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(sign_energy(&self.q, x.as_slice()))
    }

    /// `1^T Q 1`, the value of the all-equal sign pattern.
    pub fn total_sum(&self) -> f64 {
        self.q.sum()
    }

    pub fn trace(&self) -> f64 {
        self.q.diag().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Homogenizes a `ZeroOne` instance into an `(n+1)`-variable
    /// `PlusMinusOne` instance via the bordered matrix of `M = A + diag(b)`:
    ///
    /// ```text
    /// 1/4 [ 1^T M 1   1^T M ]
    ///     [ M 1       M     ]
    /// ```
    ///
    /// `x` maps to `z = (1, 2x - 1)` with equal objective.
    pub fn to_plus_minus_one(&self) -> Result<QuboInstance> {
        self.require(Convention::ZeroOne)?;
        let n = self.n();
        let mut m = self.q.clone();
        if let Some(b) = &self.linear {
            for i in 0..n {
                m[[i, i]] += b[i];
            }
        }
        let row_sums = m.sum_axis(ndarray::Axis(1));
        let total = row_sums.sum();
        let mut bordered = Array2::zeros((n + 1, n + 1));
        bordered[[0, 0]] = total / 4.0;
        for i in 0..n {
            bordered[[0, i + 1]] = row_sums[i] / 4.0;
            bordered[[i + 1, 0]] = row_sums[i] / 4.0;
            for j in 0..n {
                bordered[[i + 1, j + 1]] = m[[i, j]] / 4.0;
            }
        }
        let mut out = QuboInstance::plus_minus_one(bordered)?;
        out.name = self.name.clone();
        out.metadata = self.metadata.clone();
        out.metadata.insert(HOMOGENIZED_KEY.into(), "true".into());
        Ok(out)
    }

    /// Maps a sign vector of a homogenized instance back to the `{0,1}`
    /// vector of the source instance. Solutions with `z_0 = -1` are negated
    /// first.
    pub fn recover_zero_one(&self, z: &SignVector) -> Result<Vec<f64>> {
        if self.metadata.get(HOMOGENIZED_KEY).map(String::as_str) != Some("true") {
            return Err(Error::InvalidArgument("instance is not homogenized".into()));
        }
        if z.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: z.len(),
            });
        }
        let s = z.as_slice();
        let flip = if s[0] < 0 { -1.0 } else { 1.0 };
        Ok(s[1..]
            .iter()
            .map(|&v| (flip * f64::from(v) + 1.0) / 2.0)
            .collect())
    }

    /// Converts a `PlusMinusOne` instance to `ZeroOne` form with matrix
    /// `4(A - diag(A 1))`. The constant `1^T A 1` is folded into the offset
    /// metadata, so `objective01(x) + 1^T A 1 = objective(2x - 1)`.
    pub fn to_zero_one(&self) -> Result<QuboInstance> {
        self.require(Convention::PlusMinusOne)?;
        let n = self.n();
        let row_sums = self.q.sum_axis(ndarray::Axis(1));
        let constant = row_sums.sum();
        let mut a = self.q.mapv(|v| 4.0 * v);
        for i in 0..n {
            a[[i, i]] -= 4.0 * row_sums[i];
        }
        let mut out = QuboInstance::zero_one(a, None)?;
        out.name = self.name.clone();
        out.metadata = self.metadata.clone();
        out.metadata.remove(HOMOGENIZED_KEY);
        let offset = self.scale() * constant + self.offset();
        out.metadata.insert(OFFSET_KEY.into(), offset.to_string());
        out.metadata
            .insert("zero_one_constant".into(), constant.to_string());
        Ok(out)
    }
}

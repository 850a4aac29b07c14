use serde::{Deserialize, Serialize};

use super::{DenseMatrix, Field, Frame, C64};
use crate::error::{Error, Result};

/// Interchange form of a square matrix. Real matrices still carry an
/// all-zero `im` block; a nonzero entry there is rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub field: Field,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DenseMatrix> for MatrixJson {
    fn from(m: &DenseMatrix) -> Self {
        let n = m.n();
        let part = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(m.get(i, j))).collect()).collect()
        };
        MatrixJson {
            n,
            field: m.field(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

fn check_shape(rows: &[Vec<f64>], n: usize, cols: usize, what: &str) -> Result<()> {
    if rows.len() != n || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Input(format!("{what} block must be {n} by {cols}")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Input(format!("{what} block contains a non-finite entry")));
    }
    Ok(())
}

impl TryFrom<&MatrixJson> for DenseMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<Self> {
        check_shape(&j.re, j.n, j.n, "re")?;
        check_shape(&j.im, j.n, j.n, "im")?;
        match j.field {
            Field::Real => {
                if j.im.iter().flatten().any(|x| *x != 0.0) {
                    return Err(Error::Input(
                        "real matrix has a nonzero imaginary entry".into(),
                    ));
                }
                DenseMatrix::from_real_rows(&j.re)
            }
            Field::Complex => DenseMatrix::from_complex_rows(&j.re, &j.im),
        }
    }
}

impl TryFrom<MatrixJson> for DenseMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        DenseMatrix::try_from(&j)
    }
}

/// Interchange form of an n by k frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameJson {
    pub n: usize,
    pub k: usize,
    pub field: Field,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Frame> for FrameJson {
    fn from(f: &Frame) -> Self {
        let part = |g: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..f.n())
                .map(|i| (0..f.k()).map(|j| g(f.get(i, j))).collect())
                .collect()
        };
        FrameJson {
            n: f.n(),
            k: f.k(),
            field: f.field(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

impl TryFrom<&FrameJson> for Frame {
    type Error = Error;

    fn try_from(j: &FrameJson) -> Result<Self> {
        check_shape(&j.re, j.n, j.k, "re")?;
        check_shape(&j.im, j.n, j.k, "im")?;
        if j.field == Field::Real && j.im.iter().flatten().any(|x| *x != 0.0) {
            return Err(Error::Input("real frame has a nonzero imaginary entry".into()));
        }
        let cols: Vec<Vec<C64>> = (0..j.k)
            .map(|c| (0..j.n).map(|r| C64::new(j.re[r][c], j.im[r][c])).collect())
            .collect();
        Frame::from_columns(j.n, &cols, j.field)
    }
}

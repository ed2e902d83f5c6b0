use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, HermitianOperator};
use crate::error::{Error, Result};

/// On-disk operator: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.
/// A missing `im` means a real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl StateFile {
    pub fn from_operator(op: &HermitianOperator) -> Self {
        let m = op.matrix();
        let d = op.dim();
        let re = (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect();
        let im: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect();
        let any_imag = im.iter().flatten().any(|&v| v != 0.0);
        Self {
            dim: d,
            re,
            im: any_imag.then_some(im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Format("dim must be positive".into()));
        }
        let check = |name: &str, rows: &Vec<Vec<f64>>| -> Result<()> {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Format(format!("\"{name}\" must be a {d}x{d} array")));
            }
            Ok(())
        };
        check("re", &self.re)?;
        if let Some(im) = &self.im {
            check("im", im)?;
        }
        Ok(CMatrix::from_fn(d, d, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        }))
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.to_matrix()?)
    }
}

pub fn read_state_file(path: impl AsRef<Path>) -> Result<HermitianOperator> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    file.to_operator()
}

pub fn write_state_file(path: impl AsRef<Path>, op: &HermitianOperator) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_operator(op))?;
    std::fs::write(path, text)?;
    Ok(())
}

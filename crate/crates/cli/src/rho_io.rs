//! `rho.csv` storage of density matrices and the scalar analysis shared by
//! the ensemble task and re-analysis of saved matrices.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crescent_core::{photon_statistics, quadrature_variance, Complex64, DensityMatrix};

use crate::output::{parse_f64, CsvWriter};
use crate::{CliError, Result};

pub const RHO_HEADER: [&str; 4] = ["m", "n", "re", "im"];

/// Dense `m,n,re,im` rows in row-major order.
pub fn write_rho(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let mut w = CsvWriter::create(path, &RHO_HEADER)?;
    let d = rho.dim();
    for m in 0..d {
        for n in 0..d {
            let e = rho.get(m, n);
            w.row(&[m.into(), n.into(), e.re.into(), e.im.into()])?;
        }
    }
    w.finish()
}

pub fn read_rho(path: &Path) -> Result<DensityMatrix> {
    let bad = |message: String| CliError::Format {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })?;
    let mut lines = text.lines();
    if lines.next() != Some(RHO_HEADER.join(",").as_str()) {
        return Err(bad("missing `m,n,re,im` header".into()));
    }
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(format!("line {}: expected 4 fields", i + 2)));
        }
        let m: usize = f[0]
            .parse()
            .map_err(|_| bad(format!("line {}: bad row index", i + 2)))?;
        let n: usize = f[1]
            .parse()
            .map_err(|_| bad(format!("line {}: bad column index", i + 2)))?;
        let re = parse_f64(f[2]).ok_or_else(|| bad(format!("line {}: bad real part", i + 2)))?;
        let im =
            parse_f64(f[3]).ok_or_else(|| bad(format!("line {}: bad imaginary part", i + 2)))?;
        cells.push((m, n, Complex64::new(re, im)));
    }
    let dim = (cells.len() as f64).sqrt().round() as usize;
    if dim * dim != cells.len() || dim == 0 {
        return Err(bad(format!(
            "{} entries do not form a square matrix",
            cells.len()
        )));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut seen = vec![false; dim * dim];
    for (m, n, v) in cells {
        if m >= dim || n >= dim || seen[m * dim + n] {
            return Err(bad(format!("entry ({m}, {n}) out of range or repeated")));
        }
        seen[m * dim + n] = true;
        entries[m * dim + n] = v;
    }
    Ok(DensityMatrix::from_entries(dim, entries)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureVariance {
    pub theta: f64,
    pub variance: f64,
}

/// Scalars derived from `ρ` alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySummary {
    pub dim: usize,
    pub purity: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub fano: f64,
    pub positive_semidefinite: bool,
    /// `θ = kπ/8`, `k = 0..=8`.
    pub quadrature_variances: Vec<QuadratureVariance>,
}

pub fn analyze_density(rho: &DensityMatrix) -> Result<DensitySummary> {
    let stats = photon_statistics(rho)?;
    let quadrature_variances = (0..=8)
        .map(|k| {
            let theta = k as f64 * PI / 8.0;
            Ok(QuadratureVariance {
                theta,
                variance: quadrature_variance(rho, theta)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensitySummary {
        dim: rho.dim(),
        purity: rho.purity(),
        mean_n: stats.mean,
        var_n: stats.variance,
        fano: stats.fano,
        positive_semidefinite: rho.is_positive_semidefinite(crescent_core::density::POSITIVITY_TOL),
        quadrature_variances,
    })
}

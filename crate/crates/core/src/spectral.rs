//! Dense symmetric eigendecomposition with eigenspace grouping and the
//! integer-spectrum gate.
//!
//! Downstream code only ever consumes eigenspace projections (sums over a
//! group), so the arbitrary basis the solver picks inside a degenerate
//! eigenspace never leaks into results.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SymmetricMatrix;

/// Eigenvalues closer than this belong to the same eigenspace.
pub const GROUP_TOLERANCE: f64 = 1e-6;
/// Maximum distance from the nearest integer accepted by the integer gate.
pub const INTEGER_TOLERANCE: f64 = 1e-6;
const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;
const RESIDUAL_TOLERANCE: f64 = 1e-8;
const UNIFORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    /// Mean of the member eigenvalues.
    pub value: f64,
    /// Column indices into the eigenvector matrix.
    pub indices: Vec<usize>,
}

impl EigenGroup {
    pub fn multiplicity(&self) -> usize {
        self.indices.len()
    }
}

/// Orthonormal real eigenbasis, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    groups: Vec<EigenGroup>,
}

impl Spectrum {
    /// Assembles a spectrum from eigenpairs (column `i` pairs with value `i`),
    /// sorting ascending and grouping. No residual check is made.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Result<Spectrum> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: eigenvectors.ncols() });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);

        let mut groups: Vec<EigenGroup> = Vec::new();
        for (i, &lambda) in sorted.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if lambda - sorted[*g.indices.last().unwrap()] < GROUP_TOLERANCE => {
                    g.indices.push(i)
                }
                _ => groups.push(EigenGroup { value: lambda, indices: vec![i] }),
            }
        }
        for g in &mut groups {
            g.value = g.indices.iter().map(|&i| sorted[i]).sum::<f64>() / g.indices.len() as f64;
        }
        Ok(Spectrum { eigenvalues: sorted, eigenvectors: vectors, groups })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is the eigenvector of `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    /// Largest `|ηᵢ·ηⱼ − δᵢⱼ|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        (gram - DMatrix::identity(self.n(), self.n())).amax()
    }

    /// `‖M − Σ λᵢ ηᵢ ηᵢᵀ‖_max`.
    pub fn reconstruction_residual(&self, m: &SymmetricMatrix) -> f64 {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(self.n(), self.n(), |r, c| v[(r, c)] * self.eigenvalues[c]);
        (m.as_matrix() - scaled * v.transpose()).amax()
    }

    /// Squared projection mass of `amplitudes` on each eigenspace, in group order.
    pub fn group_masses(&self, amplitudes: &[f64]) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| g.indices.iter().map(|&i| amplitudes[i] * amplitudes[i]).sum())
            .collect()
    }

    /// Writes the eigenvectors as CSV: one row per vertex, one column per eigenpair.
    pub fn write_eigenvectors_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["vertex".to_string()];
        header.extend(self.eigenvalues.iter().enumerate().map(|(i, l)| format!("eta{i}[{l:.6}]")));
        out.write_record(&header)?;
        for r in 0..self.n() {
            let mut row = vec![r.to_string()];
            row.extend((0..self.n()).map(|c| crate::report::sig12(self.eigenvectors[(r, c)])));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Eigendecomposes a real symmetric matrix and verifies the result.
pub fn eigendecompose(m: &SymmetricMatrix) -> Result<Spectrum> {
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::EigenSolver("no convergence".into()))?;
    let spectrum = Spectrum::from_parts(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)?;

    let ortho = spectrum.orthonormality_error();
    if ortho > ORTHONORMALITY_TOLERANCE {
        return Err(Error::EigenSolver(format!("eigenvectors not orthonormal ({ortho:.3e})")));
    }
    let residual = spectrum.reconstruction_residual(m);
    if residual > RESIDUAL_TOLERANCE * (1.0 + m.max_abs()) {
        return Err(Error::EigenSolver(format!("reconstruction residual {residual:.3e}")));
    }
    Ok(spectrum)
}

/// A spectrum whose eigenvalues are integers with a simple zero eigenvalue.
#[derive(Debug, Clone)]
pub struct IntegerSpectrum {
    base: Spectrum,
    int_eigenvalues: Vec<i64>,
    zero_index: usize,
}

pub fn validate_integer_spectrum(s: Spectrum) -> Result<IntegerSpectrum> {
    let mut ints = Vec::with_capacity(s.n());
    for &lambda in s.eigenvalues() {
        let rounded = lambda.round();
        let distance = (lambda - rounded).abs();
        if distance > INTEGER_TOLERANCE {
            return Err(Error::NonIntegerEigenvalue { value: lambda, distance });
        }
        ints.push(rounded as i64);
    }
    let zeros: Vec<usize> = (0..ints.len()).filter(|&i| ints[i] == 0).collect();
    if zeros.len() != 1 {
        return Err(Error::ZeroNotSimple { count: zeros.len() });
    }
    let zero_index = zeros[0];

    let n = s.n();
    let expected = 1.0 / (n as f64).sqrt();
    let column = s.eigenvectors().column(zero_index);
    let sign = column[0].signum();
    if column.iter().any(|&x| (sign * x - expected).abs() > UNIFORM_TOLERANCE) {
        return Err(Error::Internal("zero eigenvector is not uniform".into()));
    }
    Ok(IntegerSpectrum { base: s, int_eigenvalues: ints, zero_index })
}

impl IntegerSpectrum {
    pub fn spectrum(&self) -> &Spectrum {
        &self.base
    }

    pub fn int_eigenvalues(&self) -> &[i64] {
        &self.int_eigenvalues
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn to_record(&self) -> SpectrumRecord {
        SpectrumRecord {
            eigenvalues: self.int_eigenvalues.clone(),
            groups: self
                .base
                .groups()
                .iter()
                .map(|g| GroupRecord {
                    value: self.int_eigenvalues[g.indices[0]],
                    multiplicity: g.multiplicity(),
                })
                .collect(),
            zero_index: self.zero_index,
        }
    }
}

/// JSON shape of an integer spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub eigenvalues: Vec<i64>,
    pub groups: Vec<GroupRecord>,
    pub zero_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub value: i64,
    pub multiplicity: usize,
}

/// `αᵢ = ⟨ηᵢ|v⟩` for every eigenvector.
pub fn eigenspace_amplitudes(s: &Spectrum, v: usize) -> Result<Vec<f64>> {
    if v >= s.n() {
        return Err(Error::VertexOutOfRange { vertex: v, n: s.n() });
    }
    Ok(s.eigenvectors().row(v).iter().copied().collect())
}

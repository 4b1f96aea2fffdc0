//! Refinement chain of an integer eigenvalue multiset.
//!
//! Starting from all eigenvalues, each step divides the current set by its
//! gcd (over nonzero elements) and keeps the elements with an even quotient;
//! the odd ones are split off. The chain stops when only `0` is left, and the
//! number of steps is the depth `d`.
//!
//! Sets are stored as eigen-index sets so that degenerate eigenvalues keep
//! their identity and projections onto them stay exact.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::IntegerSpectrum;

/// Overlaps below this are treated as corrupt input.
pub const OVERLAP_FLOOR: f64 = 1e-12;
/// Complement masses at or below this mark a level as skipped.
pub const SKIP_MASS: f64 = 1e-12;

/// gcd of the nonzero elements; 1 when there are none.
pub fn gcd_nonzero(values: impl IntoIterator<Item = i64>) -> u64 {
    let g = values.into_iter().filter(|&v| v != 0).fold(0u64, |g, v| g.gcd(&v.unsigned_abs()));
    if g == 0 {
        1
    } else {
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthLevel {
    /// Eigen-indices in `Λ_k`.
    pub lambda: Vec<usize>,
    /// Eigen-indices in `Λ̄_k`; empty at level 0.
    pub complement: Vec<usize>,
    /// `gcd(Λ_k)`.
    pub gcd: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthChain {
    eigenvalues: Vec<i64>,
    levels: Vec<DepthLevel>,
}

impl DepthChain {
    /// Builds the chain over a raw integer multiset, which must contain 0.
    pub fn from_eigenvalues(eigenvalues: &[i64]) -> Result<DepthChain> {
        if !eigenvalues.contains(&0) {
            return Err(Error::ParameterOutOfRange("eigenvalue set has no zero".into()));
        }
        let mut current: Vec<usize> = (0..eigenvalues.len()).collect();
        let mut complement = Vec::new();
        let mut levels = Vec::new();
        loop {
            let gcd = gcd_nonzero(current.iter().map(|&i| eigenvalues[i]));
            let done = current.iter().all(|&i| eigenvalues[i] == 0);
            levels.push(DepthLevel { lambda: current.clone(), complement, gcd });
            if done {
                break;
            }
            let g = gcd as i64;
            let (even, odd): (Vec<usize>, Vec<usize>) =
                current.iter().partition(|&&i| (eigenvalues[i] / g).rem_euclid(2) == 0);
            current = even;
            complement = odd;
        }
        Ok(DepthChain { eigenvalues: eigenvalues.to_vec(), levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[DepthLevel] {
        &self.levels
    }

    pub fn eigenvalues(&self) -> &[i64] {
        &self.eigenvalues
    }

    /// Eigenvalues of `Λ_k`, ascending.
    pub fn lambda_values(&self, k: usize) -> Vec<i64> {
        self.values_of(&self.levels[k].lambda)
    }

    /// Eigenvalues of `Λ̄_k`, ascending.
    pub fn complement_values(&self, k: usize) -> Vec<i64> {
        self.values_of(&self.levels[k].complement)
    }

    fn values_of(&self, idx: &[usize]) -> Vec<i64> {
        let mut v: Vec<i64> = idx.iter().map(|&i| self.eigenvalues[i]).collect();
        v.sort_unstable();
        v
    }

    pub fn to_record(&self) -> DepthRecord {
        DepthRecord {
            d: self.depth(),
            levels: (0..self.levels.len())
                .map(|k| LevelRecord {
                    lambda: self.lambda_values(k),
                    complement: self.complement_values(k),
                    gcd: self.levels[k].gcd,
                })
                .collect(),
        }
    }

    /// Squared mass of `alphas` on `Λ_k`.
    pub fn level_mass(&self, k: usize, alphas: &[f64]) -> f64 {
        mass(&self.levels[k].lambda, alphas)
    }

    /// Squared mass of `alphas` on `Λ̄_k`.
    pub fn complement_mass(&self, k: usize, alphas: &[f64]) -> f64 {
        mass(&self.levels[k].complement, alphas)
    }
}

pub fn build_depth_chain(ints: &IntegerSpectrum) -> DepthChain {
    DepthChain::from_eigenvalues(ints.int_eigenvalues())
        .expect("validated integer spectrum contains 0")
}

fn mass(idx: &[usize], alphas: &[f64]) -> f64 {
    idx.iter().map(|&i| alphas[i] * alphas[i]).sum()
}

/// JSON shape of a depth chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthRecord {
    pub d: usize,
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub lambda: Vec<i64>,
    pub complement: Vec<i64>,
    pub gcd: u64,
}

/// Normalized projection of a vertex state onto an eigen-index set,
/// expressed in eigenvector coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    pub k: usize,
    pub coefficients: Vec<f64>,
}

impl LevelState {
    fn project(k: usize, idx: &[usize], alphas: &[f64]) -> Option<LevelState> {
        let norm = mass(idx, alphas).sqrt();
        if norm * norm <= SKIP_MASS {
            return None;
        }
        let mut coefficients = vec![0.0; alphas.len()];
        for &i in idx {
            coefficients[i] = alphas[i] / norm;
        }
        Some(LevelState { k, coefficients })
    }

    pub fn inner(&self, other: &LevelState) -> f64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a * b).sum()
    }

    /// Vertex-basis vector `Σ cᵢ ηᵢ`.
    pub fn to_vertex_basis(&self, eigenvectors: &nalgebra::DMatrix<f64>) -> Vec<f64> {
        let c = nalgebra::DVector::from_column_slice(&self.coefficients);
        (eigenvectors * c).iter().copied().collect()
    }
}

/// `|w_k⟩` and, for `k ≥ 1`, `|w̄_k⟩` (absent when its mass vanishes).
#[derive(Debug, Clone)]
pub struct LevelPair {
    pub w: LevelState,
    pub w_bar: Option<LevelState>,
}

pub fn level_states(chain: &DepthChain, alphas: &[f64]) -> Result<Vec<LevelPair>> {
    if alphas.len() != chain.eigenvalues.len() {
        return Err(Error::DimensionMismatch { expected: chain.eigenvalues.len(), found: alphas.len() });
    }
    chain
        .levels
        .iter()
        .enumerate()
        .map(|(k, level)| {
            let w = LevelState::project(k, &level.lambda, alphas)
                .ok_or_else(|| Error::Internal(format!("level {k} has zero mass")))?;
            let w_bar = LevelState::project(k, &level.complement, alphas);
            Ok(LevelPair { w, w_bar })
        })
        .collect()
}

/// `s_k = ⟨w_k|w_{k+1}⟩` for `k = 0..d`, from the vertex amplitudes.
/// Levels whose complement carries no mass report exactly 1.
pub fn overlaps(chain: &DepthChain, alphas: &[f64]) -> Result<Vec<f64>> {
    if alphas.len() != chain.eigenvalues.len() {
        return Err(Error::DimensionMismatch { expected: chain.eigenvalues.len(), found: alphas.len() });
    }
    (0..chain.depth())
        .map(|k| {
            let total = chain.level_mass(k, alphas);
            if chain.complement_mass(k + 1, alphas) <= SKIP_MASS * total {
                return Ok(1.0);
            }
            let s = (chain.level_mass(k + 1, alphas) / total).sqrt();
            if !(s >= OVERLAP_FLOOR) {
                return Err(Error::OverlapFloor(s));
            }
            Ok(s.min(1.0))
        })
        .collect()
}

/// `√(|Λ_{k+1}| / |Λ_k|)`, counting multiplicity.
pub fn transitive_overlaps(chain: &DepthChain) -> Vec<f64> {
    chain
        .levels
        .windows(2)
        .map(|w| (w[1].lambda.len() as f64 / w[0].lambda.len() as f64).sqrt())
        .collect()
}

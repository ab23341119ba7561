//! Entanglement and mixedness measures.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{eigh4, sqrtm_psd4, PSD_SLACK, ROUNDOFF_FLOOR};
use crate::spectral::{from_eigenbasis, Basis, DensityMatrix, SpectralDecomposition};
use crate::CMat4;

/// Clips `[−slack, 0)` to zero and rejects anything more negative.
fn clip(values: impl IntoIterator<Item = f64>) -> Result<Vec<f64>> {
    values.into_iter().map(|x| if x < -PSD_SLACK { Err(Error::NotPositive(x)) } else { Ok(x.max(0.0)) }).collect()
}

/// `σ_y ⊗ σ_y` in the computational basis.
fn spin_flip() -> CMat4 {
    let mut y = CMat4::zeros();
    y[(0, 3)] = Complex64::from(-1.0);
    y[(1, 2)] = Complex64::from(1.0);
    y[(2, 1)] = Complex64::from(1.0);
    y[(3, 0)] = Complex64::from(-1.0);
    y
}

/// Wootters concurrence `max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)`, with `λ_i` the
/// descending eigenvalues of `√ρ ρ̃ √ρ`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
///
/// The input must be in the computational basis. Eigenvalues below `1e-14`
/// of the largest are roundoff and count as zero.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.basis() != Basis::Computational {
        return Err(Error::BasisMismatch { expected: Basis::Computational, found: rho.basis() });
    }
    let m = rho.entries();
    let y = spin_flip();
    let flipped = y * m.conjugate() * y;
    let root = sqrtm_psd4(m)?;
    let product = root * flipped * root;
    let product = (product + product.adjoint()) * Complex64::from(0.5);
    let (values, _) = eigh4(&product)?;
    let values = clip(values.iter().copied())?;
    let floor = ROUNDOFF_FLOOR * values.iter().copied().fold(0.0, f64::max);
    let mut roots: Vec<f64> = values.into_iter().map(|x| if x > floor { x.sqrt() } else { 0.0 }).collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0))
}

/// Concurrence of a state in either basis.
pub fn concurrence_any(rho: &DensityMatrix, spec: &SpectralDecomposition) -> Result<f64> {
    match rho.basis() {
        Basis::Computational => concurrence(rho),
        Basis::Eigen => concurrence(&from_eigenbasis(rho, spec)?),
    }
}

/// `−Σ p log₂ p` over the eigenvalues, `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let p = clip(rho.eigenvalues()?)?;
    Ok(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum::<f64>().max(0.0))
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// Observables of one trajectory sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub t: f64,
    pub concurrence: f64,
    /// Entropy in bits.
    pub entropy: f64,
    pub purity: f64,
}

impl ObservableSample {
    pub fn new(t: f64, rho: &DensityMatrix, spec: &SpectralDecomposition) -> Result<Self> {
        Ok(ObservableSample {
            t,
            concurrence: concurrence_any(rho, spec)?,
            entropy: von_neumann_entropy(rho)?,
            purity: purity(rho),
        })
    }
}

//! Two-qubit Hamiltonian, its closed-form eigensystem, density matrices and
//! the named initial states.
//!
//! The computational basis is ordered `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` (eigenstates of
//! `σ_z τ_z` with `↑ = +1`).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{eigh4, PSD_SLACK};
use crate::{CMat4, RMat4, SINGLET};

/// Tunneling `Δ` (shared by both spins) and Ising coupling `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub delta: f64,
    pub v: f64,
}

impl SystemParams {
    /// `delta = 0` is accepted; it makes every transition rate vanish.
    pub fn new(delta: f64, v: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::param("delta", format!("must be finite and >= 0, got {delta}")));
        }
        if !v.is_finite() || v < 0.0 {
            return Err(Error::param("v", format!("must be finite and >= 0, got {v}")));
        }
        Ok(SystemParams { delta, v })
    }

    /// `√(v² + 4Δ²)`, the splitting between the outer levels.
    pub fn outer_splitting(&self) -> f64 {
        self.v.hypot(2.0 * self.delta)
    }
}

/// `H_S = −Δ/2 σ_x − Δ/2 τ_x − v/2 σ_z τ_z` in the computational basis.
pub fn build_hamiltonian(params: &SystemParams) -> RMat4 {
    let (d, v) = (0.5 * params.delta, 0.5 * params.v);
    #[rustfmt::skip]
    let h = Matrix4::new(
        -v, -d, -d, 0.0,
        -d,  v, 0.0, -d,
        -d, 0.0,  v, -d,
        0.0, -d, -d, -v,
    );
    h
}

/// Closed-form eigensystem of `H_S`.
///
/// Levels keep the fixed order `E₁ = −½√(v²+4Δ²)`, `E₂ = −v/2`, `E₃ = v/2`,
/// `E₄ = ½√(v²+4Δ²)`, so index [`SINGLET`] is always the singlet. Eigenvectors
/// are real with the sign conventions
/// `|1⟩ = [r₊, s₊, s₊, r₊]`, `|2⟩ = [−1, 0, 0, 1]/√2`,
/// `|3⟩ = [0, −1, 1, 0]/√2`, `|4⟩ = [r₋, s₋, s₋, r₋]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub params: SystemParams,
    pub energies: [f64; 4],
    pub r_plus: f64,
    pub r_minus: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    /// Eigenvectors as columns, in the computational basis.
    pub eigenvectors: RMat4,
}

pub fn diagonalize(params: &SystemParams) -> SpectralDecomposition {
    let SystemParams { delta, v } = *params;
    let splitting = params.outer_splitting();
    // v/R and 1 − v/R, the latter without cancellation for small Δ
    let (ratio, complement) =
        if splitting > 0.0 { (v / splitting, 4.0 * delta * delta / (splitting * (splitting + v))) } else { (0.0, 1.0) };
    let r_plus = 0.5 * (1.0 + ratio).sqrt();
    let r_minus = 0.5 * complement.sqrt();

    // s± = ±Δ [4Δ² + v(v ± √(v²+4Δ²))]^(−1/2); the minus-branch denominator
    // equals 4Δ² R/(R + v), written that way to avoid cancellation
    let s_plus = {
        let den = 4.0 * delta * delta + v * (v + splitting);
        if den > 0.0 {
            delta / den.sqrt()
        } else {
            0.5
        }
    };
    let s_minus = if delta > 0.0 {
        let den = 4.0 * delta * delta * splitting / (splitting + v);
        -delta / den.sqrt()
    } else {
        -0.5 * (1.0 + ratio).sqrt()
    };

    let h = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let eigenvectors = Matrix4::new(
        r_plus, -h, 0.0, r_minus,
        s_plus, 0.0, -h, s_minus,
        s_plus, 0.0,  h, s_minus,
        r_plus,  h, 0.0, r_minus,
    );

    SpectralDecomposition {
        params: *params,
        energies: [-0.5 * splitting, -0.5 * v, 0.5 * v, 0.5 * splitting],
        r_plus,
        r_minus,
        s_plus,
        s_minus,
        eigenvectors,
    }
}

impl SpectralDecomposition {
    /// `ω_mn = E_m − E_n` (zero-based indices).
    pub fn omega(&self, m: usize, n: usize) -> f64 {
        self.energies[m] - self.energies[n]
    }

    pub fn omega_table(&self) -> RMat4 {
        RMat4::from_fn(|m, n| self.omega(m, n))
    }

    pub fn eigenvector(&self, k: usize) -> Vector4<f64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `Σ_k E_k |k⟩⟨k|`.
    pub fn reconstruct(&self) -> RMat4 {
        (0..4).fold(RMat4::zeros(), |acc, k| {
            let e = self.eigenvector(k);
            acc + e * e.transpose() * self.energies[k]
        })
    }

    fn unitary(&self) -> CMat4 {
        self.eigenvectors.map(Complex64::from)
    }

    /// Boltzmann weights `e^{−βE_i}/Z` over the levels selected by `include`,
    /// zero elsewhere. At `β = ∞` the weight is shared by the lowest selected
    /// levels.
    pub fn thermal_weights(&self, beta: f64, include: [bool; 4]) -> [f64; 4] {
        let lowest = (0..4).filter(|&k| include[k]).map(|k| self.energies[k]).fold(f64::INFINITY, f64::min);
        let raw: [f64; 4] = std::array::from_fn(|k| {
            if !include[k] {
                0.0
            } else if beta.is_infinite() {
                if self.energies[k] == lowest {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-beta * (self.energies[k] - lowest)).exp()
            }
        });
        let z: f64 = raw.iter().sum();
        raw.map(|w| w / z)
    }
}

/// Basis a density matrix is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Eigen,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Computational => f.write_str("computational"),
            Basis::Eigen => f.write_str("eigen"),
        }
    }
}

/// A 4×4 density matrix tagged with its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: CMat4,
    basis: Basis,
}

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: CMat4, basis: Basis) -> Result<Self> {
        let rho = DensityMatrix { entries, basis };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation; for matrices produced by trusted linear maps.
    pub fn new_unchecked(entries: CMat4, basis: Basis) -> Self {
        DensityMatrix { entries, basis }
    }

    pub fn from_pure(psi: Vector4<Complex64>, basis: Basis) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::param("state", "zero vector"));
        }
        let psi = psi / Complex64::from(norm);
        Ok(DensityMatrix { entries: psi * psi.adjoint(), basis })
    }

    pub fn from_diagonal(p: [f64; 4], basis: Basis) -> Result<Self> {
        let entries = CMat4::from_diagonal(&Vector4::from(p).map(Complex64::from));
        Self::new(entries, basis)
    }

    pub fn entries(&self) -> &CMat4 {
        &self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn populations(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.entries[(i, i)].re)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        let (values, _) = eigh4(&self.entries)?;
        Ok([values[0], values[1], values[2], values[3]])
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr - Complex64::from(1.0)).norm() > TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min = self.eigenvalues()?[0];
        if min < -PSD_SLACK {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self − other`; both must share a basis.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { expected: self.basis, found: other.basis });
        }
        Ok((self.entries - other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// `a·self + b·other` (no renormalisation).
    pub fn combine(&self, a: f64, other: &DensityMatrix, b: f64) -> Result<DensityMatrix> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { expected: self.basis, found: other.basis });
        }
        Ok(DensityMatrix {
            entries: self.entries * Complex64::from(a) + other.entries * Complex64::from(b),
            basis: self.basis,
        })
    }
}

/// Computational → eigenbasis: `ρ' = U† ρ U` with `U` the eigenvector matrix.
pub fn to_eigenbasis(rho: &DensityMatrix, spec: &SpectralDecomposition) -> Result<DensityMatrix> {
    if rho.basis != Basis::Computational {
        return Err(Error::BasisMismatch { expected: Basis::Computational, found: rho.basis });
    }
    let u = spec.unitary();
    Ok(DensityMatrix { entries: u.adjoint() * rho.entries * u, basis: Basis::Eigen })
}

/// Eigenbasis → computational: `ρ = U ρ' U†`.
pub fn from_eigenbasis(rho: &DensityMatrix, spec: &SpectralDecomposition) -> Result<DensityMatrix> {
    if rho.basis != Basis::Eigen {
        return Err(Error::BasisMismatch { expected: Basis::Eigen, found: rho.basis });
    }
    let u = spec.unitary();
    Ok(DensityMatrix { entries: u * rho.entries * u.adjoint(), basis: Basis::Computational })
}

/// Named initial states.
#[derive(Clone, Debug, PartialEq)]
pub enum StatePreset {
    /// `(|↑↓⟩ + |↓↑⟩)/√2`
    PsiA,
    /// `|↑↑⟩`
    PsiB,
    /// the singlet `|3⟩`
    PsiC,
    /// `|↑↓⟩`, an equal superposition of `PsiA` and the singlet
    PsiD,
    /// `(ρ_a + ρ_c)/2`
    Mix1,
    /// `(ρ_a + ρ_b)/2`
    Mix2,
    /// `e^{−βH}/Z` at the given inverse temperature
    Gibbs(f64),
    Custom(DensityMatrix),
}

impl StatePreset {
    pub const NAMES: [&'static str; 7] = ["psi_a", "psi_b", "psi_c", "psi_d", "mix1", "mix2", "gibbs"];

    pub fn name(&self) -> String {
        match self {
            StatePreset::PsiA => "psi_a".into(),
            StatePreset::PsiB => "psi_b".into(),
            StatePreset::PsiC => "psi_c".into(),
            StatePreset::PsiD => "psi_d".into(),
            StatePreset::Mix1 => "mix1".into(),
            StatePreset::Mix2 => "mix2".into(),
            StatePreset::Gibbs(beta) => format!("gibbs({beta})"),
            StatePreset::Custom(_) => "custom".into(),
        }
    }
}

impl FromStr for StatePreset {
    type Err = Error;

    /// Accepts the preset names; Gibbs states are written `gibbs(β)` or
    /// `gibbs:β`, with `inf` for zero temperature.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "psi_a" => return Ok(StatePreset::PsiA),
            "psi_b" => return Ok(StatePreset::PsiB),
            "psi_c" => return Ok(StatePreset::PsiC),
            "psi_d" => return Ok(StatePreset::PsiD),
            "mix1" => return Ok(StatePreset::Mix1),
            "mix2" => return Ok(StatePreset::Mix2),
            _ => {}
        }
        let arg = s.strip_prefix("gibbs(").and_then(|rest| rest.strip_suffix(')')).or_else(|| s.strip_prefix("gibbs:"));
        if let Some(arg) = arg {
            let beta: f64 = arg.trim().parse().map_err(|_| Error::UnknownPreset(s.to_string()))?;
            if beta > 0.0 {
                return Ok(StatePreset::Gibbs(beta));
            }
        }
        Err(Error::UnknownPreset(s.to_string()))
    }
}

fn computational(amplitudes: [f64; 4]) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(Vector4::from(amplitudes).map(Complex64::from), Basis::Computational)
}

/// Builds a preset state, returned in the energy eigenbasis.
pub fn make_state(preset: &StatePreset, spec: &SpectralDecomposition) -> Result<DensityMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let rho = match preset {
        StatePreset::PsiA => computational([0.0, h, h, 0.0])?,
        StatePreset::PsiB => computational([1.0, 0.0, 0.0, 0.0])?,
        StatePreset::PsiC => {
            let mut p = [0.0; 4];
            p[SINGLET] = 1.0;
            return DensityMatrix::from_diagonal(p, Basis::Eigen);
        }
        StatePreset::PsiD => computational([0.0, 1.0, 0.0, 0.0])?,
        StatePreset::Mix1 => {
            let a = make_state(&StatePreset::PsiA, spec)?;
            let c = make_state(&StatePreset::PsiC, spec)?;
            return a.combine(0.5, &c, 0.5);
        }
        StatePreset::Mix2 => {
            let a = make_state(&StatePreset::PsiA, spec)?;
            let b = make_state(&StatePreset::PsiB, spec)?;
            return a.combine(0.5, &b, 0.5);
        }
        StatePreset::Gibbs(beta) => {
            if !(*beta > 0.0) {
                return Err(Error::param("beta", format!("must be > 0, got {beta}")));
            }
            return DensityMatrix::from_diagonal(spec.thermal_weights(*beta, [true; 4]), Basis::Eigen);
        }
        StatePreset::Custom(rho) => {
            rho.validate()?;
            rho.clone()
        }
    };
    match rho.basis {
        Basis::Eigen => Ok(rho),
        Basis::Computational => to_eigenbasis(&rho, spec),
    }
}

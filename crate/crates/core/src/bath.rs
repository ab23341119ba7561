//! Ohmic baths, golden-rule transition rates and dephasing rates.
//!
//! Rate tables use zero-based level indices. `w[(m, n)]` is the rate of the
//! transition `n → m`; `gamma[(m, n)]` is the decay rate of the coherence
//! `ρ_mn`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralDecomposition, SystemParams};
use crate::RMat4;

/// Whether each spin has its own bath (`σ_z X₁ + τ_z X₂`) or both couple to
/// one bath through `(σ_z + τ_z) X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    TwoBath,
    SingleBath,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::TwoBath => f.write_str("two_bath"),
            Topology::SingleBath => f.write_str("single_bath"),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two_bath" | "two" => Ok(Topology::TwoBath),
            "single_bath" | "single" => Ok(Topology::SingleBath),
            other => Err(Error::param("topology", format!("expected two_bath or single_bath, got `{other}`"))),
        }
    }
}

/// Bath parameters. `beta = ∞` means zero temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathConfig {
    pub topology: Topology,
    pub kappa: f64,
    pub beta: f64,
    pub omega_c: f64,
}

impl BathConfig {
    pub fn new(topology: Topology, kappa: f64, beta: f64, omega_c: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::param("kappa", format!("must be finite and > 0, got {kappa}")));
        }
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::param("beta", format!("must be > 0 (inf for zero temperature), got {beta}")));
        }
        if !omega_c.is_finite() || omega_c <= 0.0 {
            return Err(Error::param("omega_c", format!("must be finite and > 0, got {omega_c}")));
        }
        Ok(BathConfig { topology, kappa, beta, omega_c })
    }

    /// Uses the cutoff `ω_c = 100·max(Δ, v)` (100 when both vanish).
    pub fn with_default_cutoff(topology: Topology, kappa: f64, beta: f64, params: &SystemParams) -> Result<Self> {
        Self::new(topology, kappa, beta, default_cutoff(params))
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.topology, kappa, self.beta, self.omega_c)
    }
}

pub fn default_cutoff(params: &SystemParams) -> f64 {
    let scale = params.delta.max(params.v);
    if scale > 0.0 {
        100.0 * scale
    } else {
        100.0
    }
}

/// `J(ω) = κ ω e^{−ω/ω_c}`, i.e. `2πK ω e^{−ω/ω_c}` with `K = κ/2π`.
pub fn spectral_density(omega: f64, cfg: &BathConfig) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::param("omega", format!("spectral density needs omega >= 0, got {omega}")));
    }
    Ok(cfg.kappa * omega * (-omega / cfg.omega_c).exp())
}

/// `coth(β|ω|/2) − 1` for uphill and `coth(β|ω|/2) + 1` for downhill
/// transitions, exact at `β = ∞`.
fn thermal_bracket(abs_omega: f64, beta: f64, uphill: bool) -> f64 {
    let tail = if beta.is_infinite() { 0.0 } else { 2.0 / (beta * abs_omega).exp_m1() };
    if uphill {
        tail
    } else {
        2.0 + tail
    }
}

/// Real part of the half-line bath transform,
/// `(π/2) J(|ω|) [coth(β|ω|/2) − sign ω]`.
pub fn real_rate_integral(omega: f64, cfg: &BathConfig) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    let density = cfg.kappa * omega.abs() * (-omega.abs() / cfg.omega_c).exp();
    0.5 * PI * density * thermal_bracket(omega.abs(), cfg.beta, omega > 0.0)
}

/// `⟨m|D|n⟩` for a diagonal operator with entries ±1 (or ±2, 0), summed as
/// (positive part) − (negative part) so that symmetric cancellations are exact.
fn diagonal_element(diag: [f64; 4], spec: &SpectralDecomposition, m: usize, n: usize) -> f64 {
    let (mut plus, mut minus) = (0.0, 0.0);
    for k in 0..4 {
        let term = diag[k].abs() * spec.eigenvectors[(k, m)] * spec.eigenvectors[(k, n)];
        if diag[k] > 0.0 {
            plus += term;
        } else if diag[k] < 0.0 {
            minus += term;
        }
    }
    plus - minus
}

const SIGMA_Z: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const TAU_Z: [f64; 4] = [1.0, -1.0, 1.0, -1.0];
const SIGMA_PLUS_TAU: [f64; 4] = [2.0, 0.0, 0.0, -2.0];

/// Squared system-bath matrix elements summed over baths:
/// `|⟨m|σ_z|n⟩|² + |⟨m|τ_z|n⟩|²` or `|⟨m|σ_z+τ_z|n⟩|²`.
pub fn coupling_weights(spec: &SpectralDecomposition, topology: Topology) -> RMat4 {
    RMat4::from_fn(|m, n| {
        if m == n {
            return 0.0;
        }
        match topology {
            Topology::TwoBath => {
                diagonal_element(SIGMA_Z, spec, m, n).powi(2) + diagonal_element(TAU_Z, spec, m, n).powi(2)
            }
            Topology::SingleBath => diagonal_element(SIGMA_PLUS_TAU, spec, m, n).powi(2),
        }
    })
}

/// `W_mn = ½ Σ |⟨m|s|n⟩|² · (π/2) J(|ω_mn|) [coth(β|ω_mn|/2) − sign ω_mn]`.
pub fn transition_rates_first_principles(spec: &SpectralDecomposition, cfg: &BathConfig) -> RMat4 {
    let weights = coupling_weights(spec, cfg.topology);
    RMat4::from_fn(|m, n| {
        if m == n || weights[(m, n)] == 0.0 {
            0.0
        } else {
            0.5 * weights[(m, n)] * real_rate_integral(spec.omega(m, n), cfg)
        }
    })
}

/// Closed-form rates with the literal prefactor `c πΔ²κ/√(v²+Δ²)` (`c = 1`
/// for two baths, `2` for one) and no cutoff factor. The remaining entries
/// follow from level symmetry and detailed balance.
pub fn transition_rates_closed_form(spec: &SpectralDecomposition, cfg: &BathConfig) -> RMat4 {
    let SystemParams { delta, v } = spec.params;
    let denom = v.hypot(delta);
    let mut w = RMat4::zeros();
    if delta == 0.0 {
        return w;
    }
    let beta = cfg.beta;
    let pair = |c: f64, omega: f64| {
        let pref = c * PI * delta * delta * cfg.kappa / denom;
        (pref * thermal_bracket(omega, beta, true), pref * thermal_bracket(omega, beta, false))
    };
    match cfg.topology {
        Topology::TwoBath => {
            let (up21, down12) = pair(1.0, spec.omega(1, 0));
            let (up31, down13) = pair(1.0, spec.omega(2, 0));
            w[(1, 0)] = up21;
            w[(0, 1)] = down12;
            w[(2, 0)] = up31;
            w[(0, 2)] = down13;
            w[(3, 2)] = up21;
            w[(2, 3)] = down12;
            w[(3, 1)] = up31;
            w[(1, 3)] = down13;
        }
        Topology::SingleBath => {
            let (up21, down12) = pair(2.0, spec.omega(1, 0));
            let (up42, down24) = pair(2.0, spec.omega(3, 1));
            w[(1, 0)] = up21;
            w[(0, 1)] = down12;
            w[(3, 1)] = up42;
            w[(1, 3)] = down24;
        }
    }
    w
}

/// `γ_mn = ½ Σ_k (W_kn + W_km)`. For a single bath the three singlet
/// coherences are written in their reduced form `γ₁₃ = W₂₁/2`,
/// `γ₂₃ = (W₁₂+W₄₂)/2`, `γ₄₃ = W₂₄/2`.
pub fn dephasing_rates(w: &RMat4, topology: Topology) -> RMat4 {
    let outflow: [f64; 4] = std::array::from_fn(|n| (0..4).filter(|&k| k != n).map(|k| w[(k, n)]).sum());
    let mut gamma = RMat4::from_fn(|m, n| if m == n { 0.0 } else { 0.5 * (outflow[n] + outflow[m]) });
    if topology == Topology::SingleBath {
        let specials = [(0, 0.5 * w[(1, 0)]), (1, 0.5 * (w[(0, 1)] + w[(3, 1)])), (3, 0.5 * w[(1, 3)])];
        for (i, g) in specials {
            gamma[(i, 2)] = g;
            gamma[(2, i)] = g;
        }
    }
    gamma
}

/// Transition and dephasing rates for one system/bath pair.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTable {
    pub w: RMat4,
    pub gamma: RMat4,
    pub topology: Topology,
    pub bath: Option<BathConfig>,
}

impl RateTable {
    /// Rates from matrix elements and the ohmic density.
    pub fn new(spec: &SpectralDecomposition, cfg: &BathConfig) -> Self {
        let w = transition_rates_first_principles(spec, cfg);
        let gamma = dephasing_rates(&w, cfg.topology);
        RateTable { w, gamma, topology: cfg.topology, bath: Some(*cfg) }
    }

    /// Rates from the closed-form expressions.
    pub fn closed_form(spec: &SpectralDecomposition, cfg: &BathConfig) -> Self {
        let w = transition_rates_closed_form(spec, cfg);
        let gamma = dephasing_rates(&w, cfg.topology);
        RateTable { w, gamma, topology: cfg.topology, bath: Some(*cfg) }
    }

    /// Arbitrary transition rates; the diagonal is ignored.
    pub fn from_transitions(w: RMat4, topology: Topology) -> Result<Self> {
        let mut w = w;
        for m in 0..4 {
            w[(m, m)] = 0.0;
        }
        if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::param("w", format!("rates must be finite and >= 0, found {bad}")));
        }
        let gamma = dephasing_rates(&w, topology);
        Ok(RateTable { w, gamma, topology, bath: None })
    }

    pub fn gamma_ratio(&self) -> f64 {
        self.gamma[(0, 1)] / self.gamma[(0, 2)]
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|x| *x == 0.0)
    }
}

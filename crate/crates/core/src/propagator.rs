//! Closed-form secular evolution, equilibrium states and relaxation times.
//!
//! Populations and coherences decouple. Two baths drive the populations as
//! two independent two-level processes; a single bath leaves the singlet
//! untouched and drives a three-level chain `1 ↔ 2 ↔ 4`, inverted here from
//! its Laplace transform. Each coherence decays as `e^{−(γ_ij + iω_ij)t}`.

use num_complex::Complex64;

use crate::bath::{BathConfig, RateTable, Topology};
use crate::error::{Error, Result};
use crate::oracle::{integrate_populations, population_step_bound};
use crate::spectral::{Basis, DensityMatrix, SpectralDecomposition, SystemParams};
use crate::{CMat4, SINGLET};

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// Transition matrix of a two-level process with rates `up` (0→1) and
/// `down` (1→0): `[[P00, P01], [P10, P11]]`.
fn two_level_propagator(up: f64, down: f64, t: f64) -> [[f64; 2]; 2] {
    let total = up + down;
    let (n, m) = if total > 0.0 { (up / total, down / total) } else { (0.5, 0.5) };
    let e = (-total * t).exp();
    let decayed = -(-total * t).exp_m1();
    [[m + n * e, m * decayed], [n * decayed, n + m * e]]
}

/// Two-bath populations at time `t`.
///
/// With `W₄₃ = W₂₁`, `W₄₂ = W₃₁` and no `1↔4`, `2↔3` transitions the
/// generator is a sum of two commuting two-level generators (rates
/// `Γ₁ = W₂₁ + W₁₂` and `Γ₂ = W₃₁ + W₁₃`), so the propagator factorises.
/// `ρ₄₄` is fixed by normalisation.
pub fn populations_two_bath(p0: &[f64; 4], rates: &RateTable, t: f64) -> Result<[f64; 4]> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(*p0);
    }
    let w = &rates.w;
    let a = two_level_propagator(w[(1, 0)], w[(0, 1)], t);
    let b = two_level_propagator(w[(2, 0)], w[(0, 2)], t);
    // level k ↔ (a-state k % 2, b-state k / 2)
    let mut p = [0.0; 4];
    for (i, out) in p.iter_mut().enumerate().take(3) {
        let (ia, ib) = (i % 2, i / 2);
        for (k, pk) in p0.iter().enumerate() {
            *out += a[ia][k % 2] * b[ib][k / 2] * pk;
        }
    }
    let total: f64 = p0.iter().sum();
    p[3] = total - p[0] - p[1] - p[2];
    Ok(p)
}

/// `(e^z − 1)/z` with the removable singularity filled in.
fn phi(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::from(1.0);
        let mut sum = term;
        for k in 2..=20 {
            term *= z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

const ROOT_GAP: f64 = 1e-9;

/// Single-bath populations at time `t`.
///
/// For the chain the transforms are `ρ_ii(λ) = N_i(λ) / (λ q(λ))` with
/// `q(λ) = λ² + bλ + c`, `b = W₁₂+W₂₄+W₂₁+W₄₂` and
/// `c = W₁₂W₂₄ + W₂₁W₂₄ + W₂₁W₄₂`. Writing `N_i(λ) = α λ² + β λ + γ₀`, the
/// residues at the two roots `λ₁, λ₂` of `q` combine into the divided
/// difference
/// `(α − γ₀/c) e^{λ₁t} + (N_i(λ₂)/λ₂) t e^{λ₂t} φ((λ₁−λ₂)t)`,
/// which stays accurate as the roots approach each other. `ρ₃₃` is constant
/// and `ρ₄₄` follows from normalisation. Degenerate denominators (a root gap
/// or a root below `1e-9` of the rate scale) fall back to RK4.
pub fn populations_single_bath(p0: &[f64; 4], rates: &RateTable, t: f64) -> Result<[f64; 4]> {
    check_time(t)?;
    let w = &rates.w;
    if t == 0.0 || rates.is_zero() {
        return Ok(*p0);
    }
    let (w21, w12, w42, w24) = (w[(1, 0)], w[(0, 1)], w[(3, 1)], w[(1, 3)]);
    let b = w12 + w24 + w21 + w42;
    let c = w12 * w24 + w21 * w24 + w21 * w42;

    let disc = Complex64::from(b * b - 4.0 * c).sqrt();
    let lambda1 = -(disc + b) * 0.5;
    let lambda2 = if lambda1.norm() > 0.0 { c / lambda1 } else { Complex64::from(0.0) };
    if (lambda1 - lambda2).norm() < ROOT_GAP * b || lambda2.norm() < ROOT_GAP * b {
        let dt = population_step_bound(w);
        return integrate_populations(p0, w, t, dt);
    }

    let total: f64 = p0.iter().sum();
    let outside = total - p0[SINGLET];
    let (p1, p2) = (p0[0], p0[1]);
    let coefficients = [
        (p1, (w12 + w24 + w42) * p1 + w12 * p2, w12 * w24 * outside),
        (p2, w21 * (p1 + p2) + w24 * (outside - p1), w21 * w24 * outside),
    ];

    let slow = (lambda2 * t).exp() * phi((lambda1 - lambda2) * t) * t;
    let fast = (lambda1 * t).exp();
    let mut p = [0.0; 4];
    for (k, (alpha, beta, gamma0)) in coefficients.into_iter().enumerate() {
        let stationary = gamma0 / c;
        let at_root = lambda2 * alpha + beta + gamma0 / lambda2;
        p[k] = stationary + ((alpha - stationary) * fast + at_root * slow).re;
    }
    p[SINGLET] = p0[SINGLET];
    p[3] = total - p[0] - p[1] - p[SINGLET];
    Ok(p)
}

/// Populations for either topology.
pub fn populations(p0: &[f64; 4], rates: &RateTable, t: f64) -> Result<[f64; 4]> {
    match rates.topology {
        Topology::TwoBath => populations_two_bath(p0, rates, t),
        Topology::SingleBath => populations_single_bath(p0, rates, t),
    }
}

/// Off-diagonal part of `ρ(t)`: `ρ_ij(0) e^{−(γ_ij + iω_ij)t}`; the diagonal
/// of the result is zero.
pub fn coherences(rho0: &CMat4, rates: &RateTable, spec: &SpectralDecomposition, t: f64) -> Result<CMat4> {
    check_time(t)?;
    Ok(CMat4::from_fn(|i, j| {
        if i == j {
            Complex64::from(0.0)
        } else if t == 0.0 {
            rho0[(i, j)]
        } else {
            rho0[(i, j)] * Complex64::new(-rates.gamma[(i, j)] * t, -spec.omega(i, j) * t).exp()
        }
    }))
}

/// The map `ρ(0) ↦ ρ(t)` applied to a raw eigenbasis matrix. Linear in `rho0`.
pub fn propagate(rho0: &CMat4, rates: &RateTable, spec: &SpectralDecomposition, t: f64) -> Result<CMat4> {
    let p0: [f64; 4] = std::array::from_fn(|i| rho0[(i, i)].re);
    let p = populations(&p0, rates, t)?;
    let mut out = coherences(rho0, rates, spec, t)?;
    for (i, pi) in p.iter().enumerate() {
        out[(i, i)] = Complex64::from(*pi);
    }
    Ok(out)
}

fn require_eigen(rho: &DensityMatrix) -> Result<()> {
    if rho.basis() != Basis::Eigen {
        return Err(Error::BasisMismatch { expected: Basis::Eigen, found: rho.basis() });
    }
    Ok(())
}

fn check_grid(times: &[f64]) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        check_time(t)?;
        if i > 0 && t <= times[i - 1] {
            return Err(Error::NonIncreasingGrid(i));
        }
    }
    Ok(())
}

/// Sampled evolution of one initial state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Eigenbasis states, one per time.
    pub states: Vec<DensityMatrix>,
    pub params: SystemParams,
    pub bath: Option<BathConfig>,
}

impl Trajectory {
    /// Sup-norm distance of every sample to `reference`.
    pub fn distances(&self, reference: &DensityMatrix) -> Result<Vec<f64>> {
        self.states.iter().map(|s| s.distance(reference)).collect()
    }

    /// First grid time from which every later sample lies within `threshold`
    /// of `reference`.
    pub fn settling_time(&self, reference: &DensityMatrix, threshold: f64) -> Result<Option<f64>> {
        let d = self.distances(reference)?;
        match d.iter().rposition(|&x| x >= threshold) {
            None => Ok(self.times.first().copied()),
            Some(last) if last + 1 < d.len() => Ok(Some(self.times[last + 1])),
            Some(_) => Ok(None),
        }
    }
}

/// Evolves `rho0` (eigenbasis) over a strictly increasing time grid.
pub fn evolve(
    rho0: &DensityMatrix,
    spec: &SpectralDecomposition,
    rates: &RateTable,
    times: &[f64],
) -> Result<Trajectory> {
    require_eigen(rho0)?;
    check_grid(times)?;
    let states = times
        .iter()
        .map(|&t| propagate(rho0.entries(), rates, spec, t).map(|m| DensityMatrix::new_unchecked(m, Basis::Eigen)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times: times.to_vec(), states, params: spec.params, bath: rates.bath })
}

/// Long-time state.
///
/// Two baths: the Gibbs state. One bath: Gibbs weights over levels 1, 2, 4
/// scaled by `1 − ρ₃₃(0)`, with `ρ₃₃(0)` kept on the singlet. Coherences are
/// taken to decay; see [`persistent_coherences`] for the zero-temperature
/// exceptions.
pub fn equilibrium_state(
    rho0: &DensityMatrix,
    spec: &SpectralDecomposition,
    cfg: &BathConfig,
) -> Result<DensityMatrix> {
    require_eigen(rho0)?;
    let p = match cfg.topology {
        Topology::TwoBath => spec.thermal_weights(cfg.beta, [true; 4]),
        Topology::SingleBath => {
            let singlet = rho0.get(SINGLET, SINGLET).re;
            let mut include = [true; 4];
            include[SINGLET] = false;
            let mut p = spec.thermal_weights(cfg.beta, include).map(|x| x * (1.0 - singlet));
            p[SINGLET] = singlet;
            p
        }
    };
    DensityMatrix::from_diagonal(p, Basis::Eigen)
}

/// Coherence `ρ_ij`, `i < j`, that never decays because `γ_ij = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistentCoherence {
    pub i: usize,
    pub j: usize,
    pub modulus: f64,
}

/// Coherences with nonzero initial value and vanishing decay rate.
pub fn persistent_coherences(rho0: &DensityMatrix, rates: &RateTable) -> Vec<PersistentCoherence> {
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let modulus = rho0.get(i, j).norm();
            if rates.gamma[(i, j)] == 0.0 && modulus > 1e-15 {
                out.push(PersistentCoherence { i, j, modulus });
            }
        }
    }
    out
}

/// Outcome of a relaxation-time search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Relaxation {
    Converged {
        /// Time after which the distance to equilibrium stays below threshold.
        time: f64,
        /// `1 / (slowest relevant decay rate)`, if any rate is relevant.
        analytic_timescale: Option<f64>,
    },
    NotConverged {
        horizon: f64,
        final_distance: f64,
        analytic_timescale: Option<f64>,
    },
}

impl Relaxation {
    pub fn time(&self) -> Option<f64> {
        match self {
            Relaxation::Converged { time, .. } => Some(*time),
            Relaxation::NotConverged { .. } => None,
        }
    }

    pub fn analytic_timescale(&self) -> Option<f64> {
        match self {
            Relaxation::Converged { analytic_timescale, .. } | Relaxation::NotConverged { analytic_timescale, .. } => {
                *analytic_timescale
            }
        }
    }
}

/// Default sup-norm threshold for relaxation.
pub const RELAXATION_THRESHOLD: f64 = 0.01;

const SAMPLES_PER_DECADE: usize = 400;
const DECADES: i32 = 9;

/// Closed-form propagator bound to one system and bath.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub spec: SpectralDecomposition,
    pub cfg: BathConfig,
    pub rates: RateTable,
}

impl Propagator {
    pub fn new(spec: SpectralDecomposition, cfg: BathConfig) -> Self {
        let rates = RateTable::new(&spec, &cfg);
        Propagator { spec, cfg, rates }
    }

    pub fn from_params(params: &SystemParams, cfg: BathConfig) -> Self {
        Self::new(crate::spectral::diagonalize(params), cfg)
    }

    pub fn state_at(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        require_eigen(rho0)?;
        let m = propagate(rho0.entries(), &self.rates, &self.spec, t)?;
        Ok(DensityMatrix::new_unchecked(m, Basis::Eigen))
    }

    pub fn evolve(&self, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
        evolve(rho0, &self.spec, &self.rates, times)
    }

    pub fn equilibrium(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        equilibrium_state(rho0, &self.spec, &self.cfg)
    }

    pub fn distance_to_equilibrium(&self, rho0: &DensityMatrix, t: f64) -> Result<f64> {
        self.state_at(rho0, t)?.distance(&self.equilibrium(rho0)?)
    }

    /// Decay rates that act on `rho0`: population relaxation rates when the
    /// populations start away from equilibrium and `γ_ij` for each nonzero
    /// initial coherence.
    pub fn relevant_rates(&self, rho0: &DensityMatrix) -> Result<Vec<f64>> {
        let eq = self.equilibrium(rho0)?;
        let mut out = Vec::new();
        let p0 = rho0.populations();
        let moved = p0.iter().zip(eq.populations()).any(|(a, b)| (a - b).abs() > 1e-14);
        if moved {
            let w = &self.rates.w;
            match self.rates.topology {
                Topology::TwoBath => {
                    out.push(w[(1, 0)] + w[(0, 1)]);
                    out.push(w[(2, 0)] + w[(0, 2)]);
                }
                Topology::SingleBath => {
                    let (w21, w12, w42, w24) = (w[(1, 0)], w[(0, 1)], w[(3, 1)], w[(1, 3)]);
                    let b = w12 + w24 + w21 + w42;
                    let c = w12 * w24 + w21 * w24 + w21 * w42;
                    let disc = Complex64::from(b * b - 4.0 * c).sqrt();
                    let l1 = -(disc + b) * 0.5;
                    out.push(-l1.re);
                    if l1.norm() > 0.0 {
                        out.push(-(c / l1).re);
                    }
                }
            }
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if rho0.get(i, j).norm() > 1e-15 {
                    out.push(self.rates.gamma[(i, j)]);
                }
            }
        }
        out.retain(|&r| r > 0.0);
        Ok(out)
    }

    /// `1 / min(relevant nonzero decay rates)`.
    pub fn analytic_timescale(&self, rho0: &DensityMatrix) -> Result<Option<f64>> {
        let slowest = self.relevant_rates(rho0)?.into_iter().fold(f64::INFINITY, f64::min);
        Ok(slowest.is_finite().then(|| 1.0 / slowest))
    }

    /// Time after which the sup-norm distance to [`Propagator::equilibrium`]
    /// stays below `threshold`, searched up to `horizon` (default: 40 analytic
    /// timescales). The distance is sampled on a dense logarithmic grid and
    /// the last crossing is refined by bisection.
    pub fn relaxation_time(&self, rho0: &DensityMatrix, threshold: f64, horizon: Option<f64>) -> Result<Relaxation> {
        let timescale = self.analytic_timescale(rho0)?;
        let eq = self.equilibrium(rho0)?;
        let dist = |t: f64| -> Result<f64> { self.state_at(rho0, t)?.distance(&eq) };
        let d0 = dist(0.0)?;
        let horizon = match (horizon, timescale) {
            (Some(h), _) => h,
            (None, Some(ts)) => 40.0 * ts,
            (None, None) => {
                return Ok(if d0 < threshold {
                    Relaxation::Converged { time: 0.0, analytic_timescale: None }
                } else {
                    Relaxation::NotConverged { horizon: 0.0, final_distance: d0, analytic_timescale: None }
                });
            }
        };
        check_time(horizon)?;

        let count = SAMPLES_PER_DECADE * DECADES as usize;
        let start = horizon * 10f64.powi(-DECADES);
        let mut grid = Vec::with_capacity(count + 2);
        grid.push(0.0);
        for k in 0..=count {
            grid.push(start * (horizon / start).powf(k as f64 / count as f64));
        }
        let distances = grid.iter().map(|&t| dist(t)).collect::<Result<Vec<_>>>()?;
        let last_above = distances.iter().rposition(|&d| d >= threshold);
        let time = match last_above {
            None => 0.0,
            Some(k) if k + 1 == grid.len() => {
                return Ok(Relaxation::NotConverged {
                    horizon,
                    final_distance: distances[k],
                    analytic_timescale: timescale,
                });
            }
            Some(k) => {
                let (mut lo, mut hi) = (grid[k], grid[k + 1]);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if dist(mid)? >= threshold {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        };
        Ok(Relaxation::Converged { time, analytic_timescale: timescale })
    }

    /// Decay rate from a least-squares fit of `ln(distance)` over
    /// `count` points spread evenly on `[t_from, t_to]`.
    pub fn fitted_decay_rate(&self, rho0: &DensityMatrix, t_from: f64, t_to: f64, count: usize) -> Result<Option<f64>> {
        let eq = self.equilibrium(rho0)?;
        let mut times = Vec::with_capacity(count);
        let mut logs = Vec::with_capacity(count);
        for k in 0..count {
            let t = t_from + (t_to - t_from) * k as f64 / (count.max(2) - 1) as f64;
            let d = self.state_at(rho0, t)?.distance(&eq)?;
            if d > 0.0 {
                times.push(t);
                logs.push(d.ln());
            }
        }
        Ok(fit_slope(&times, &logs).map(|s| -s))
    }
}

/// Least-squares slope of `y` against `x`; `None` for fewer than two points.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in 0..n {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx).powi(2);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

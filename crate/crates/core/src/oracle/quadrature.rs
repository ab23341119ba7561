//! Bath-correlation quadrature.
//!
//! The ohmic correlation function `C(t) = ⟨X(t)X⟩` with exponential cutoff is
//! summed in closed form by expanding the Bose factor in a geometric series,
//! which yields two trigamma functions. The half-line Fourier transform whose
//! real part sets the golden-rule rates is then evaluated by composite
//! Gauss-Legendre quadrature in the time domain.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::bath::BathConfig;
use crate::error::{Error, Result};

/// Which bath ordering enters the half-line transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `⟨X(t)X⟩`: real part `(π/2) J(|ω|) [coth(β|ω|/2) − sign ω]`.
    Plus,
    /// `⟨X X(t)⟩`: real part `(π/2) J(|ω|) [coth(β|ω|/2) + sign ω]`.
    Minus,
}

/// Trigamma function ψ'(z) for complex `z` away from the nonpositive integers.
pub fn trigamma(z: Complex64) -> Complex64 {
    if z.re < -10.0 {
        // ψ'(z) = π²/sin²(πz) − ψ'(1 − z)
        let s = (z * PI).sin();
        return PI * PI / (s * s) - trigamma(1.0 - z);
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < 20.0 {
        acc += (z * z).inv();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    // 1/z + 1/(2z²) + Σ B_2k / z^(2k+1)
    const BERNOULLI: [f64; 8] =
        [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv * inv2;
    for b in BERNOULLI {
        series += power * b;
        power *= inv2;
    }
    acc + inv + inv2 * 0.5 + series
}

/// Bath correlation function `⟨X(t)X⟩` for the ohmic density
/// `J(ω) = κ ω e^{−ω/ω_c}`, continued analytically to complex `t`.
pub fn correlation_function(t: Complex64, cfg: &BathConfig) -> Complex64 {
    let a = 1.0 / cfg.omega_c;
    let i = Complex64::i();
    if cfg.beta.is_infinite() {
        return cfg.kappa * ((a + i * t) * (a + i * t)).inv();
    }
    let beta = cfg.beta;
    let first = trigamma((a + i * t) / beta);
    let second = trigamma((a + beta - i * t) / beta);
    (first + second) * (cfg.kappa / (beta * beta))
}

/// Frequency-domain evaluation of the real part of the rate integral.
pub fn rate_frequency_domain(omega: f64, cfg: &BathConfig, branch: Branch) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    let w = omega.abs();
    let density = cfg.kappa * w * (-w / cfg.omega_c).exp();
    let suppressed = match branch {
        Branch::Plus => omega > 0.0,
        Branch::Minus => omega < 0.0,
    };
    let x = 0.5 * cfg.beta * w;
    let bracket = if cfg.beta.is_infinite() {
        if suppressed {
            0.0
        } else {
            2.0
        }
    } else if suppressed {
        (-x).exp() / x.sinh()
    } else {
        2.0 + (-x).exp() / x.sinh()
    };
    0.5 * PI * density * bracket
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 24;
        let mut nodes = vec![0.0; N];
        let mut weights = vec![0.0; N];
        for k in 0..N {
            let mut x = (PI * (k as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=N {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[k] = x;
            weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Compensated complex accumulator.
#[derive(Default)]
struct Accumulator {
    re: (f64, f64),
    im: (f64, f64),
}

impl Accumulator {
    fn add_part(acc: &mut (f64, f64), x: f64) {
        let t = acc.0 + x;
        if acc.0.abs() >= x.abs() {
            acc.1 += (acc.0 - t) + x;
        } else {
            acc.1 += (x - t) + acc.0;
        }
        acc.0 = t;
    }

    fn add(&mut self, z: Complex64) {
        Self::add_part(&mut self.re, z.re);
        Self::add_part(&mut self.im, z.im);
    }

    fn total(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Panel boundaries on `[0, end]`, graded geometrically away from the origin
/// where the cutoff scale `1/ω_c` sets the structure.
fn panels(first: f64, widest: f64, end: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut h = first;
    let mut x = 0.0;
    while x < end {
        x = (x + h).min(end);
        edges.push(x);
        h = (h * 1.25).min(widest);
    }
    edges
}

/// Gauss-Legendre sum of `f` over consecutive panels.
fn integrate(edges: &[f64], mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
    let (nodes, weights) = gauss_legendre();
    let mut acc = Accumulator::default();
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[1] + pair[0]);
        for (x, w) in nodes.iter().zip(weights) {
            acc.add(f(mid + half * x) * (w * half));
        }
    }
    acc.total()
}

/// Time-domain evaluation of `Re ∫₀^∞ dt e^{−iωt} C(t)` (or its `Minus`
/// counterpart).
///
/// Uses `Re ∫₀^∞ = ½ ∫_ℝ`. When the result is Boltzmann-suppressed the
/// full-line contour is shifted to `Im t = −β`, which leaves no poles behind
/// and turns the suppression into an explicit factor `e^{−β|ω|}` instead of a
/// cancellation inside the quadrature.
///
/// The cutoff gives `C(t)` an algebraic `1/t²` tail, so the line is only
/// integrated directly on `|Re t| ≤ T`. Beyond `T` both tails are rotated onto
/// vertical rays in the half-plane where `e^{−iωt}` decays; all poles of
/// `C` lie on the imaginary axis, so nothing is crossed.
pub fn rate_time_domain(omega: f64, cfg: &BathConfig, branch: Branch) -> Result<f64> {
    if !cfg.beta.is_finite() {
        return Err(Error::param("beta", "time-domain quadrature needs a finite temperature"));
    }
    // the Minus ordering is the Plus ordering at −ω
    let omega = match branch {
        Branch::Plus => omega,
        Branch::Minus => -omega,
    };
    if omega == 0.0 {
        return Ok(0.0);
    }
    let beta = cfg.beta;
    let a = 1.0 / cfg.omega_c;
    let shift = if omega > 0.0 { beta } else { 0.0 };
    let i = Complex64::i();
    // e^{−iω(t + i·shift)} C(t): the factor e^{−ω·shift} is applied at the end
    let integrand = |t: Complex64| (-i * omega * (t + i * shift)).exp() * correlation_function(t, cfg);

    let split = 7.0 * beta + 40.0 * a;
    let widest = (0.5 / omega.abs()).min(beta / 8.0).min(0.5);
    let center = integrate(&panels(a / 4.0, widest, split), |s| {
        integrand(Complex64::new(s, -shift)) + integrand(Complex64::new(-s, -shift))
    });

    // rays t = ±T − i·shift + σ i y with σ = −sign ω, so |e^{−iωt}| ∝ e^{−|ω| y}
    let sigma = -omega.signum();
    let depth = 45.0 / omega.abs();
    let step = (1.0 / omega.abs()).min(0.5 * split);
    let tails = integrate(&panels(step, step, depth), |y| {
        let right = Complex64::new(split, -shift + sigma * y);
        let left = Complex64::new(-split, -shift + sigma * y);
        (integrand(right) - integrand(left)) * (sigma * i)
    });

    let full_line = (center + tails).re;
    Ok(0.5 * (-omega * shift).exp() * full_line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::Topology;

    fn cfg(kappa: f64, beta: f64) -> BathConfig {
        BathConfig::new(Topology::TwoBath, kappa, beta, 100.0).unwrap()
    }

    #[test]
    fn trigamma_known_values() {
        // ψ'(1) = π²/6, ψ'(1/2) = π²/2
        assert!((trigamma(Complex64::from(1.0)).re - PI * PI / 6.0).abs() < 1e-14);
        assert!((trigamma(Complex64::from(0.5)).re - PI * PI / 2.0).abs() < 1e-13);
        // reflection ψ'(1−z) + ψ'(z) = π²/sin²(πz)
        let z = Complex64::new(0.3, 0.7);
        let lhs = trigamma(1.0 - z) + trigamma(z);
        let rhs = PI * PI / (PI * z).sin().powi(2);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn correlation_matches_direct_frequency_integral() {
        // C(t) = ∫ J(ω)[coth(βω/2) cos ωt − i sin ωt] dω by brute force
        let c = cfg(0.01, 2.0);
        let (nodes, weights) = gauss_legendre();
        for t in [0.0, 0.05, 0.7, 3.0] {
            let mut acc = Complex64::new(0.0, 0.0);
            let edges = panels(1e-3, 0.5, 3000.0);
            for pair in edges.windows(2) {
                let half = 0.5 * (pair[1] - pair[0]);
                let mid = 0.5 * (pair[1] + pair[0]);
                for (x, w) in nodes.iter().zip(weights) {
                    let om: f64 = mid + half * x;
                    let j = c.kappa * om * (-om / c.omega_c).exp();
                    let coth = 1.0 / (0.5 * c.beta * om).tanh();
                    acc += Complex64::new(coth * (om * t).cos(), -(om * t).sin()) * (j * w * half);
                }
            }
            let closed = correlation_function(Complex64::from(t), &c);
            assert!((acc - closed).norm() < 1e-9 * closed.norm().max(1.0), "t={t}: {acc} vs {closed}");
        }
    }

    #[test]
    fn zero_temperature_branches() {
        let c = cfg(0.01, f64::INFINITY);
        assert_eq!(rate_frequency_domain(0.7, &c, Branch::Plus), 0.0);
        let j = 0.01 * 0.7 * (-0.007f64).exp();
        assert!((rate_frequency_domain(0.7, &c, Branch::Minus) - PI * j).abs() < 1e-16);
        assert!(rate_time_domain(0.7, &c, Branch::Plus).is_err());
    }

    #[test]
    fn routes_agree() {
        for beta in [1.0, 10.0] {
            let c = cfg(0.01, beta);
            for omega in [0.1, 0.3, 0.709481, 1.0, 1.409481, 3.0, 10.0] {
                for branch in [Branch::Plus, Branch::Minus] {
                    for w in [omega, -omega] {
                        let f = rate_frequency_domain(w, &c, branch);
                        let q = rate_time_domain(w, &c, branch).unwrap();
                        let rel = (f - q).abs() / f.abs();
                        assert!(rel < 1e-8, "beta={beta} omega={w} {branch:?}: {f:e} vs {q:e} ({rel:e})");
                    }
                }
            }
        }
    }
}

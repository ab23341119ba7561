use num_complex::Complex64;

use crate::bath::RateTable;
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;
use crate::{CMat4, RMat4};

const STEP_FRACTION: f64 = 0.01;

fn max_outflow(w: &RMat4) -> f64 {
    (0..4).map(|m| (0..4).filter(|&n| n != m).map(|n| w[(n, m)]).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest admissible RK4 step for the population equations alone.
pub fn population_step_bound(w: &RMat4) -> f64 {
    STEP_FRACTION / max_outflow(w)
}

/// Largest admissible RK4 step for the full secular equations.
pub fn secular_step_bound(rates: &RateTable, spec: &SpectralDecomposition) -> f64 {
    let mut fastest = max_outflow(&rates.w);
    for m in 0..4 {
        for n in 0..4 {
            if m != n {
                fastest = fastest.max(spec.omega(m, n).abs()).max(rates.gamma[(m, n)]);
            }
        }
    }
    STEP_FRACTION / fastest
}

fn check_step(dt: f64, bound: f64) -> Result<()> {
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::UnstableStep { dt, bound });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

fn population_rhs(w: &RMat4, p: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for m in 0..4 {
        let mut gain = 0.0;
        let mut loss = 0.0;
        for n in 0..4 {
            if n != m {
                gain += w[(m, n)] * p[n];
                loss += w[(n, m)];
            }
        }
        out[m] = gain - loss * p[m];
    }
    out
}

fn axpy(y: &[f64; 4], a: f64, x: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| y[i] + a * x[i])
}

/// Fixed-step RK4 for `ṗ_m = Σ_n W_mn p_n − p_m Σ_n W_nm`.
pub fn integrate_populations(p0: &[f64; 4], w: &RMat4, t_end: f64, dt: f64) -> Result<[f64; 4]> {
    check_time(t_end)?;
    check_step(dt, population_step_bound(w))?;
    if t_end == 0.0 {
        return Ok(*p0);
    }
    let steps = (t_end / dt).ceil().max(1.0) as u64;
    let h = t_end / steps as f64;
    let mut p = *p0;
    for _ in 0..steps {
        let k1 = population_rhs(w, &p);
        let k2 = population_rhs(w, &axpy(&p, 0.5 * h, &k1));
        let k3 = population_rhs(w, &axpy(&p, 0.5 * h, &k2));
        let k4 = population_rhs(w, &axpy(&p, h, &k3));
        for i in 0..4 {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Ok(p)
}

struct SecularRhs {
    w: RMat4,
    // −iω_mn − γ_mn for m ≠ n, zero on the diagonal
    generator: CMat4,
}

impl SecularRhs {
    fn new(rates: &RateTable, spec: &SpectralDecomposition) -> Self {
        let generator = CMat4::from_fn(|m, n| {
            if m == n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(-rates.gamma[(m, n)], -spec.omega(m, n))
            }
        });
        SecularRhs { w: rates.w, generator }
    }

    fn eval(&self, rho: &CMat4) -> CMat4 {
        let mut out = self.generator.component_mul(rho);
        let p: [f64; 4] = std::array::from_fn(|i| rho[(i, i)].re);
        let dp = population_rhs(&self.w, &p);
        for i in 0..4 {
            out[(i, i)] = Complex64::from(dp[i]);
        }
        out
    }

    fn advance(&self, rho: &mut CMat4, span: f64, dt: f64) {
        if span <= 0.0 {
            return;
        }
        let steps = (span / dt).ceil().max(1.0) as u64;
        let h = span / steps as f64;
        let hc = Complex64::from(h);
        let half = Complex64::from(0.5 * h);
        for _ in 0..steps {
            let k1 = self.eval(rho);
            let k2 = self.eval(&(*rho + k1 * half));
            let k3 = self.eval(&(*rho + k2 * half));
            let k4 = self.eval(&(*rho + k3 * hc));
            *rho += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * (hc / 6.0);
        }
    }
}

/// Fixed-step RK4 of the secular master equation (populations and decoupled
/// coherences) in the energy eigenbasis.
pub fn integrate_secular(
    rho0: &CMat4,
    rates: &RateTable,
    spec: &SpectralDecomposition,
    t_end: f64,
    dt: f64,
) -> Result<CMat4> {
    check_time(t_end)?;
    check_step(dt, secular_step_bound(rates, spec))?;
    let rhs = SecularRhs::new(rates, spec);
    let mut rho = *rho0;
    rhs.advance(&mut rho, t_end, dt);
    Ok(rho)
}

/// Like [`integrate_secular`] but samples every time in an increasing grid.
pub fn integrate_secular_grid(
    rho0: &CMat4,
    rates: &RateTable,
    spec: &SpectralDecomposition,
    times: &[f64],
    dt: f64,
) -> Result<Vec<CMat4>> {
    check_step(dt, secular_step_bound(rates, spec))?;
    let rhs = SecularRhs::new(rates, spec);
    let mut rho = *rho0;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        check_time(t)?;
        if t < now {
            return Err(Error::NonIncreasingGrid(i));
        }
        rhs.advance(&mut rho, t - now, dt);
        now = t;
        out.push(rho);
    }
    Ok(out)
}

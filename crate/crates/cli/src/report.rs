//! Machine-readable summary of one scenario.

use serde::Serialize;
use serde_json::Value;

use relaxometer_core::bath::{coupling_weights, transition_rates_closed_form};
use relaxometer_core::observables::concurrence_any;
use relaxometer_core::oracle::{
    integrate_secular_grid, rate_frequency_domain, rate_time_domain, secular_step_bound, Branch,
};
use relaxometer_core::propagator::{persistent_coherences, RELAXATION_THRESHOLD};
use relaxometer_core::{von_neumann_entropy, Propagator, RMat4, RateTable, Relaxation, Topology};

use crate::config::{RequiredField, ScenarioConfig};
use crate::error::CliError;
use crate::output::json_number;

/// Window and sample count of the closed-form vs RK4 comparison.
const ORACLE_WINDOW: f64 = 100.0;
const ORACLE_SAMPLES: usize = 21;
/// Agreement required for a requested `oracle_max_deviation`.
const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Serialize)]
pub struct Scenario {
    pub delta: f64,
    pub v: f64,
    pub topology: String,
    pub kappa: f64,
    pub beta: Value,
    pub omega_c: f64,
    pub state: String,
}

#[derive(Debug, Serialize)]
pub struct RateBlock {
    /// `w[m][n]`: rate of the transition `n → m`.
    pub w: [[f64; 4]; 4],
    pub gamma: [[f64; 4]; 4],
}

#[derive(Debug, Serialize)]
pub struct Rates {
    pub first_principles: RateBlock,
    pub closed_form: RateBlock,
}

#[derive(Debug, Serialize)]
pub struct Equilibrium {
    pub basis: &'static str,
    pub populations: [f64; 4],
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
    /// Sup-norm distance to the Gibbs state at the bath temperature.
    pub gibbs_distance: f64,
}

#[derive(Debug, Serialize)]
pub struct RelaxationBlock {
    pub status: &'static str,
    pub threshold: f64,
    pub time: Option<f64>,
    pub horizon: Option<f64>,
    pub final_distance: Option<f64>,
    pub analytic_timescale: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Coherence {
    /// One-based eigenlevel labels.
    pub levels: [usize; 2],
    pub modulus: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleDeviation {
    /// Largest relative gap between the first-principles rates and numerical
    /// quadrature of the bath correlation function.
    pub rates_relative: f64,
    pub rates_route: &'static str,
    /// Largest sup-norm gap between closed-form and RK4 evolution.
    pub propagator_sup_norm: f64,
    pub propagator_window: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub rates: Rates,
    pub gamma_ratio: Option<f64>,
    pub equilibrium: Equilibrium,
    pub equilibrium_concurrence: f64,
    pub equilibrium_entropy_bits: f64,
    /// A number, or the string `"not converged"`.
    pub relaxation_time: Value,
    pub relaxation: RelaxationBlock,
    pub persistent_coherences: Vec<Coherence>,
    pub oracle_max_deviation: OracleDeviation,
}

fn rows(m: &RMat4) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn rate_block(rates: &RateTable) -> RateBlock {
    RateBlock { w: rows(&rates.w), gamma: rows(&rates.gamma) }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn rate_oracle(prop: &Propagator) -> Result<(f64, &'static str), CliError> {
    let spec = &prop.spec;
    let cfg = &prop.cfg;
    let weights = coupling_weights(spec, cfg.topology);
    let time_domain = cfg.beta.is_finite();
    let mut worst: f64 = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            if m == n || weights[(m, n)] == 0.0 {
                continue;
            }
            let omega = spec.omega(m, n);
            let integral = if time_domain {
                rate_time_domain(omega, cfg, Branch::Plus)?
            } else {
                rate_frequency_domain(omega, cfg, Branch::Plus)
            };
            let reference = 0.5 * weights[(m, n)] * integral;
            let got = prop.rates.w[(m, n)];
            if reference != 0.0 {
                worst = worst.max((got - reference).abs() / reference.abs());
            } else if got != 0.0 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok((worst, if time_domain { "time_domain" } else { "frequency_domain" }))
}

fn propagator_oracle(prop: &Propagator, cfg: &ScenarioConfig) -> Result<f64, CliError> {
    let times: Vec<f64> = (0..ORACLE_SAMPLES).map(|k| ORACLE_WINDOW * k as f64 / (ORACLE_SAMPLES - 1) as f64).collect();
    let dt = secular_step_bound(&prop.rates, &prop.spec);
    let rk4 = integrate_secular_grid(cfg.rho0.entries(), &prop.rates, &prop.spec, &times, dt)?;
    let mut worst: f64 = 0.0;
    for (&t, numeric) in times.iter().zip(&rk4) {
        let exact = prop.state_at(&cfg.rho0, t)?;
        let gap = (exact.entries() - numeric).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    Ok(worst)
}

pub fn build_report(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let prop = Propagator::from_params(&cfg.params, cfg.bath);
    let spec = &prop.spec;
    let closed = {
        let w = transition_rates_closed_form(spec, &cfg.bath);
        RateTable::from_transitions(w, cfg.bath.topology)?
    };

    let eq = prop.equilibrium(&cfg.rho0)?;
    let gibbs = {
        let two = Propagator::new(
            prop.spec.clone(),
            relaxometer_core::BathConfig { topology: Topology::TwoBath, ..cfg.bath },
        );
        two.equilibrium(&cfg.rho0)?
    };
    let relaxation = prop.relaxation_time(&cfg.rho0, RELAXATION_THRESHOLD, None)?;
    let relaxation_block = match relaxation {
        Relaxation::Converged { time, analytic_timescale } => RelaxationBlock {
            status: "converged",
            threshold: RELAXATION_THRESHOLD,
            time: Some(time),
            horizon: None,
            final_distance: None,
            analytic_timescale,
        },
        Relaxation::NotConverged { horizon, final_distance, analytic_timescale } => RelaxationBlock {
            status: "not converged",
            threshold: RELAXATION_THRESHOLD,
            time: None,
            horizon: Some(horizon),
            final_distance: Some(final_distance),
            analytic_timescale,
        },
    };
    let (rates_relative, rates_route) = rate_oracle(&prop)?;

    Ok(Report {
        scenario: Scenario {
            delta: cfg.params.delta,
            v: cfg.params.v,
            topology: cfg.bath.topology.to_string(),
            kappa: cfg.bath.kappa,
            beta: json_number(cfg.bath.beta),
            omega_c: cfg.bath.omega_c,
            state: cfg.state.name(),
        },
        rates: Rates { first_principles: rate_block(&prop.rates), closed_form: rate_block(&closed) },
        gamma_ratio: finite(prop.rates.gamma_ratio()),
        equilibrium: Equilibrium {
            basis: "eigen",
            populations: eq.populations(),
            re: std::array::from_fn(|i| std::array::from_fn(|j| eq.get(i, j).re)),
            im: std::array::from_fn(|i| std::array::from_fn(|j| eq.get(i, j).im)),
            gibbs_distance: eq.distance(&gibbs)?,
        },
        equilibrium_concurrence: concurrence_any(&eq, spec)?,
        equilibrium_entropy_bits: von_neumann_entropy(&eq)?,
        relaxation_time: match relaxation.time() {
            Some(t) => json_number(t),
            None => Value::from("not converged"),
        },
        relaxation: relaxation_block,
        persistent_coherences: persistent_coherences(&cfg.rho0, &prop.rates)
            .into_iter()
            .map(|c| Coherence { levels: [c.i + 1, c.j + 1], modulus: c.modulus })
            .collect(),
        oracle_max_deviation: OracleDeviation {
            rates_relative,
            rates_route,
            propagator_sup_norm: propagator_oracle(&prop, cfg)?,
            propagator_window: ORACLE_WINDOW,
        },
    })
}

/// Fails with the first requested field that did not converge.
pub fn check_required(report: &Report, required: &[RequiredField]) -> Result<(), CliError> {
    for field in required {
        let detail = match field {
            RequiredField::RelaxationTime => match (&report.relaxation.horizon, &report.relaxation.final_distance) {
                (Some(h), Some(d)) => Some(format!("distance {d:e} at horizon {h:e}")),
                _ => None,
            },
            RequiredField::GammaRatio => report.gamma_ratio.is_none().then(|| "gamma_13 vanishes".to_string()),
            RequiredField::OracleMaxDeviation => {
                let o = &report.oracle_max_deviation;
                let worst = o.rates_relative.max(o.propagator_sup_norm);
                (!(worst <= ORACLE_TOLERANCE)).then(|| format!("deviation {worst:e} exceeds {ORACLE_TOLERANCE:e}"))
            }
        };
        if let Some(detail) = detail {
            return Err(CliError::NotConverged { field: field.key().to_string(), detail });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn report(preset: &str, sets: &[&str]) -> Report {
        let mut raw = RawConfig::from_preset(preset).unwrap();
        for s in sets {
            raw.set(s).unwrap();
        }
        build_report(&raw.validate().unwrap()).unwrap()
    }

    #[test]
    fn two_bath_equilibrium_is_gibbs() {
        let r = report("fig1a", &[]);
        assert!(r.equilibrium.gibbs_distance <= 1e-6);
        assert!(r.oracle_max_deviation.rates_relative < 1e-8);
        assert!(r.oracle_max_deviation.propagator_sup_norm < 1e-8);
    }

    #[test]
    fn zero_temperature_single_bath_is_not_converged() {
        let r = report("fig4", &["beta=inf"]);
        assert_eq!(r.relaxation_time, Value::from("not converged"));
        assert!(r.gamma_ratio.is_none());
        assert_eq!(r.persistent_coherences.len(), 1);
        assert!(matches!(check_required(&r, &[RequiredField::RelaxationTime]), Err(CliError::NotConverged { .. })));
        assert!((r.equilibrium_entropy_bits - 1.0).abs() < 1e-3);
    }
}

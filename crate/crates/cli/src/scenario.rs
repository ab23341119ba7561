//! Trajectory tables for single runs and parameter sweeps.

use rayon::prelude::*;
use serde::Serialize;
use toml::Value;

use relaxometer_core::{ObservableSample, Propagator, SINGLET};

use crate::config::{RawConfig, ScenarioConfig, SweepAxis};
use crate::error::CliError;

pub const HEADER: [&str; 10] =
    ["t", "S_bits", "concurrence", "purity", "rho33", "re_rho12", "im_rho12", "re_rho13", "im_rho13", "dist_to_eq"];

/// One sample. Matrix entries refer to the energy eigenbasis with one-based
/// level labels, so `rho33` is the singlet population.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Row {
    pub t: f64,
    #[serde(rename = "S_bits")]
    pub s_bits: f64,
    pub concurrence: f64,
    pub purity: f64,
    pub rho33: f64,
    pub re_rho12: f64,
    pub im_rho12: f64,
    pub re_rho13: f64,
    pub im_rho13: f64,
    pub dist_to_eq: f64,
}

impl Row {
    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.s_bits,
            self.concurrence,
            self.purity,
            self.rho33,
            self.re_rho12,
            self.im_rho12,
            self.re_rho13,
            self.im_rho13,
            self.dist_to_eq,
        ]
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<Row>, CliError> {
    let prop = Propagator::from_params(&cfg.params, cfg.bath);
    let times = cfg.grid.times();
    let traj = prop.evolve(&cfg.rho0, &times)?;
    let eq = prop.equilibrium(&cfg.rho0)?;
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| {
            let obs = ObservableSample::new(t, rho, &prop.spec)?;
            let r12 = rho.get(0, 1);
            let r13 = rho.get(0, SINGLET);
            Ok(Row {
                t,
                s_bits: obs.entropy,
                concurrence: obs.concurrence,
                purity: obs.purity,
                rho33: rho.get(SINGLET, SINGLET).re,
                re_rho12: r12.re,
                im_rho12: r12.im,
                re_rho13: r13.re,
                im_rho13: r13.im,
                dist_to_eq: rho.distance(&eq)?,
            })
        })
        .collect()
}

/// Trajectories for each swept value, in input order.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub blocks: Vec<(f64, Vec<Row>)>,
}

/// Runs one scenario per value of `axis`, at most `jobs` at a time
/// (`0` lets the pool decide).
pub fn run_sweep(base: &RawConfig, axis: SweepAxis, values: &[f64], jobs: usize) -> Result<SweepTable, CliError> {
    if values.is_empty() {
        return Err(CliError::config("values", "empty value list"));
    }
    let configs = values
        .iter()
        .map(|&x| {
            let mut raw = base.clone();
            raw.insert(axis.key(), Value::Float(x));
            raw.table.remove("sweep");
            raw.table.remove("values");
            raw.validate()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<Result<Vec<Row>, CliError>> = pool.install(|| configs.par_iter().map(run_scenario).collect());
    let blocks = values.iter().zip(results).map(|(&x, rows)| rows.map(|r| (x, r))).collect::<Result<Vec<_>, _>>()?;
    Ok(SweepTable { axis, blocks })
}

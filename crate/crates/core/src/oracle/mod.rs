//! Independent numerical machinery used to validate the closed forms.
//!
//! Nothing in here evaluates the closed-form rate, population or coherence
//! expressions; agreement between this module and the rest of the crate is
//! therefore evidence rather than tautology.

mod eigh;
mod ode;
mod quadrature;

pub use eigh::{eigh, eigh4, sqrtm_psd, sqrtm_psd4, Eigh, PSD_SLACK, ROUNDOFF_FLOOR};
pub use ode::{
    integrate_populations, integrate_secular, integrate_secular_grid, population_step_bound, secular_step_bound,
};
pub use quadrature::{correlation_function, rate_frequency_domain, rate_time_domain, trigamma, Branch};

//! Acceptance suite: one line per criterion, nonzero exit status if any fails.
//!
//! Run with `cargo test -p relaxometer-core --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaxometer_core::bath::{
    transition_rates_closed_form, transition_rates_first_principles, BathConfig, RateTable, Topology,
};
use relaxometer_core::observables::{concurrence, concurrence_any, von_neumann_entropy};
use relaxometer_core::oracle::{
    integrate_populations, integrate_secular, integrate_secular_grid, population_step_bound, secular_step_bound,
};
use relaxometer_core::propagator::{Propagator, RELAXATION_THRESHOLD};
use relaxometer_core::spectral::{diagonalize, make_state, Basis, DensityMatrix, StatePreset, SystemParams};
use relaxometer_core::{CMat4, SINGLET};

const DELTA: f64 = 1.0;
const V: f64 = 0.7;
const KAPPA: f64 = 0.01;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn params() -> SystemParams {
    SystemParams::new(DELTA, V).unwrap()
}

fn propagator(topology: Topology, kappa: f64, beta: f64) -> Propagator {
    let cfg = BathConfig::with_default_cutoff(topology, kappa, beta, &params()).unwrap();
    Propagator::from_params(&params(), cfg)
}

fn presets() -> Vec<StatePreset> {
    vec![
        StatePreset::PsiA,
        StatePreset::PsiB,
        StatePreset::PsiC,
        StatePreset::PsiD,
        StatePreset::Mix1,
        StatePreset::Mix2,
        StatePreset::Gibbs(10.0),
    ]
}

fn random_state(rng: &mut ChaCha8Rng, basis: Basis) -> DensityMatrix {
    let rank = rng.gen_range(1..=4);
    let g = nalgebra::Matrix4xX::<Complex64>::from_fn(rank, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m: CMat4 = &g * g.adjoint();
    DensityMatrix::new(m / m.trace(), basis).unwrap()
}

fn random_su2(rng: &mut ChaCha8Rng) -> Matrix2<Complex64> {
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    Matrix2::new(a, -b.conj(), b, a.conj())
}

fn sup(m: &CMat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn log_grid(from: f64, to: f64, count: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend((0..count).map(|k| from * (to / from).powf(k as f64 / (count - 1) as f64)));
    grid
}

fn gibbs_thermalization() -> Outcome {
    let start = Instant::now();
    let prop = propagator(Topology::TwoBath, KAPPA, 10.0);
    let gibbs = DensityMatrix::from_diagonal(prop.spec.thermal_weights(10.0, [true; 4]), Basis::Eigen).unwrap();
    let mut worst: f64 = 0.0;
    for preset in presets() {
        let rho = make_state(&preset, &prop.spec).unwrap();
        let late = prop.state_at(&rho, 5000.0).unwrap();
        worst = worst.max(late.distance(&gibbs).unwrap());
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-6 && elapsed < 1.0,
        format!("max |ρ(5000) − Gibbs| = {worst:.2e} over 7 presets, runtime {elapsed:.3} s"),
    )
}

fn singlet_conservation() -> Outcome {
    let prop = propagator(Topology::SingleBath, KAPPA, 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut states: Vec<DensityMatrix> = presets().iter().map(|p| make_state(p, &prop.spec).unwrap()).collect();
    states.extend((0..5).map(|_| random_state(&mut rng, Basis::Eigen)));
    let checkpoints = log_grid(1e-2, 1e6, 80);

    let (mut closed, mut oracle): (f64, f64) = (0.0, 0.0);
    let dt = population_step_bound(&prop.rates.w);
    for rho in &states {
        let p0 = rho.populations();
        for &t in &checkpoints {
            let p = prop.state_at(rho, t).unwrap().get(SINGLET, SINGLET).re;
            closed = closed.max((p - p0[SINGLET]).abs());
        }
        let mut p = p0;
        let mut now = 0.0;
        for &t in &checkpoints {
            p = integrate_populations(&p, &prop.rates.w, t - now, dt).unwrap();
            now = t;
            oracle = oracle.max((p[SINGLET] - p0[SINGLET]).abs());
        }
    }
    outcome(
        closed <= 1e-12 && oracle <= 1e-9,
        format!("max |Δρ₃₃| over [0, 1e6]: closed form {closed:.2e}, RK4 {oracle:.2e}"),
    )
}

/// `|A|² e^{−βE_i}/Z₃` on levels 1, 2, 4 and `|B|²` on the singlet.
fn irreducible_equilibrium(energies: &[f64; 4], beta: f64, singlet: f64) -> [f64; 4] {
    let levels = [0usize, 1, 3];
    let ground = levels.iter().map(|&k| energies[k]).fold(f64::INFINITY, f64::min);
    let boltzmann = |k: usize| {
        if beta.is_infinite() {
            if energies[k] == ground {
                1.0
            } else {
                0.0
            }
        } else {
            (-beta * (energies[k] - ground)).exp()
        }
    };
    let z3: f64 = levels.iter().map(|&k| boltzmann(k)).sum();
    let mut p = [0.0; 4];
    for k in levels {
        p[k] = (1.0 - singlet) * boltzmann(k) / z3;
    }
    p[SINGLET] = singlet;
    p
}

fn non_gibbs_equilibrium() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for beta in [10.0, f64::INFINITY] {
        let prop = propagator(Topology::SingleBath, KAPPA, beta);
        let rho = make_state(&StatePreset::PsiD, &prop.spec).unwrap();
        let singlet = rho.get(SINGLET, SINGLET).re;
        let expected = if beta.is_infinite() {
            [0.5, 0.0, 0.5, 0.0]
        } else {
            irreducible_equilibrium(&prop.spec.energies, beta, 0.5)
        };
        let late = prop.state_at(&rho, 1e7).unwrap().populations();
        let dev = late.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev).max((singlet - 0.5).abs());
        details.push(format!("β={beta}: {dev:.2e}"));
    }
    outcome(worst <= 1e-6, format!("psi_d long-time diagonal vs irreducible-subspace Gibbs: {}", details.join(", ")))
}

fn zero_temperature_equilibrium() -> (DensityMatrix, Propagator) {
    let prop = propagator(Topology::SingleBath, KAPPA, f64::INFINITY);
    let rho = make_state(&StatePreset::PsiD, &prop.spec).unwrap();
    (prop.equilibrium(&rho).unwrap(), prop)
}

fn equilibrium_entropy() -> Outcome {
    let (eq, _) = zero_temperature_equilibrium();
    let s = von_neumann_entropy(&eq).unwrap();
    outcome((s - 1.0).abs() <= 1e-3, format!("S_eq(psi_d, T=0, one bath) = {s:.6} bits"))
}

fn equilibrium_concurrence() -> Outcome {
    let (eq, prop) = zero_temperature_equilibrium();
    let c = concurrence_any(&eq, &prop.spec).unwrap();
    outcome((c - 0.33).abs() <= 0.02, format!("C_eq(psi_d, T=0, one bath) = {c:.6}"))
}

fn semi_dfs_hierarchy() -> Outcome {
    let prop = propagator(Topology::SingleBath, KAPPA, 10.0);
    let ratio = prop.rates.gamma_ratio();
    let closed = RateTable::closed_form(&prop.spec, &prop.cfg).gamma_ratio();
    outcome((3e2..=3e3).contains(&ratio), format!("γ₁₂/γ₁₃ = {ratio:.1} (closed-form rates give {closed:.1})"))
}

fn order_of_magnitude(t: f64) -> i32 {
    t.log10().floor() as i32
}

fn relaxation_times(kappa: f64, beta: f64, states: &[StatePreset]) -> Vec<Option<f64>> {
    let prop = propagator(Topology::SingleBath, kappa, beta);
    states
        .iter()
        .map(|p| {
            let rho = make_state(p, &prop.spec).unwrap();
            prop.relaxation_time(&rho, RELAXATION_THRESHOLD, None).unwrap().time()
        })
        .collect()
}

fn relaxation_separation() -> Outcome {
    let fast = [StatePreset::PsiA, StatePreset::PsiB, StatePreset::Mix1, StatePreset::Mix2];
    let fast_times = relaxation_times(KAPPA, 10.0, &fast);
    let slow = relaxation_times(KAPPA, 10.0, &[StatePreset::PsiD])[0];
    let (Some(slow), true) = (slow, fast_times.iter().all(Option::is_some)) else {
        return outcome(false, "a relaxation time did not converge".into());
    };
    let fast_times: Vec<f64> = fast_times.into_iter().flatten().collect();
    let slowest_fast = fast_times.iter().copied().fold(0.0, f64::max);
    let fast_ok = fast_times.iter().all(|&t| (2..=3).contains(&order_of_magnitude(t)));
    let slow_ok = (5..=6).contains(&order_of_magnitude(slow));
    let ratio = slow / slowest_fast;
    outcome(
        fast_ok && slow_ok && ratio > 1e2,
        format!(
            "psi_a/psi_b/mix1/mix2: {}; psi_d: {slow:.3e}; ratio {ratio:.0}",
            fast_times.iter().map(|t| format!("{t:.0}")).collect::<Vec<_>>().join("/")
        ),
    )
}

fn mixed_state_non_interference() -> Outcome {
    let prop = propagator(Topology::SingleBath, KAPPA, 10.0);
    let a = make_state(&StatePreset::PsiA, &prop.spec).unwrap();
    let c = make_state(&StatePreset::PsiC, &prop.spec).unwrap();
    let mix = make_state(&StatePreset::Mix1, &prop.spec).unwrap();
    let times = log_grid(1e-2, 1e6, 400);
    let (ta, tc, tm) =
        (prop.evolve(&a, &times).unwrap(), prop.evolve(&c, &times).unwrap(), prop.evolve(&mix, &times).unwrap());
    let mut worst: f64 = 0.0;
    for k in 0..times.len() {
        let avg = ta.states[k].combine(0.5, &tc.states[k], 0.5).unwrap();
        worst = worst.max(tm.states[k].distance(&avg).unwrap());
    }
    let times = relaxation_times(KAPPA, 10.0, &[StatePreset::Mix1, StatePreset::Mix2]);
    let (Some(t1), Some(t2)) = (times[0], times[1]) else {
        return outcome(false, "mix relaxation did not converge".into());
    };
    let factor = (t1 / t2).max(t2 / t1);
    outcome(
        worst <= 1e-12 && factor <= 3.0,
        format!("max |E_t mix1 − (E_t ρ_a + E_t ρ_c)/2| = {worst:.2e}; relaxation mix1 {t1:.0} vs mix2 {t2:.0}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let times: Vec<f64> = (0..=100).map(f64::from).collect();
    let mut worst: f64 = 0.0;
    for topology in [Topology::TwoBath, Topology::SingleBath] {
        let prop = propagator(topology, KAPPA, 10.0);
        let dt = secular_step_bound(&prop.rates, &prop.spec);
        for _ in 0..20 {
            let rho = random_state(&mut rng, Basis::Eigen);
            let traj = prop.evolve(&rho, &times).unwrap();
            let rk4 = integrate_secular_grid(rho.entries(), &prop.rates, &prop.spec, &times, dt).unwrap();
            for (s, o) in traj.states.iter().zip(&rk4) {
                worst = worst.max(sup(&(s.entries() - o)));
            }
        }
    }

    let prop = propagator(Topology::SingleBath, KAPPA, 10.0);
    let rho = make_state(&StatePreset::PsiD, &prop.spec).unwrap();
    let t = 10.0;
    let exact = prop.state_at(&rho, t).unwrap();
    let bound = secular_step_bound(&prop.rates, &prop.spec);
    let error =
        |dt: f64| sup(&(integrate_secular(rho.entries(), &prop.rates, &prop.spec, t, dt).unwrap() - exact.entries()));
    let ratio = error(bound) / error(bound / 2.0);
    outcome(
        worst <= 1e-8 && (12.0..=20.0).contains(&ratio),
        format!("closed form vs RK4 sup-norm {worst:.2e} (40 random states, t ≤ 100); step-halving ratio {ratio:.2}"),
    )
}

fn structural_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();

    let mut balance: f64 = 0.0;
    let mut patterns_exact = true;
    let mut symmetry: f64 = 0.0;
    for _ in 0..100 {
        let p = SystemParams::new(rng.gen_range(0.05..3.0), rng.gen_range(0.0..3.0)).unwrap();
        let spec = diagonalize(&p);
        let beta = rng.gen_range(0.05..30.0);
        for topology in [Topology::TwoBath, Topology::SingleBath] {
            let cfg = BathConfig::with_default_cutoff(topology, rng.gen_range(1e-3..0.3), beta, &p).unwrap();
            for w in [transition_rates_first_principles(&spec, &cfg), transition_rates_closed_form(&spec, &cfg)] {
                for m in 0..4 {
                    for n in 0..4 {
                        let partner = (-beta * spec.omega(m, n)).exp() * w[(n, m)];
                        let scale = w[(m, n)].max(partner);
                        if scale > 0.0 {
                            balance = balance.max((w[(m, n)] - partner).abs() / scale);
                        }
                    }
                }
                let zeros: &[(usize, usize)] = match topology {
                    Topology::TwoBath => &[(3, 0), (0, 3), (2, 1), (1, 2)],
                    Topology::SingleBath => &[(0, 2), (1, 2), (3, 2), (2, 0), (2, 1), (2, 3), (0, 3), (3, 0)],
                };
                patterns_exact &= zeros.iter().all(|&(m, n)| w[(m, n)] == 0.0);
                if topology == Topology::TwoBath {
                    for ((a, b), (c, d)) in [((3, 2), (1, 0)), ((3, 1), (2, 0)), ((2, 3), (0, 1)), ((1, 3), (0, 2))] {
                        let scale = w[(a, b)].abs().max(w[(c, d)].abs());
                        if scale > 0.0 {
                            symmetry = symmetry.max((w[(a, b)] - w[(c, d)]).abs() / scale);
                        }
                    }
                }
            }
        }
    }
    if balance > 1e-10 {
        failures.push("detailed balance");
    }
    if !patterns_exact {
        failures.push("zero patterns");
    }
    if symmetry > 1e-12 {
        failures.push("level-symmetry equalities");
    }

    let (mut trace, mut herm, mut min_eig): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    let grid = log_grid(1e-2, 1e6, 60);
    for topology in [Topology::TwoBath, Topology::SingleBath] {
        for beta in [1.0, 10.0, f64::INFINITY] {
            let prop = propagator(topology, KAPPA, beta);
            let mut states: Vec<DensityMatrix> = presets().iter().map(|p| make_state(p, &prop.spec).unwrap()).collect();
            states.extend((0..5).map(|_| random_state(&mut rng, Basis::Eigen)));
            for rho in &states {
                for s in prop.evolve(rho, &grid).unwrap().states {
                    trace = trace.max((s.trace() - Complex64::from(1.0)).norm());
                    herm = herm.max(s.hermiticity_error());
                    min_eig = min_eig.min(s.eigenvalues().unwrap()[0]);
                }
            }
        }
    }
    if trace > 1e-10 || herm > 1e-10 || min_eig < -1e-9 {
        failures.push("trajectory physicality");
    }

    let mut lu: f64 = 0.0;
    for _ in 0..200 {
        let rho = random_state(&mut rng, Basis::Computational);
        let u = random_su2(&mut rng).kronecker(&random_su2(&mut rng));
        let u = CMat4::from_fn(|i, j| u[(i, j)]);
        let rotated = DensityMatrix::new(u * rho.entries() * u.adjoint(), Basis::Computational).unwrap();
        lu = lu.max((concurrence(&rho).unwrap() - concurrence(&rotated).unwrap()).abs());
    }
    if lu > 1e-8 {
        failures.push("local-unitary invariance");
    }

    let mut werner: f64 = 0.0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell =
        DensityMatrix::from_pure(nalgebra::Vector4::new(h, 0.0, 0.0, h).map(Complex64::from), Basis::Computational)
            .unwrap();
    let mixed = DensityMatrix::from_diagonal([0.25; 4], Basis::Computational).unwrap();
    for k in 0..=100 {
        let p = k as f64 / 100.0;
        let rho = bell.combine(p, &mixed, 1.0 - p).unwrap();
        let expected = (0.5 * (3.0 * p - 1.0)).max(0.0);
        werner = werner.max((concurrence(&rho).unwrap() - expected).abs());
    }
    if werner > 1e-9 {
        failures.push("Werner concurrence");
    }

    let summary = format!(
        "detailed balance {balance:.1e}; zero patterns {}; W₄₃=W₂₁, W₄₂=W₃₁ to {symmetry:.1e}; trace {trace:.1e}, Hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}; local-unitary {lu:.1e}; Werner {werner:.1e}",
        if patterns_exact { "exact" } else { "broken" }
    );
    if failures.is_empty() {
        outcome(true, summary)
    } else {
        outcome(false, format!("{summary} [failed: {}]", failures.join(", ")))
    }
}

fn concurrence_revival() -> Outcome {
    let prop = propagator(Topology::SingleBath, KAPPA, 20.0);
    let rho = make_state(&StatePreset::PsiA, &prop.spec).unwrap();
    let Some(relaxed) = prop.relaxation_time(&rho, RELAXATION_THRESHOLD, None).unwrap().time() else {
        return outcome(false, "psi_a did not relax".into());
    };
    let dt = 0.05;
    let count = (relaxed / dt).ceil() as usize;
    let times: Vec<f64> = (0..=count).map(|k| k as f64 * dt).collect();
    let traj = prop.evolve(&rho, &times).unwrap();
    let c: Vec<f64> = traj.states.iter().map(|s| concurrence_any(s, &prop.spec).unwrap()).collect();
    let Some(death) = c.iter().position(|&x| x <= 1e-3) else {
        return outcome(
            false,
            format!("C never reached 1e-3 before t = {relaxed:.0} (min {:.3e})", c.iter().copied().fold(1.0, f64::min)),
        );
    };
    match c[death..].iter().position(|&x| x > 0.01) {
        Some(k) => outcome(
            true,
            format!(
                "C ≤ 1e-3 at t = {:.2}, back above 0.01 at t = {:.2}, relaxation at t = {relaxed:.0}",
                times[death],
                times[death + k]
            ),
        ),
        None => outcome(false, format!("no revival after t = {:.2}", times[death])),
    }
}

fn coupling_scaling() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (topology, preset) in [
        (Topology::SingleBath, StatePreset::PsiA),
        (Topology::SingleBath, StatePreset::PsiD),
        (Topology::TwoBath, StatePreset::PsiB),
    ] {
        let fitted = |kappa: f64| -> Option<f64> {
            let prop = propagator(topology, kappa, 10.0);
            let rho = make_state(&preset, &prop.spec).unwrap();
            let relaxed = prop.relaxation_time(&rho, RELAXATION_THRESHOLD, None).unwrap().time()?;
            prop.fitted_decay_rate(&rho, relaxed, 3.0 * relaxed, 200).unwrap()
        };
        let (Some(r1), Some(r2)) = (fitted(KAPPA), fitted(2.0 * KAPPA)) else {
            return outcome(false, format!("{} {topology}: no fitted rate", preset.name()));
        };
        let ratio = (1.0 / r2) / (1.0 / r1);
        worst = worst.max((ratio - 0.5).abs() / 0.5);
        details.push(format!("{} {topology}: τ(2κ)/τ(κ) = {ratio:.4}", preset.name()));
    }
    outcome(worst <= 0.05, details.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Gibbs thermalization (two baths)", gibbs_thermalization),
        ("singlet conservation (one bath)", singlet_conservation),
        ("non-Gibbs equilibrium (one bath)", non_gibbs_equilibrium),
        ("equilibrium entropy", equilibrium_entropy),
        ("equilibrium concurrence", equilibrium_concurrence),
        ("semi-DFS rate hierarchy", semi_dfs_hierarchy),
        ("relaxation-time separation", relaxation_separation),
        ("mixed-state non-interference", mixed_state_non_interference),
        ("oracle equivalence", oracle_equivalence),
        ("structural invariants", structural_invariants),
        ("concurrence revival", concurrence_revival),
        ("coupling scaling", coupling_scaling),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2}. {name}: {}", k + 1, result.detail);
        if !result.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Reference values come from test-side oracles: decay factors from the
//! matrix exponential of the two-state telegraph generator, phase-density
//! integrals by Simpson's rule, and direct formulas for the sinc envelopes
//! and the X-state discord.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qnoise::evolver::{
    average_rtn_mc, average_static_mc_grid, average_static_quadrature, closed_form_rtn, closed_form_static,
    ClosedFormCoefficients,
};
use qnoise::matcore::eigvals_hermitian;
use qnoise::noisegen::{rtn_phase_continuous_cdf, rtn_phase_pdf, sample_rtn_trajectory, stream_rng};
use qnoise::qcorr::{discord, negativity};
use qnoise::runner::{average_states, emit_csv, extract_features, run_scenario};
use qnoise::{
    DensityMatrix, HamiltonianSpec, Mat2, McSettings, Method, NoiseKind, OptimizerSettings, RtnSpec,
    ScenarioConfig, StaticNoiseSpec, Subsystem, Topology,
};

const MC_SEED: u64 = 42;
const MC_SAMPLES: usize = 100_000;

/// `<e^{i a phi}>` for a stationary +-1 telegraph process flipping at rate
/// `gamma`, from `1^T exp(M t) 1 / 2` with
/// `M = [[-gamma - i a, gamma], [gamma, -gamma + i a]]`.
fn oracle_d(a: f64, gamma: f64, t: f64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let g = Complex64::new(gamma, 0.0);
    let m = Matrix2::new(-g - i * a, g, g, -g + i * a) * Complex64::new(t, 0.0);
    let e = m.exp();
    (0.5 * (e[(0, 0)] + e[(0, 1)] + e[(1, 0)] + e[(1, 1)])).re
}

fn oracle_sinc(x: f64) -> f64 {
    if x == 0.0 { 1.0 } else { x.sin() / x }
}

fn oracle_discord(lambda: f64) -> f64 {
    let f = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
    0.5 * (f(1.0 + lambda.abs()) + f(1.0 - lambda.abs()))
}

fn oracle_lambda(nu: f64, gamma: f64, topo: Topology, t: f64) -> f64 {
    match topo {
        Topology::Separate => oracle_d(2.0 * nu, gamma, t).powi(2),
        Topology::Common => oracle_d(4.0 * nu, gamma, t),
    }
}

fn grid(n: usize, t_max: f64) -> Vec<f64> {
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn h1() -> HamiltonianSpec {
    HamiltonianSpec::with_nu(1.0).unwrap()
}

fn criterion_1() -> Outcome {
    let h = h1();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c0 = rng.random_range(-2.0..2.0);
        let dc = rng.random_range(0.05..3.0);
        let x = rng.random_range(0.0..=50.0);
        let n = StaticNoiseSpec::new(c0, dc).unwrap();
        let t = x / dc;
        for topo in [Topology::Separate, Topology::Common] {
            let q = average_static_quadrature(&h, &n, topo, t, 64).unwrap();
            let c = closed_form_static(&h, &n, topo, t).unwrap();
            worst = worst.max(q.mat().max_abs_diff(c.mat()));
        }
    }
    outcome(worst <= 1e-9, format!("max |rho_quad - rho_closed| = {worst:.3e} (tol 1e-9, 100 draws x 2 topologies, 64 nodes)"))
}

fn criterion_2() -> Outcome {
    let h = h1();
    let mut worst: f64 = 0.0;
    let mut negative_points = 0;
    for (c0, dc) in [(1.0, 1.0), (0.3, 2.5)] {
        let n = StaticNoiseSpec::new(c0, dc).unwrap();
        for k in 0..1000 {
            let x = 30.0 * k as f64 / 999.0;
            let t = x / dc;
            let sep = negativity(&closed_form_static(&h, &n, Topology::Separate, t).unwrap()).unwrap();
            let com = negativity(&closed_form_static(&h, &n, Topology::Common, t).unwrap()).unwrap();
            let printed = oracle_sinc(2.0 * x);
            if printed < 0.0 {
                negative_points += 1;
            }
            worst = worst.max((sep - oracle_sinc(x).powi(2)).abs()).max((com - printed.abs()).abs());
        }
    }
    outcome(
        worst <= 1e-12 && negative_points > 0,
        format!("max |N - envelope| = {worst:.3e} (tol 1e-12, 2x1000 points, {negative_points} with sin(2x)/(2x) < 0)"),
    )
}

fn criterion_3() -> Outcome {
    let h = h1();
    let mut worst: f64 = 0.0;
    for ratio in [0.2, 5.0] {
        let r = RtnSpec::new(1.0 / ratio).unwrap();
        for t in grid(1000, 20.0) {
            for topo in [Topology::Separate, Topology::Common] {
                let n = negativity(&closed_form_rtn(&h, &r, topo, t).unwrap()).unwrap();
                let want = oracle_lambda(1.0, r.gamma, topo, t).abs();
                worst = worst.max((n - want).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("max |N - D-envelope| = {worst:.3e} (tol 1e-12, nu/gamma in {{0.2, 5}}, 1000 points)"))
}

fn criterion_4() -> Outcome {
    let h = h1();
    let times = grid(101, 20.0);
    let settings = McSettings::new(MC_SAMPLES, MC_SEED);
    let opt = OptimizerSettings::default();
    let mut cells = Vec::new();
    let mut pass = true;
    let mut record = |label: String, mc: Vec<DensityMatrix>, reference: &dyn Fn(f64) -> (f64, f64)| {
        let (mut dn, mut dq) = (0.0f64, 0.0f64);
        for (rho, &t) in mc.iter().zip(&times) {
            let (n_ref, q_ref) = reference(t);
            dn = dn.max((negativity(rho).unwrap() - n_ref).abs());
            dq = dq.max((discord(rho, &opt).unwrap() - q_ref).abs());
        }
        let ok = dn <= 5e-3 && dq <= 5e-3;
        pass &= ok;
        cells.push(format!("{label}: dN={dn:.2e} dQ={dq:.2e}{}", if ok { "" } else { " <- over" }));
    };
    let n = StaticNoiseSpec::new(1.0, 1.0).unwrap();
    for topo in [Topology::Separate, Topology::Common] {
        let mc = average_static_mc_grid(&h, &n, topo, &times, &settings).unwrap();
        let x_ref = |t: f64| {
            let x = n.delta_c * t;
            let n_ref = match topo {
                Topology::Separate => oracle_sinc(x).powi(2),
                Topology::Common => oracle_sinc(2.0 * x).abs(),
            };
            (n_ref, discord(&closed_form_static(&h, &n, topo, t).unwrap(), &opt).unwrap())
        };
        record(format!("static {topo}"), mc, &x_ref);
    }
    for ratio in [0.2, 5.0] {
        let r = RtnSpec::new(1.0 / ratio).unwrap();
        for topo in [Topology::Separate, Topology::Common] {
            let mc = average_rtn_mc(&h, &r, topo, &times, &settings).unwrap();
            let reference = |t: f64| {
                let l = oracle_lambda(1.0, r.gamma, topo, t);
                (l.abs(), oracle_discord(l))
            };
            record(format!("rtn nu/gamma={ratio} {topo}"), mc, &reference);
        }
    }
    outcome(
        pass,
        format!("seed {MC_SEED}, {MC_SAMPLES} samples, 101 points on [0, 20], tol 5e-3; {}", cells.join("; ")),
    )
}

fn criterion_5() -> Outcome {
    let opt = OptimizerSettings::default();
    let mut worst: f64 = 0.0;
    let mut endpoints = Vec::new();
    for k in 0..=10 {
        let l = k as f64 / 10.0;
        let q = discord(&ClosedFormCoefficients::Rtn { lambda: l }.state(), &opt).unwrap();
        worst = worst.max((q - oracle_discord(l)).abs());
        if k == 0 || k == 10 {
            endpoints.push(q);
        }
    }
    let exact = endpoints[0] == 0.0 && endpoints[1] == 1.0;
    outcome(
        worst <= 1e-4 && exact,
        format!("max |Q_num - Q_closed| = {worst:.3e} bits (tol 1e-4); Q(0) = {:e}, Q(1) = {}", endpoints[0], endpoints[1]),
    )
}

/// Simpson's rule on `phi = -nu t cos(theta)`, `theta in [0, pi]`.
fn oracle_phase_moment(nu: f64, gamma: f64, t: f64, f: impl Fn(f64) -> f64) -> f64 {
    let steps = 4000;
    let dth = PI / steps as f64;
    let mut acc = 0.0;
    for k in 0..=steps {
        let th = k as f64 * dth;
        let phi = -nu * t * th.cos();
        let jac = nu * t * th.sin();
        let p = if k == 0 || k == steps { 0.0 } else { rtn_phase_pdf(nu, gamma, t, phi).unwrap().continuous_density };
        let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(phi) * p * jac;
    }
    acc * dth / 3.0
}

fn criterion_6() -> Outcome {
    let nu = 1.0;
    let (mut mass_err, mut moment_err) = (0.0f64, 0.0f64);
    let values = [0.1, 0.5, 1.0, 2.0, 5.0];
    for &gt in &values {
        for &nt in &values {
            let t = nt / nu;
            let gamma = gt / t;
            let atom = rtn_phase_pdf(nu, gamma, t, 0.0).unwrap().atom_weight;
            let cont = rtn_phase_continuous_cdf(nu, gamma, t, nu * t).unwrap();
            mass_err = mass_err.max((2.0 * atom + cont - 1.0).abs());
            let moment = oracle_phase_moment(nu, gamma, t, f64::cos) + 2.0 * atom * (nu * t).cos();
            moment_err = moment_err.max((moment - oracle_d(nu, gamma, t)).abs());
        }
    }

    let ks = |gamma: f64, t: f64| -> f64 {
        let r = RtnSpec::new(gamma).unwrap();
        let mut phis: Vec<f64> = (0..MC_SAMPLES as u64)
            .map(|i| {
                let mut rng = stream_rng(7, i);
                sample_rtn_trajectory(&r, t, &mut rng).unwrap().accumulate_phase(nu, t).unwrap().phi
            })
            .collect();
        phis.sort_by(f64::total_cmp);
        let w = nu * t;
        let atom = 0.5 * (-gamma * t).exp();
        // (F(x-), F(x)) with atoms at -w and +w.
        let cdf = |x: f64| -> (f64, f64) {
            let cont = rtn_phase_continuous_cdf(nu, gamma, t, x.min(w)).unwrap();
            let ind = |b: bool| if b { atom } else { 0.0 };
            (ind(x > -w) + cont + ind(x > w), ind(x >= -w) + cont + ind(x >= w))
        };
        let n = phis.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < phis.len() {
            let x = phis[i];
            let mut j = i;
            while j < phis.len() && phis[j] == x {
                j += 1;
            }
            let (f_left, f_right) = cdf(x);
            d = d.max((i as f64 / n - f_left).abs()).max((j as f64 / n - f_right).abs());
            i = j;
        }
        d
    };
    let ks_markov = ks(5.0, 2.0);
    let ks_slow = ks(0.2, 2.0);
    outcome(
        mass_err <= 1e-8 && moment_err <= 1e-6 && ks_markov <= 0.01 && ks_slow <= 0.01,
        format!(
            "mass err {mass_err:.2e} (tol 1e-8); |<e^(i phi)> - D| {moment_err:.2e} (tol 1e-6, 5x5 grid); KS {ks_markov:.2e}, {ks_slow:.2e} (tol 0.01, 1e5 samples)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let nm = ScenarioConfig::preset("fig2-nonmarkov").unwrap();
    let nu = nm.nu;
    let gamma = nm.effective_gamma();
    let step = nm.t_max / (nm.n_points - 1) as f64;
    let common = run_scenario(&ScenarioConfig { topologies: vec![Topology::Common], ..nm.clone() }).unwrap();
    let f = extract_features(&common[0].times, &common[0].negativity(), nm.threshold);
    let delta = ((4.0 * nu).powi(2) - gamma * gamma).sqrt();
    let t_star = nu * (PI - (delta / gamma).atan()) / delta;
    let first = f.death_times.first().copied();
    let death_ok = first.is_some_and(|d| (d - t_star).abs() <= step);
    let revival = first.and_then(|d| f.revival_peaks.iter().find(|p| p.0 > d).copied());
    let revival_ok = revival.is_some_and(|p| p.1 > 1e-2);

    let markov = ScenarioConfig::preset("fig2-markov").unwrap();
    let markov_deaths: usize = run_scenario(&markov)
        .unwrap()
        .iter()
        .map(|c| extract_features(&c.times, &c.negativity(), markov.threshold).death_times.len())
        .sum();
    outcome(
        death_ok && revival_ok && markov_deaths == 0,
        format!(
            "first death {first:?} vs t* = {t_star:.6} (step {step}); revival {revival:?} (> 1e-2); markov deaths {markov_deaths}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let fig1 = ScenarioConfig::preset("fig1-static").unwrap();
    let curves = run_scenario(&fig1).unwrap();
    let peaks = |topo: Topology| {
        let c = curves.iter().find(|c| c.provenance.topology == topo).unwrap();
        extract_features(&c.times, &c.negativity(), fig1.threshold).revival_peaks
    };
    let (de, ce) = (peaks(Topology::Separate), peaks(Topology::Common));
    let pairs = de.len().min(ce.len());
    let static_ok = pairs >= 1 && (0..pairs).all(|k| ce[k].1 > de[k].1);

    let markov = ScenarioConfig::preset("fig2-markov").unwrap();
    let curves = run_scenario(&markov).unwrap();
    let sep = curves.iter().find(|c| c.provenance.topology == Topology::Separate).unwrap();
    let com = curves.iter().find(|c| c.provenance.topology == Topology::Common).unwrap();
    let violations = sep
        .times
        .iter()
        .zip(sep.negativity().iter().zip(com.negativity()))
        .filter(|(&t, (&d, c))| t > 0.0 && *c > d)
        .count();
    outcome(
        static_ok && violations == 0,
        format!("static: {pairs} peak pairs compared, ce > de for all = {static_ok}; markov: {violations} points with N_ce > N_de"),
    )
}

fn sanity(rho: &DensityMatrix, marginal_tol: f64) -> Result<(), String> {
    let m = rho.mat();
    let herm = m.hermiticity_defect();
    let tr = (m.trace() - 1.0).norm();
    let min_ev = eigvals_hermitian(m).map_err(|e| e.to_string())?[0];
    let half = Mat2::identity().scale(0.5);
    let marg = rho.reduced(Subsystem::A).max_abs_diff(&half).max(rho.reduced(Subsystem::B).max_abs_diff(&half));
    if herm > 1e-12 || tr > 1e-12 || min_ev < -1e-10 || marg > marginal_tol {
        return Err(format!("herm {herm:e} trace {tr:e} min eig {min_ev:e} marginal {marg:e}"));
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    let base = ScenarioConfig { t_max: 20.0, n_points: 41, n_samples: 20_000, ..ScenarioConfig::default() };
    let scenarios = [
        (NoiseKind::Static, vec![Method::ClosedForm, Method::Quadrature, Method::Mc], None),
        (NoiseKind::Rtn, vec![Method::ClosedForm, Method::Mc], Some(0.2)),
        (NoiseKind::Rtn, vec![Method::ClosedForm, Method::Mc], Some(5.0)),
    ];
    for (noise, methods, ratio) in scenarios {
        for method in methods {
            for topo in [Topology::Separate, Topology::Common] {
                let cfg = ScenarioConfig { noise, nu_over_gamma: ratio, ..base.clone() };
                // Every realization has exactly maximally mixed marginals, so the
                // Monte Carlo marginals carry only rounding error.
                let marginal_tol = 1e-12;
                for (k, rho) in average_states(&cfg, method, topo).unwrap().iter().enumerate() {
                    checked += 1;
                    if let Err(e) = sanity(rho, marginal_tol) {
                        failures.push(format!("{noise} {method} {topo} #{k}: {e}"));
                    }
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} states checked; {} failures {:?}", failures.len(), failures.first()))
}

fn criterion_10() -> Outcome {
    let mut results = Vec::new();
    for preset in ["fig1-static", "fig2-nonmarkov"] {
        let cfg = ScenarioConfig { methods: vec![Method::Mc], ..ScenarioConfig::preset(preset).unwrap() };
        let one = emit_csv(&run_scenario(&ScenarioConfig { workers: Some(1), ..cfg.clone() }).unwrap());
        let eight = emit_csv(&run_scenario(&ScenarioConfig { workers: Some(8), ..cfg }).unwrap());
        results.push((preset, one == eight, one.len()));
    }
    outcome(results.iter().all(|r| r.1), format!("mc csv 1 vs 8 workers identical: {results:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed form vs quadrature (static)", criterion_1),
        ("static negativity identity", criterion_2),
        ("rtn closed-form consistency", criterion_3),
        ("monte carlo convergence", criterion_4),
        ("discord oracle", criterion_5),
        ("phase distribution", criterion_6),
        ("sudden death and revival", criterion_7),
        ("topology orderings", criterion_8),
        ("state sanity", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {status} {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

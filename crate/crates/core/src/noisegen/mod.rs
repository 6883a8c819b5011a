//! Classical noise processes driving the qubits.
//!
//! Static disorder is a flat-distributed constant per realization. Random
//! telegraph noise (RTN) switches between `-1` and `+1` at Poisson rate
//! `gamma`; trajectories are sampled event by event so accumulated phases
//! are exact. Every random consumer takes an explicit generator, and
//! [`stream_rng`] derives one independent stream per realization index.

pub mod bessel;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Generator for realization `index` under master `seed`.
///
/// Streams are disjoint ChaCha keystreams, so the draws for one realization
/// never depend on how realizations are distributed over workers.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Flat distribution on `[c0 - delta_c/2, c0 + delta_c/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticNoiseSpec {
    pub c0: f64,
    pub delta_c: f64,
}

impl StaticNoiseSpec {
    pub fn new(c0: f64, delta_c: f64) -> Result<Self> {
        if !(delta_c > 0.0 && delta_c.is_finite()) || !c0.is_finite() {
            return Err(Error::Usage(format!(
                "static noise needs finite c0 and delta_c > 0 (got c0 = {c0}, delta_c = {delta_c})"
            )));
        }
        Ok(StaticNoiseSpec { c0, delta_c })
    }

    pub fn lower(&self) -> f64 {
        self.c0 - 0.5 * self.delta_c
    }

    pub fn upper(&self) -> f64 {
        self.c0 + 0.5 * self.delta_c
    }

    /// `<dc dc> = delta_c^2 / 12`.
    pub fn variance(&self) -> f64 {
        self.delta_c * self.delta_c / 12.0
    }
}

pub fn sample_static<R: Rng + ?Sized>(spec: &StaticNoiseSpec, rng: &mut R) -> f64 {
    spec.lower() + spec.delta_c * rng.random::<f64>()
}

/// Telegraph process switching rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtnSpec {
    pub gamma: f64,
}

impl RtnSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Usage(format!("RTN switching rate must be > 0 (got {gamma})")));
        }
        Ok(RtnSpec { gamma })
    }
}

/// One realization of the telegraph process on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RtnTrajectory {
    pub initial_value: i8,
    /// Strictly increasing, all `< horizon`.
    pub flip_times: Vec<f64>,
    pub horizon: f64,
}

/// Accumulated phase `phi(t) = -nu * int_0^t c(t') dt'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub phi: f64,
}

impl RtnTrajectory {
    /// `c(t)`, right-continuous at flips.
    pub fn value_at(&self, t: f64) -> i8 {
        let flips = self.flip_times.partition_point(|&s| s <= t);
        if flips % 2 == 0 {
            self.initial_value
        } else {
            -self.initial_value
        }
    }

    pub fn flips_before(&self, t: f64) -> usize {
        self.flip_times.partition_point(|&s| s < t)
    }

    /// Exact phase at time `t`.
    pub fn accumulate_phase(&self, nu: f64, t: f64) -> Result<PhaseSample> {
        Ok(PhaseSample {
            phi: self.phases_on_grid(nu, &[t])?[0],
        })
    }

    /// Exact phases at every time of an ascending grid, one pass over the flips.
    pub fn phases_on_grid(&self, nu: f64, times: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(times.len());
        let mut integral = 0.0;
        let mut last_time = 0.0;
        let mut value = f64::from(self.initial_value);
        let mut next_flip = 0;
        for &t in times {
            if t > self.horizon || t < 0.0 {
                return Err(Error::Usage(format!(
                    "phase requested at t = {t}, outside trajectory horizon [0, {}]",
                    self.horizon
                )));
            }
            if t < last_time {
                return Err(Error::Usage("phase grid must be ascending".into()));
            }
            while next_flip < self.flip_times.len() && self.flip_times[next_flip] < t {
                let s = self.flip_times[next_flip];
                integral += value * (s - last_time);
                last_time = s;
                value = -value;
                next_flip += 1;
            }
            integral += value * (t - last_time);
            last_time = t;
            out.push(-nu * integral);
        }
        Ok(out)
    }
}

/// Event-driven sample: stationary `+-1` start, exponential waiting times.
pub fn sample_rtn_trajectory<R: Rng + ?Sized>(
    spec: &RtnSpec,
    horizon: f64,
    rng: &mut R,
) -> Result<RtnTrajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Usage(format!("trajectory horizon must be > 0 (got {horizon})")));
    }
    let initial_value = if rng.random_bool(0.5) { 1 } else { -1 };
    let waiting = Exp::new(spec.gamma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut flip_times = Vec::new();
    let mut t = waiting.sample(rng);
    while t < horizon {
        flip_times.push(t);
        t += waiting.sample(rng);
    }
    Ok(RtnTrajectory {
        initial_value,
        flip_times,
        horizon,
    })
}

/// Relative width of the window around `gamma = m nu` where the critical limit is used.
pub const CRITICAL_BAND: f64 = 1e-9;

/// Averaged RTN phase factor `<e^{i m phi(t)}>` for effective coupling `m nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFactor {
    pub m: u32,
    pub value: f64,
}

impl DecayFactor {
    pub fn evaluate(m: u32, nu: f64, gamma: f64, t: f64) -> Self {
        DecayFactor {
            m,
            value: d_factor(f64::from(m) * nu, gamma, t),
        }
    }
}

/// `D(t) = e^{-gamma t}[cosh(delta t) + (gamma/delta) sinh(delta t)]` for `gamma > m nu`,
/// the `cos`/`sin` form for `gamma < m nu`, `delta = sqrt(|gamma^2 - (m nu)^2|)`.
pub fn d_factor(m_nu: f64, gamma: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if (gamma - m_nu).abs() <= CRITICAL_BAND * gamma {
        d_factor_critical(gamma, t)
    } else if gamma > m_nu {
        d_factor_overdamped(m_nu, gamma, t)
    } else {
        d_factor_underdamped(m_nu, gamma, t)
    }
}

pub(crate) fn d_factor_critical(gamma: f64, t: f64) -> f64 {
    let gt = gamma * t;
    (-gt).exp() * (1.0 + gt)
}

pub(crate) fn d_factor_overdamped(m_nu: f64, gamma: f64, t: f64) -> f64 {
    let delta = ((gamma - m_nu) * (gamma + m_nu)).sqrt();
    let x = delta * t;
    if x < 20.0 {
        (-gamma * t).exp() * (x.cosh() + gamma * t * (x.sinh() / x))
    } else {
        // gamma - delta = (m nu)^2 / (gamma + delta), without cancellation.
        let slow = m_nu * m_nu / (gamma + delta);
        let fast = gamma + delta;
        let r = gamma / delta;
        0.5 * ((1.0 + r) * (-slow * t).exp() + (1.0 - r) * (-fast * t).exp())
    }
}

pub(crate) fn d_factor_underdamped(m_nu: f64, gamma: f64, t: f64) -> f64 {
    let delta = ((m_nu - gamma) * (m_nu + gamma)).sqrt();
    let x = delta * t;
    (-gamma * t).exp() * (x.cos() + (gamma / delta) * x.sin())
}

/// Phase distribution at one point: the continuous density and the weight of
/// each of the two atoms at `phi = +-nu t` (trajectories that never flipped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDensity {
    pub continuous_density: f64,
    pub atom_weight: f64,
}

/// RTN phase distribution. The continuous part lives on the open window `|phi| < nu t`:
///
/// `p(phi) = (gamma / 2 nu) e^{-gamma t} [I_0(gamma t s) + I_1(gamma t s)/s]`,
/// `s = sqrt(1 - (phi / nu t)^2)`.
pub fn rtn_phase_pdf(nu: f64, gamma: f64, t: f64, phi: f64) -> Result<PhaseDensity> {
    if !(t > 0.0 && nu > 0.0 && gamma > 0.0) {
        return Err(Error::Domain(format!(
            "phase density needs t, nu, gamma > 0 (got t = {t}, nu = {nu}, gamma = {gamma})"
        )));
    }
    let atom_weight = 0.5 * (-gamma * t).exp();
    let width = nu * t;
    let u = phi / width;
    if u.abs() >= 1.0 {
        return Ok(PhaseDensity {
            continuous_density: 0.0,
            atom_weight,
        });
    }
    let s = (1.0 - u * u).sqrt();
    let a = gamma * t;
    // e^{-a} I_k(a s) = e^{-a (1 - s)} i_ke(a s)
    let damp = (-a * (1.0 - s)).exp();
    let bracket = bessel::i0e(a * s) + bessel::i1e(a * s) / s;
    Ok(PhaseDensity {
        continuous_density: 0.5 * (gamma / nu) * damp * bracket,
        atom_weight,
    })
}

const CDF_NODES: usize = 64;

/// Continuous-part mass on `(-nu t, phi]`.
///
/// Substituting `phi = -nu t cos(theta)` turns the integrand into the entire
/// function `(a/2) e^{-a}[I_0(a sin) sin + I_1(a sin)]`, `a = gamma t`.
pub fn rtn_phase_continuous_cdf(nu: f64, gamma: f64, t: f64, phi: f64) -> Result<f64> {
    rtn_phase_pdf(nu, gamma, t, 0.0)?;
    let u = (phi / (nu * t)).clamp(-1.0, 1.0);
    let theta_max = (-u).acos();
    if theta_max == 0.0 {
        return Ok(0.0);
    }
    let a = gamma * t;
    let rule = GaussLegendre::new(CDF_NODES)?;
    // Split so each panel spans at most pi/4 of theta.
    let panels = (theta_max / (std::f64::consts::PI / 4.0)).ceil() as usize;
    let mass: f64 = rule
        .composite(0.0, theta_max, panels)
        .into_iter()
        .map(|(theta, w)| {
            let s = theta.sin();
            let damp = (-a * (1.0 - s)).exp();
            w * 0.5 * a * damp * (bessel::i0e(a * s) * s + bessel::i1e(a * s))
        })
        .sum();
    Ok(mass)
}

/// Total continuous mass, `1 - e^{-gamma t}` analytically.
pub fn rtn_phase_continuous_mass(nu: f64, gamma: f64, t: f64) -> Result<f64> {
    rtn_phase_continuous_cdf(nu, gamma, t, nu * t)
}

/// `<c(t) c(0)> = e^{-2 gamma t}`.
pub fn rtn_autocorrelation(gamma: f64, t: f64) -> f64 {
    (-2.0 * gamma * t.abs()).exp()
}

/// Lorentzian power spectrum `4 gamma / (omega^2 + 4 gamma^2)`.
pub fn rtn_spectrum(gamma: f64, omega: f64) -> f64 {
    4.0 * gamma / (omega * omega + 4.0 * gamma * gamma)
}

//! Stochastic two-qubit evolution and its noise averages.
//!
//! Each qubit evolves under `H = eps I + nu c(t) sigma_x`, so a realization is
//! fixed by the accumulated phases and the single-qubit propagator is
//! `cos(phi) I - i sin(phi) sigma_x` (the `eps` global phase is dropped). The
//! pair starts in `|Phi+>`. Three routes produce the averaged state:
//! Monte Carlo over noise realizations, Gauss-Legendre quadrature over the
//! static disorder, and the closed forms.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{DensityMatrix, Mat2, Mat4};
use crate::noisegen::{
    d_factor, sample_rtn_trajectory, sample_static, stream_rng, RtnSpec, StaticNoiseSpec,
};
use crate::quadrature::GaussLegendre;

/// Default Gauss-Legendre nodes per dimension (per panel).
pub const DEFAULT_QUAD_NODES: usize = 64;
/// Default Monte Carlo sample / trajectory count.
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
/// Realizations per reduction chunk; fixed so sums do not depend on worker count.
const CHUNK: usize = 1000;
/// Below this `delta_c nu t` the static coefficients take their `t = 0` limit.
const STATIC_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    /// Qubit energy. Only contributes a global phase.
    pub epsilon: f64,
    /// System-environment coupling.
    pub nu: f64,
}

impl HamiltonianSpec {
    pub fn new(epsilon: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) || !epsilon.is_finite() {
            return Err(Error::Usage(format!("coupling nu must be > 0 (got {nu})")));
        }
        Ok(HamiltonianSpec { epsilon, nu })
    }

    pub fn with_nu(nu: f64) -> Result<Self> {
        HamiltonianSpec::new(0.0, nu)
    }
}

/// Whether the two qubits see independent noise or one shared realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Separate,
    Common,
}

impl Topology {
    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::Separate => "separate",
            Topology::Common => "common",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separate" | "de" | "different" => Ok(Topology::Separate),
            "common" | "ce" => Ok(Topology::Common),
            other => Err(Error::Usage(format!(
                "unknown topology {other:?} (expected separate or common)"
            ))),
        }
    }
}

/// Real amplitudes of the two-qubit propagator
///
/// ```text
/// U = [[ A, -iB, -iC, -D],
///      [-iB,  A, -D, -iC],
///      [-iC, -D,  A, -iB],
///      [-D, -iC, -iB,  A]]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl UnitaryCoeffs {
    pub fn from_phases(phi_a: f64, phi_b: f64) -> Self {
        let (sa, ca) = phi_a.sin_cos();
        let (sb, cb) = phi_b.sin_cos();
        UnitaryCoeffs {
            a: ca * cb,
            b: ca * sb,
            c: sa * cb,
            d: sa * sb,
        }
    }

    pub fn unitary(&self) -> Mat4 {
        let a = Complex64::new(self.a, 0.0);
        let b = Complex64::new(0.0, -self.b);
        let c = Complex64::new(0.0, -self.c);
        let d = Complex64::new(-self.d, 0.0);
        Mat4([[a, b, c, d], [b, a, d, c], [c, d, a, b], [d, c, b, a]])
    }

    /// `|A - D|^2 + |B + C|^2`, one for any phases.
    pub fn norm(&self) -> f64 {
        (self.a - self.d).powi(2) + (self.b + self.c).powi(2)
    }
}

/// Entries of the evolved pure state `U |Phi+><Phi+| U^dagger`:
/// `Ã = (A - D)^2`, `B̃ = i (B + C)(A - D)`, `C̃ = (B + C)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureStateCoeffs {
    pub a_tilde: f64,
    pub b_tilde: Complex64,
    pub c_tilde: f64,
}

impl PureStateCoeffs {
    pub fn from_unitary(u: &UnitaryCoeffs) -> Self {
        let even = u.a - u.d;
        let odd = u.b + u.c;
        PureStateCoeffs {
            a_tilde: even * even,
            b_tilde: Complex64::new(0.0, odd * even),
            c_tilde: odd * odd,
        }
    }

    pub fn matrix(&self) -> Mat4 {
        let a = Complex64::new(0.5 * self.a_tilde, 0.0);
        let c = Complex64::new(0.5 * self.c_tilde, 0.0);
        let b = 0.5 * self.b_tilde;
        Mat4([[a, b, b, a], [-b, c, c, -b], [-b, c, c, -b], [a, b, b, a]])
    }
}

/// `cos(phi) I - i sin(phi) sigma_x`.
pub fn single_qubit_propagator(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    let mut m = Mat2::identity().scale(c);
    m.0[0][1] = Complex64::new(0.0, -s);
    m.0[1][0] = Complex64::new(0.0, -s);
    m
}

fn realization_matrix(phi_a: f64, phi_b: f64) -> Mat4 {
    PureStateCoeffs::from_unitary(&UnitaryCoeffs::from_phases(phi_a, phi_b)).matrix()
}

/// Pure state reached from `|Phi+>` for one noise realization.
pub fn realization_state(phi_a: f64, phi_b: f64) -> DensityMatrix {
    DensityMatrix::from_trusted(realization_matrix(phi_a, phi_b))
}

/// Closed-form averaged-state coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCoefficients {
    /// `rho = [[1/4+a, -b, -b, 1/4+a], [b, 1/4-a, 1/4-a, b], ...]` with `b` imaginary.
    Static { alpha: f64, beta: Complex64 },
    /// `rho = 1/4 [[1+L, 0, 0, 1+L], [0, 1-L, 1-L, 0], ...]`.
    Rtn { lambda: f64 },
}

impl ClosedFormCoefficients {
    pub fn matrix(&self) -> Mat4 {
        let (alpha, beta) = match *self {
            ClosedFormCoefficients::Static { alpha, beta } => (alpha, beta),
            ClosedFormCoefficients::Rtn { lambda } => (0.25 * lambda, Complex64::new(0.0, 0.0)),
        };
        let p = Complex64::new(0.25 + alpha, 0.0);
        let q = Complex64::new(0.25 - alpha, 0.0);
        let mb = -beta;
        Mat4([[p, mb, mb, p], [beta, q, q, beta], [beta, q, q, beta], [p, mb, mb, p]])
    }

    pub fn state(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.matrix())
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < STATIC_LIMIT {
        1.0
    } else {
        x.sin() / x
    }
}

/// `alpha` and `beta` of the static-noise average.
///
/// Writing `<e^{2i(phi_A + phi_B)}> = R e^{i 4 c0 nu t}`, the state has
/// `alpha = R cos(4 c0 nu t)/4` and `beta = -i R sin(4 c0 nu t)/4`, with
/// `R = sinc^2(delta_c nu t)` (separate) or `sinc(2 delta_c nu t)` (common).
pub fn static_coefficients(
    h: &HamiltonianSpec,
    n: &StaticNoiseSpec,
    topo: Topology,
    t: f64,
) -> ClosedFormCoefficients {
    let x = n.delta_c * h.nu * t;
    let envelope = match topo {
        Topology::Separate => sinc(x).powi(2),
        Topology::Common => sinc(2.0 * x),
    };
    let (s, c) = (4.0 * n.c0 * h.nu * t).sin_cos();
    ClosedFormCoefficients::Static {
        alpha: 0.25 * envelope * c,
        beta: Complex64::new(0.0, -0.25 * envelope * s),
    }
}

/// `Lambda_de = D_{2 nu}^2`, `Lambda_ce = D_{4 nu}`.
pub fn rtn_lambda(h: &HamiltonianSpec, r: &RtnSpec, topo: Topology, t: f64) -> f64 {
    match topo {
        Topology::Separate => d_factor(2.0 * h.nu, r.gamma, t).powi(2),
        Topology::Common => d_factor(4.0 * h.nu, r.gamma, t),
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Usage(format!("time must be finite and >= 0 (got {t})")));
    }
    Ok(())
}

pub fn closed_form_static(
    h: &HamiltonianSpec,
    n: &StaticNoiseSpec,
    topo: Topology,
    t: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    Ok(static_coefficients(h, n, topo, t).state())
}

pub fn closed_form_rtn(
    h: &HamiltonianSpec,
    r: &RtnSpec,
    topo: Topology,
    t: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    Ok(ClosedFormCoefficients::Rtn {
        lambda: rtn_lambda(h, r, topo, t),
    }
    .state())
}

/// Composite Gauss-Legendre points for the flat disorder law, weights summing to one.
///
/// `phase_rate` is how fast the integrand phase moves per unit `c`; the
/// support is split so that each panel sweeps at most `2 nodes` radians.
fn disorder_rule(rule: &GaussLegendre, n: &StaticNoiseSpec, phase_rate: f64) -> Vec<(f64, f64)> {
    let sweep = phase_rate.abs() * n.delta_c;
    let panels = (sweep / (2.0 * rule.len() as f64)).ceil().max(1.0) as usize;
    rule.composite(n.lower(), n.upper(), panels)
        .into_iter()
        .map(|(c, w)| (c, w / n.delta_c))
        .collect()
}

/// Static-noise average by tensor Gauss-Legendre quadrature, phases `phi = nu c t`.
pub fn average_static_quadrature(
    h: &HamiltonianSpec,
    n: &StaticNoiseSpec,
    topo: Topology,
    t: f64,
    nodes: usize,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if nodes < 2 {
        return Err(Error::Usage(format!("quadrature needs at least 2 nodes (got {nodes})")));
    }
    let rule = GaussLegendre::new(nodes)?;
    let nt = h.nu * t;
    let mut acc = Mat4::zeros();
    match topo {
        Topology::Separate => {
            // Integrand carries e^{2i nu t c} in each variable.
            let points = disorder_rule(&rule, n, 2.0 * nt);
            for &(ca, wa) in &points {
                let mut row = Mat4::zeros();
                for &(cb, wb) in &points {
                    row = row + realization_matrix(nt * ca, nt * cb).scale(wb);
                }
                acc = acc + row.scale(wa);
            }
        }
        Topology::Common => {
            for (c, w) in disorder_rule(&rule, n, 4.0 * nt) {
                acc = acc + realization_matrix(nt * c, nt * c).scale(w);
            }
        }
    }
    Ok(DensityMatrix::from_trusted(acc.hermitian_part()))
}

/// Monte Carlo sampling controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
}

impl McSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        McSettings {
            samples,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Usage("Monte Carlo needs at least one sample".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Usage("worker count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `workers` threads, or the global pool.
pub fn in_pool<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Usage(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Usage("time grid is empty".into()));
    }
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Usage("time grid must be ascending".into()));
    }
    Ok(())
}

/// Mean of the realization states at total phase `base + (+-da) + (+-db)`.
///
/// Separate environments mirror each qubit independently (four images),
/// a common environment mirrors the shared deviation (two images). The
/// weights are powers of two, so exact states stay exact.
fn mirrored(topo: Topology, base: f64, da: f64, db: f64) -> Mat4 {
    match topo {
        Topology::Separate => {
            let [a, b] = [0.5 * base + da, 0.5 * base - da];
            let [c, d] = [0.5 * base + db, 0.5 * base - db];
            (realization_matrix(a, c) + realization_matrix(a, d) + realization_matrix(b, c) + realization_matrix(b, d))
                .scale(0.25)
        }
        Topology::Common => {
            let half = 0.5 * base;
            (realization_matrix(half + da, half + db) + realization_matrix(half - da, half - db)).scale(0.5)
        }
    }
}

/// Deterministic chunked average of per-realization contributions over a time grid.
///
/// `realize(index, out)` adds realization `index` into `out` (one matrix per time).
fn chunked_average<F>(settings: &McSettings, grid_len: usize, realize: F) -> Result<Vec<DensityMatrix>>
where
    F: Fn(u64, &mut [Mat4]) -> Result<()> + Sync,
{
    settings.validate()?;
    let n = settings.samples;
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<Mat4>>> = in_pool(settings.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut acc = vec![Mat4::zeros(); grid_len];
                for i in (k * CHUNK)..((k + 1) * CHUNK).min(n) {
                    realize(i as u64, &mut acc)?;
                }
                Ok(acc)
            })
            .collect()
    })?;
    let mut total = vec![Mat4::zeros(); grid_len];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            *t = *t + p;
        }
    }
    let count = n as f64;
    Ok(total
        .into_iter()
        .map(|mut m| {
            m.0.iter_mut().flatten().for_each(|z| *z /= count);
            DensityMatrix::from_trusted(m)
        })
        .collect())
}

/// Static-noise Monte Carlo average on a time grid; each sample's disorder is reused at every time.
pub fn average_static_mc_grid(
    h: &HamiltonianSpec,
    n: &StaticNoiseSpec,
    topo: Topology,
    times: &[f64],
    settings: &McSettings,
) -> Result<Vec<DensityMatrix>> {
    check_grid(times)?;
    chunked_average(settings, times.len(), |i, acc| {
        let mut rng = stream_rng(settings.seed, i);
        let ca = sample_static(n, &mut rng);
        let cb = match topo {
            Topology::Separate => sample_static(n, &mut rng),
            Topology::Common => ca,
        };
        // Mirror draws about c0: the flat distribution is symmetric, so the
        // pair (c, 2 c0 - c) is an unbiased antithetic sample.
        let (ua, ub) = (ca - n.c0, cb - n.c0);
        for (slot, &t) in acc.iter_mut().zip(times) {
            let nt = h.nu * t;
            let base = 2.0 * nt * n.c0;
            *slot = *slot + mirrored(topo, base, nt * ua, nt * ub);
        }
        Ok(())
    })
}

pub fn average_static_mc(
    h: &HamiltonianSpec,
    n: &StaticNoiseSpec,
    topo: Topology,
    t: f64,
    settings: &McSettings,
) -> Result<DensityMatrix> {
    Ok(average_static_mc_grid(h, n, topo, &[t], settings)?[0])
}

/// RTN Monte Carlo average. Separate topology draws two independent
/// trajectories per sample, common draws one shared trajectory; each
/// trajectory is followed across the whole grid.
pub fn average_rtn_mc(
    h: &HamiltonianSpec,
    r: &RtnSpec,
    topo: Topology,
    times: &[f64],
    settings: &McSettings,
) -> Result<Vec<DensityMatrix>> {
    check_grid(times)?;
    let horizon = times.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    chunked_average(settings, times.len(), |i, acc| {
        let mut rng = stream_rng(settings.seed, i);
        let traj_a = sample_rtn_trajectory(r, horizon, &mut rng)?;
        let phases_a = traj_a.phases_on_grid(h.nu, times)?;
        let phases_b = match topo {
            Topology::Separate => sample_rtn_trajectory(r, horizon, &mut rng)?.phases_on_grid(h.nu, times)?,
            Topology::Common => phases_a.clone(),
        };
        // The stationary initial sign is symmetric, so each trajectory's sign
        // flip (phi -> -phi) is an equally likely antithetic partner.
        for ((slot, &pa), &pb) in acc.iter_mut().zip(&phases_a).zip(&phases_b) {
            *slot = *slot + mirrored(topo, 0.0, pa, pb);
        }
        Ok(())
    })
}

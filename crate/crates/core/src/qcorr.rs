//! Correlation measures: negativity, mutual information, classical
//! correlations and discord, plus their closed forms for the noise families.
//!
//! Entropies are in bits. Classical correlations are maximized over
//! projective measurements on qubit B, parameterized by the Bloch direction
//! of `Pi_+- = (I +- n.sigma)/2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolver::{sinc, Topology};
use crate::matcore::{
    eigvals_hermitian, partial_transpose_b, vn_entropy, vn_entropy2, DensityMatrix, Mat2, Mat4,
    Subsystem,
};
use crate::noisegen::{d_factor, RtnSpec, StaticNoiseSpec};

/// Discord values in `[-DISCORD_FLOOR, 0)` are optimizer noise and clamp to zero.
pub const DISCORD_FLOOR: f64 = 1e-6;
/// Outcomes less likely than this contribute nothing to the conditional entropy.
const OUTCOME_CUTOFF: f64 = 1e-14;

/// Projective measurement on qubit B along `n = (sin t cos p, sin t sin p, cos t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi_az: f64,
}

impl MeasurementBasis {
    /// Folds arbitrary angles into `theta in [0, pi]`, `phi_az in [0, 2 pi)`.
    pub fn new(theta: f64, phi_az: f64) -> Self {
        let mut theta = theta.rem_euclid(2.0 * PI);
        let mut phi_az = phi_az;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi_az += PI;
        }
        MeasurementBasis {
            theta,
            phi_az: phi_az.rem_euclid(2.0 * PI),
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi_az.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// The basis with `n -> -n`; same measurement, outcomes relabeled.
    pub fn antipode(&self) -> Self {
        MeasurementBasis::new(PI - self.theta, self.phi_az + PI)
    }

    /// `[Pi_+, Pi_-]`.
    pub fn projectors(&self) -> [Mat2; 2] {
        let [x, y, z] = self.direction();
        let n_sigma = Mat2::pauli_x().scale(x) + Mat2::pauli_y().scale(y) + Mat2::pauli_z().scale(z);
        let half = Mat2::identity().scale(0.5);
        [half + n_sigma.scale(0.5), half - n_sigma.scale(0.5)]
    }
}

/// Negativity `N`, mutual information `I`, classical correlations `C` and discord `Q = I - C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub negativity: f64,
    pub mutual_info: f64,
    pub classical: f64,
    pub discord: f64,
}

/// Grid-then-pattern-search settings for the measurement maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub theta_points: usize,
    pub phi_points: usize,
    /// Search stops once the pattern step falls below this (radians).
    pub step_floor: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            theta_points: 64,
            phi_points: 128,
            step_floor: 1e-6,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalCorrelations {
    pub value: f64,
    pub argmax: MeasurementBasis,
}

/// `2 |sum of negative eigenvalues of rho^{T_B}|`.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let ev = eigvals_hermitian(&partial_transpose_b(rho.mat()))?;
    Ok(-2.0 * ev.iter().filter(|&&l| l < 0.0).sum::<f64>())
}

/// `S(rho_A) + S(rho_B) - S(rho)`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    let sa = vn_entropy2(&rho.reduced(Subsystem::A))?;
    let sb = vn_entropy2(&rho.reduced(Subsystem::B))?;
    Ok(sa + sb - vn_entropy(rho)?)
}

/// Precomputed pieces of `J(n) = S(rho_A) - sum_k p_k S(rho_{A|k})`.
///
/// `Tr_B[(I (x) Pi_+-) rho] = (R_0 +- n.R)/2` with `R_k = Tr_B[(I (x) sigma_k) rho]`.
pub struct MeasurementObjective {
    entropy_a: f64,
    r0: Mat2,
    r: [Mat2; 3],
}

impl MeasurementObjective {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let m = rho.mat();
        let sigmas = [Mat2::pauli_x(), Mat2::pauli_y(), Mat2::pauli_z()];
        let weighted = |op: &Mat2| -> Mat2 {
            // sum_{b,b'} op_{b b'} rho_{(a b'),(a' b)}
            let mut out = Mat2::zeros();
            for a in 0..2 {
                for ap in 0..2 {
                    for b in 0..2 {
                        for bp in 0..2 {
                            out.0[a][ap] += op.0[b][bp] * m.0[2 * a + bp][2 * ap + b];
                        }
                    }
                }
            }
            out
        };
        let r0 = rho.reduced(Subsystem::A);
        Ok(MeasurementObjective {
            entropy_a: vn_entropy2(&r0)?,
            r0,
            r: [weighted(&sigmas[0]), weighted(&sigmas[1]), weighted(&sigmas[2])],
        })
    }

    /// Information about A gained by measuring B along `basis`.
    pub fn evaluate(&self, basis: &MeasurementBasis) -> Result<f64> {
        let [x, y, z] = basis.direction();
        let n_r = self.r[0].scale(x) + self.r[1].scale(y) + self.r[2].scale(z);
        let mut conditional = 0.0;
        for branch in [self.r0 + n_r, self.r0 - n_r] {
            let unnormalized = branch.scale(0.5);
            let p = unnormalized.trace().re;
            if p < OUTCOME_CUTOFF {
                continue;
            }
            conditional += p * vn_entropy2(&unnormalized.scale(1.0 / p))?;
        }
        Ok(self.entropy_a - conditional)
    }

    pub fn evaluate_angles(&self, theta: f64, phi_az: f64) -> Result<f64> {
        self.evaluate(&MeasurementBasis { theta, phi_az })
    }
}

/// `max_n J(n)` by a coarse grid followed by a halving compass search.
pub fn classical_correlations(
    rho: &DensityMatrix,
    opt: &OptimizerSettings,
) -> Result<ClassicalCorrelations> {
    if opt.theta_points == 0 || opt.phi_points == 0 || !(opt.step_floor > 0.0) {
        return Err(Error::Usage(format!("invalid optimizer settings {opt:?}")));
    }
    let objective = MeasurementObjective::new(rho)?;
    let d_theta = PI / opt.theta_points as f64;
    let d_phi = 2.0 * PI / opt.phi_points as f64;

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..opt.theta_points {
        let theta = i as f64 * d_theta;
        for j in 0..opt.phi_points {
            let phi = j as f64 * d_phi;
            let v = objective.evaluate_angles(theta, phi)?;
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }

    // Unconstrained angles: the sphere parameterization has no edges to clip at.
    let (mut value, mut theta, mut phi) = best;
    let mut step = d_theta.max(d_phi);
    let mut iterations = 0;
    while step >= opt.step_floor {
        if iterations == opt.max_iterations {
            return Err(Error::NonConvergence {
                routine: "measurement pattern search",
                iterations,
                residual: step,
            });
        }
        iterations += 1;
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = objective.evaluate_angles(theta + dt, phi + dp)?;
            if v > value {
                value = v;
                theta += dt;
                phi += dp;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(ClassicalCorrelations {
        value,
        argmax: MeasurementBasis::new(theta, phi),
    })
}

/// `N`, `I`, `C`, `Q` for one state. `C` is capped at `I` when the excess is
/// within [`DISCORD_FLOOR`], so `Q = I - C` holds exactly.
pub fn correlation_report(rho: &DensityMatrix, opt: &OptimizerSettings) -> Result<CorrelationReport> {
    let mutual_info = mutual_information(rho)?;
    let mut classical = classical_correlations(rho, opt)?.value;
    let excess = classical - mutual_info;
    if excess > DISCORD_FLOOR {
        return Err(Error::Numerical(format!(
            "classical correlations exceed mutual information by {excess:e}"
        )));
    }
    if excess > 0.0 {
        classical = mutual_info;
    }
    Ok(CorrelationReport {
        negativity: negativity(rho)?,
        mutual_info,
        classical,
        discord: mutual_info - classical,
    })
}

/// `I - C`, clamping values in `[-DISCORD_FLOOR, 0)` to zero.
pub fn discord(rho: &DensityMatrix, opt: &OptimizerSettings) -> Result<f64> {
    let q = mutual_information(rho)? - classical_correlations(rho, opt)?.value;
    if q < -DISCORD_FLOOR {
        return Err(Error::Numerical(format!("discord {q:e} below -{DISCORD_FLOOR:e}")));
    }
    Ok(q.max(0.0))
}

fn x_log2_x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Discord of the telegraph-noise X states,
/// `Q = [(1+L) log2(1+L) + (1-L) log2(1-L)] / 2`.
pub fn discord_rtn_closed(lambda: f64) -> Result<f64> {
    if !(lambda.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("|lambda| = {} exceeds 1", lambda.abs())));
    }
    let l = lambda.abs().min(1.0);
    Ok(0.5 * (x_log2_x(1.0 + l) + x_log2_x(1.0 - l)))
}

/// `sinc^2(delta_c nu t)` (separate), `|sinc(2 delta_c nu t)|` (common).
///
/// The common-environment value is the modulus of `sin(2x)/(2x)`; the
/// unsigned expression goes negative where negativity cannot.
pub fn negativity_static_closed(n: &StaticNoiseSpec, nu: f64, t: f64, topo: Topology) -> f64 {
    let x = n.delta_c * nu * t;
    match topo {
        Topology::Separate => sinc(x).powi(2),
        Topology::Common => sinc(2.0 * x).abs(),
    }
}

/// `D_{2 nu}^2` (separate), `|D_{4 nu}|` (common).
pub fn negativity_rtn_closed(r: &RtnSpec, nu: f64, t: f64, topo: Topology) -> f64 {
    match topo {
        Topology::Separate => d_factor(2.0 * nu, r.gamma, t).powi(2),
        Topology::Common => d_factor(4.0 * nu, r.gamma, t).abs(),
    }
}

/// Overlap of a state with the X-state pattern, for diagnostics.
pub fn x_state_defect(m: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 {
                worst = worst.max(m.0[i][j].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolver::{closed_form_static, ClosedFormCoefficients, HamiltonianSpec};
    use crate::matcore::kron;
    use num_complex::Complex64;

    fn rtn_state(lambda: f64) -> DensityMatrix {
        ClosedFormCoefficients::Rtn { lambda }.state()
    }

    fn xx_mixture() -> DensityMatrix {
        DensityMatrix::new((Mat4::identity() + kron(&Mat2::pauli_x(), &Mat2::pauli_x())).scale(0.25)).unwrap()
    }

    fn product_state() -> DensityMatrix {
        let ra = Mat2([
            [Complex64::new(0.8, 0.0), Complex64::new(0.1, 0.2)],
            [Complex64::new(0.1, -0.2), Complex64::new(0.2, 0.0)],
        ]);
        let rb = Mat2([
            [Complex64::new(0.35, 0.0), Complex64::new(-0.2, 0.1)],
            [Complex64::new(-0.2, -0.1), Complex64::new(0.65, 0.0)],
        ]);
        DensityMatrix::product(&ra, &rb).unwrap()
    }

    /// Exhaustive grid oracle over the sphere.
    fn grid_max(rho: &DensityMatrix, nt: usize, np: usize) -> f64 {
        let obj = MeasurementObjective::new(rho).unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..=nt {
            let theta = PI * i as f64 / nt as f64;
            for j in 0..np {
                let phi = 2.0 * PI * j as f64 / np as f64;
                best = best.max(obj.evaluate_angles(theta, phi).unwrap());
            }
        }
        best
    }

    #[test]
    fn projectors_are_a_resolution_of_identity() {
        for (t, p) in [(0.0, 0.0), (0.7, 2.1), (PI, 5.0), (2.0, -1.0)] {
            let [plus, minus] = MeasurementBasis::new(t, p).projectors();
            assert!((plus + minus).max_abs_diff(&Mat2::identity()) < 1e-15);
            assert!((plus * plus).max_abs_diff(&plus) < 1e-12);
            assert!((minus * minus).max_abs_diff(&minus) < 1e-12);
        }
        let b = MeasurementBasis::new(4.0, -0.5);
        assert!((0.0..=PI).contains(&b.theta) && (0.0..2.0 * PI).contains(&b.phi_az));
    }

    #[test]
    fn negativity_known_states() {
        assert!((negativity(&DensityMatrix::bell_phi_plus()).unwrap() - 1.0).abs() < 1e-14);
        assert!(negativity(&DensityMatrix::maximally_mixed()).unwrap().abs() < 1e-15);
        assert!(negativity(&product_state()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn negativity_of_static_family() {
        let h = HamiltonianSpec::with_nu(1.0).unwrap();
        let n = StaticNoiseSpec::new(0.6, 1.4).unwrap();
        for topo in [Topology::Separate, Topology::Common] {
            for k in 1..50 {
                let t = 0.137 * k as f64;
                let coeffs = crate::evolver::static_coefficients(&h, &n, topo, t);
                let ClosedFormCoefficients::Static { alpha, beta } = coeffs else { unreachable!() };
                let want = 4.0 * (alpha * alpha + beta.norm_sqr()).sqrt();
                let got = negativity(&coeffs.state()).unwrap();
                assert!((got - want).abs() < 1e-13, "{topo} t={t}");
            }
        }
    }

    #[test]
    fn mutual_information_known_states() {
        assert!((mutual_information(&DensityMatrix::bell_phi_plus()).unwrap() - 2.0).abs() < 1e-13);
        assert!(mutual_information(&product_state()).unwrap().abs() < 1e-13);
        assert!((mutual_information(&xx_mixture()).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn classical_correlations_known_states() {
        let opt = OptimizerSettings::default();
        let bell = classical_correlations(&DensityMatrix::bell_phi_plus(), &opt).unwrap();
        assert!((bell.value - 1.0).abs() < 1e-12);
        assert!(classical_correlations(&product_state(), &opt).unwrap().value.abs() < 1e-12);

        let xx = classical_correlations(&xx_mixture(), &opt).unwrap();
        assert!((xx.value - 1.0).abs() < 1e-12);
        let [x, _, _] = xx.argmax.direction();
        assert!((x.abs() - 1.0).abs() < 1e-6, "{:?}", xx.argmax);
        assert!((grid_max(&xx_mixture(), 64, 128) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discord_known_states() {
        let opt = OptimizerSettings::default();
        assert!((discord(&DensityMatrix::bell_phi_plus(), &opt).unwrap() - 1.0).abs() < 1e-12);
        assert!(discord(&xx_mixture(), &opt).unwrap().abs() < 1e-12);
        let numeric = discord(&rtn_state(0.5), &opt).unwrap();
        assert!((numeric - discord_rtn_closed(0.5).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn closed_discord_values() {
        assert_eq!(discord_rtn_closed(0.0).unwrap(), 0.0);
        assert_eq!(discord_rtn_closed(1.0).unwrap(), 1.0);
        assert_eq!(discord_rtn_closed(-1.0).unwrap(), 1.0);
        let direct = 0.5 * (1.5 * 1.5f64.log2() + 0.5 * 0.5f64.log2());
        assert!((discord_rtn_closed(0.5).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.18872).abs() < 1e-5);
        assert_eq!(discord_rtn_closed(-0.3).unwrap(), discord_rtn_closed(0.3).unwrap());
        assert!(matches!(discord_rtn_closed(1.01), Err(Error::Domain(_))));
    }

    #[test]
    fn antipodal_bases_give_identical_values() {
        let h = HamiltonianSpec::with_nu(1.0).unwrap();
        let n = StaticNoiseSpec::new(1.0, 1.0).unwrap();
        let rho = closed_form_static(&h, &n, Topology::Separate, 0.9).unwrap();
        let obj = MeasurementObjective::new(&rho).unwrap();
        let cc = classical_correlations(&rho, &OptimizerSettings::default()).unwrap();
        for b in [cc.argmax, MeasurementBasis::new(0.4, 1.3), MeasurementBasis::new(2.9, 0.1)] {
            assert_eq!(obj.evaluate(&b).unwrap(), obj.evaluate(&b.antipode()).unwrap());
        }
    }

    #[test]
    fn rtn_family_discord_is_even_and_monotone() {
        let opt = OptimizerSettings::default();
        let mut prev = -1.0;
        for k in 0..=100 {
            let l = k as f64 / 100.0;
            let plus = discord(&rtn_state(l), &opt).unwrap();
            let minus = discord(&rtn_state(-l), &opt).unwrap();
            assert!((plus - minus).abs() <= 1e-6);
            assert!(plus >= prev - 1e-6);
            prev = plus;
        }
    }

    #[test]
    fn refinement_matches_exhaustive_grid() {
        let h = HamiltonianSpec::with_nu(1.0).unwrap();
        let n = StaticNoiseSpec::new(1.0, 1.0).unwrap();
        let opt = OptimizerSettings::default();
        let mut states = vec![rtn_state(0.0), rtn_state(0.35), rtn_state(-0.8)];
        for (topo, t) in [(Topology::Separate, 0.7), (Topology::Common, 1.9), (Topology::Separate, 3.3)] {
            states.push(closed_form_static(&h, &n, topo, t).unwrap());
        }
        for rho in &states {
            let refined = classical_correlations(rho, &opt).unwrap().value;
            let exhaustive = grid_max(rho, 1024, 2048);
            assert!((refined - exhaustive).abs() <= 1e-5, "{refined} vs {exhaustive}");
        }
    }

    #[test]
    fn local_unitaries_preserve_negativity() {
        let h = HamiltonianSpec::with_nu(1.0).unwrap();
        let n = StaticNoiseSpec::new(0.3, 1.0).unwrap();
        let rho = closed_form_static(&h, &n, Topology::Common, 0.6).unwrap();
        let base = negativity(&rho).unwrap();
        let rot = |a: f64, b: f64, c: f64| -> Mat2 {
            // e^{-i a Z/2} e^{-i b Y/2} e^{-i c Z/2}
            let rz = |x: f64| Mat2([[Complex64::from_polar(1.0, -x / 2.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, x / 2.0)]]);
            let ry = Mat2::from_real([[(b / 2.0).cos(), -(b / 2.0).sin()], [(b / 2.0).sin(), (b / 2.0).cos()]]);
            rz(a) * ry * rz(c)
        };
        for (a, b, c) in [(0.1, 0.2, 0.3), (2.0, -1.0, 0.5), (5.0, 3.0, -2.0)] {
            let u = kron(&rot(a, b, c), &rot(c, a, b));
            let moved = DensityMatrix::new(rho.mat().conjugate_by(&u)).unwrap();
            assert!((negativity(&moved).unwrap() - base).abs() <= 1e-10);
        }
    }

    #[test]
    fn report_invariants() {
        let opt = OptimizerSettings::default();
        for l in [0.0, 0.2, 0.9, 1.0] {
            let r = correlation_report(&rtn_state(l), &opt).unwrap();
            assert!((r.discord - (r.mutual_info - r.classical)).abs() <= 1e-9);
            assert!(r.discord >= 0.0 && r.classical >= 0.0);
            assert!((r.negativity - l).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_negativities() {
        let n = StaticNoiseSpec::new(0.0, 1.0).unwrap();
        assert_eq!(negativity_static_closed(&n, 1.0, 0.0, Topology::Separate), 1.0);
        assert_eq!(negativity_static_closed(&n, 1.0, 0.0, Topology::Common), 1.0);
        let x = PI / 2.0;
        assert!((negativity_static_closed(&n, 1.0, x, Topology::Separate) - (2.0 / PI).powi(2)).abs() < 1e-15);
        let y = 3.0 * PI / 4.0;
        assert!((negativity_static_closed(&n, 1.0, y, Topology::Common) - 2.0 / (3.0 * PI)).abs() < 1e-15);
        let r = RtnSpec::new(0.2).unwrap();
        assert_eq!(negativity_rtn_closed(&r, 1.0, 0.0, Topology::Separate), 1.0);
        assert_eq!(negativity_rtn_closed(&r, 1.0, 0.0, Topology::Common), 1.0);
    }

    #[test]
    fn rejects_bad_optimizer_settings() {
        let opt = OptimizerSettings { theta_points: 0, ..Default::default() };
        assert!(classical_correlations(&DensityMatrix::bell_phi_plus(), &opt).is_err());
        let opt = OptimizerSettings { max_iterations: 1, ..Default::default() };
        assert!(matches!(
            classical_correlations(&DensityMatrix::bell_phi_plus(), &opt),
            Err(Error::NonConvergence { .. })
        ));
    }
}

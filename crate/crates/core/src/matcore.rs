//! Fixed-size complex linear algebra for one- and two-qubit states.
//!
//! Two-qubit basis ordering is `|ab>` with index `2a + b`, qubit A being the
//! most significant bit.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hermiticity tolerance for a [`DensityMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for a [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues below `-EIGEN_FLOOR` make a matrix an invalid state.
pub const EIGEN_FLOOR: f64 = 1e-10;

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

macro_rules! square_matrix {
    ($name:ident, $n:expr) => {
        #[derive(Clone, Copy, PartialEq)]
        pub struct $name(pub [[Complex64; $n]; $n]);

        impl $name {
            pub const DIM: usize = $n;

            pub fn zeros() -> Self {
                $name([[ZERO; $n]; $n])
            }

            pub fn identity() -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.0[i][i] = ONE;
                }
                m
            }

            pub fn from_real(rows: [[f64; $n]; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = Complex64::new(rows[i][j], 0.0);
                    }
                }
                m
            }

            pub fn dagger(&self) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for j in 0..$n {
                        m.0[i][j] = self.0[j][i].conj();
                    }
                }
                m
            }

            pub fn scale(&self, s: f64) -> Self {
                let mut m = *self;
                m.0.iter_mut().flatten().for_each(|z| *z *= s);
                m
            }

            pub fn trace(&self) -> Complex64 {
                (0..$n).map(|i| self.0[i][i]).sum()
            }

            pub fn frobenius_norm(&self) -> f64 {
                self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
            }

            /// Largest entrywise modulus of `self - other`.
            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .flatten()
                    .zip(other.0.iter().flatten())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            }

            /// Largest `|m_ij - conj(m_ji)|`.
            pub fn hermiticity_defect(&self) -> f64 {
                self.max_abs_diff(&self.dagger())
            }

            /// `(m + m^dagger) / 2`.
            pub fn hermitian_part(&self) -> Self {
                (*self + self.dagger()).scale(0.5)
            }

            /// `u * self * u^dagger`.
            pub fn conjugate_by(&self, u: &Self) -> Self {
                *u * *self * u.dagger()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
            }
        }

        impl Index<(usize, usize)> for $name {
            type Output = Complex64;
            fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
                &self.0[i][j]
            }
        }

        impl IndexMut<(usize, usize)> for $name {
            fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
                &mut self.0[i][j]
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(mut self, rhs: Self) -> Self {
                for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
                    *a += b;
                }
                self
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(mut self, rhs: Self) -> Self {
                for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
                    *a -= b;
                }
                self
            }
        }

        impl Mul for $name {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    for k in 0..$n {
                        let a = self.0[i][k];
                        for j in 0..$n {
                            m.0[i][j] += a * rhs.0[k][j];
                        }
                    }
                }
                m
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                writeln!(f, "{}[", stringify!($name))?;
                for row in &self.0 {
                    write!(f, "  ")?;
                    for z in row {
                        write!(f, "{:>+.6}{:>+.6}i  ", z.re, z.im)?;
                    }
                    writeln!(f)?;
                }
                write!(f, "]")
            }
        }
    };
}

square_matrix!(Mat2, 2);
square_matrix!(Mat4, 4);

impl Mat2 {
    pub fn pauli_x() -> Self {
        Mat2::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Mat2([[ZERO, -Complex64::i()], [Complex64::i(), ZERO]])
    }

    pub fn pauli_z() -> Self {
        Mat2::from_real([[1.0, 0.0], [0.0, -1.0]])
    }

    /// Closed-form eigenvalues of a Hermitian 2x2 matrix, ascending.
    pub fn eigvals_hermitian(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }
}

impl Mat4 {
    /// `|psi><psi|`.
    pub fn outer(psi: &[Complex64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = psi[i] * psi[j].conj();
            }
        }
        m
    }
}

/// Kronecker product, `(a (x) b)_{2i+k, 2j+l} = a_ij b_kl`.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// Partial transpose on qubit B: `(i,a),(j,b) <- (i,b),(j,a)`.
pub fn partial_transpose_b(m: &Mat4) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out.0[2 * i + a][2 * j + b] = m.0[2 * i + b][2 * j + a];
                }
            }
        }
    }
    out
}

/// One of the two qubits of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl FromStr for Subsystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Subsystem::A),
            "B" | "b" => Ok(Subsystem::B),
            other => Err(Error::Usage(format!(
                "unknown subsystem label {other:?} (expected A or B)"
            ))),
        }
    }
}

/// Reduced state of the qubit `keep`, tracing out the other one.
pub fn partial_trace(m: &Mat4, keep: Subsystem) -> Mat2 {
    let mut out = Mat2::zeros();
    for x in 0..2 {
        for y in 0..2 {
            out.0[x][y] = match keep {
                Subsystem::A => m.0[2 * x][2 * y] + m.0[2 * x + 1][2 * y + 1],
                Subsystem::B => m.0[x][y] + m.0[2 + x][2 + y],
            };
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian 4x4 matrix.
#[derive(Debug, Clone, Copy)]
pub struct Eigen4 {
    /// Ascending eigenvalues.
    pub values: [f64; 4],
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: Mat4,
    pub sweeps: usize,
}

impl Eigen4 {
    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> Mat4 {
        let mut lambda = Mat4::zeros();
        for k in 0..4 {
            lambda.0[k][k] = Complex64::new(self.values[k], 0.0);
        }
        self.vectors * lambda * self.vectors.dagger()
    }
}

/// Cyclic complex Jacobi on the Hermitian part of `m`.
pub fn eigh(m: &Mat4) -> Result<Eigen4> {
    if !m.is_finite() {
        return Err(Error::Domain("eigh: non-finite matrix entry".into()));
    }
    let mut a = m.hermitian_part();
    let mut v = Mat4::identity();
    let norm = a.frobenius_norm();
    let off_norm = |a: &Mat4| -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    s += a.0[i][j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= JACOBI_TOL * norm {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NonConvergence {
                routine: "Jacobi eigensolver",
                iterations: sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..3 {
            for q in (p + 1)..4 {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    let diag = [a.0[0][0].re, a.0[1][1].re, a.0[2][2].re, a.0[3][3].re];
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let mut values = [0.0; 4];
    let mut vectors = Mat4::zeros();
    for (k, &src) in order.iter().enumerate() {
        values[k] = diag[src];
        for row in 0..4 {
            vectors.0[row][k] = v.0[row][src];
        }
    }
    Ok(Eigen4 {
        values,
        vectors,
        sweeps,
    })
}

/// Zero `a[p][q]` with the unitary `G = diag-phase * real rotation`, `a <- G^dagger a G`.
fn jacobi_rotate(a: &mut Mat4, v: &mut Mat4, p: usize, q: usize) {
    let apq = a.0[p][q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a.0[p][p].re;
    let aqq = a.0[q][q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let conj_phase = phase.conj();
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -conj_phase * s;
    let g_qq = conj_phase * c;

    for k in 0..4 {
        let akp = a.0[k][p];
        let akq = a.0[k][q];
        a.0[k][p] = akp * g_pp + akq * g_qp;
        a.0[k][q] = akp * g_pq + akq * g_qq;
        let vkp = v.0[k][p];
        let vkq = v.0[k][q];
        v.0[k][p] = vkp * g_pp + vkq * g_qp;
        v.0[k][q] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..4 {
        let apk = a.0[p][k];
        let aqk = a.0[q][k];
        a.0[p][k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a.0[q][k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a.0[p][q] = ZERO;
    a.0[q][p] = ZERO;
    a.0[p][p].im = 0.0;
    a.0[q][q].im = 0.0;
}

/// Ascending eigenvalues of a Hermitian 4x4 matrix.
pub fn eigvals_hermitian(m: &Mat4) -> Result<[f64; 4]> {
    eigh(m).map(|e| e.values)
}

/// Shannon entropy in bits of a spectrum, with `0 log 0 = 0`.
///
/// Entries in `[-EIGEN_FLOOR, 0)` are treated as zero; more negative ones are rejected.
/// The clamped spectrum is renormalized to unit sum, so eigensolver rounding
/// (a pure state returning `1 - 2^-52`) does not leak into the entropy.
pub fn entropy_bits(spectrum: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &lambda in spectrum {
        if lambda < -EIGEN_FLOOR || !lambda.is_finite() {
            return Err(Error::InvalidState(format!(
                "eigenvalue {lambda:e} below -{EIGEN_FLOOR:e}"
            )));
        }
        total += lambda.max(0.0);
    }
    if total <= 0.0 {
        return Err(Error::InvalidState("spectrum has no positive weight".into()));
    }
    let mut s = 0.0;
    for &lambda in spectrum {
        let p = (lambda.max(0.0) / total).min(1.0);
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy of a single-qubit state, in bits.
pub fn vn_entropy2(m: &Mat2) -> Result<f64> {
    entropy_bits(&m.eigvals_hermitian())
}

/// A validated two-qubit density matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(mat: Mat4) -> Result<Self> {
        let herm = mat.hermiticity_defect();
        if !mat.is_finite() || herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "hermiticity defect {herm:e} exceeds {HERMITIAN_TOL:e}"
            )));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lowest = eigvals_hermitian(&mat)?[0];
        if lowest < -EIGEN_FLOOR {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lowest:e}"
            )));
        }
        Ok(DensityMatrix(mat))
    }

    /// Wraps a matrix that is a state by construction (pure or convex mixture of states).
    pub(crate) fn from_trusted(mat: Mat4) -> Self {
        debug_assert!(mat.hermiticity_defect() <= HERMITIAN_TOL);
        DensityMatrix(mat)
    }

    pub fn pure(psi: &[Complex64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("state vector norm^2 {norm}")));
        }
        Ok(DensityMatrix(Mat4::outer(psi)))
    }

    /// `|Phi+> = (|00> + |11>)/sqrt(2)`.
    pub fn bell_phi_plus() -> Self {
        DensityMatrix(Mat4::from_real([
            [0.5, 0.0, 0.0, 0.5],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.5],
        ]))
    }

    /// `|Psi+> = (|01> + |10>)/sqrt(2)`.
    pub fn bell_psi_plus() -> Self {
        DensityMatrix(Mat4::from_real([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ]))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity().scale(0.25))
    }

    pub fn product(a: &Mat2, b: &Mat2) -> Result<Self> {
        DensityMatrix::new(kron(a, b))
    }

    pub fn mat(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_mat(self) -> Mat4 {
        self.0
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        eigvals_hermitian(&self.0)
    }

    pub fn reduced(&self, keep: Subsystem) -> Mat2 {
        partial_trace(&self.0, keep)
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({:?})", self.0)
    }
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_bits(&rho.eigenvalues()?)
}

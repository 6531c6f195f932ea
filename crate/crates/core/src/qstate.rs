//! Kets, density matrices and the operations the machines need on them.
//!
//! Basis ordering is fixed throughout the crate: in a tensor product the left
//! factor is the most significant subsystem, so the two-qubit basis state
//! `|ij>` sits at index `2 * i + j`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for normalization, hermiticity and unit trace.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a positive semidefinite matrix.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Amplitudes `(alpha, beta * e^{i phase})` of the input qubit, with
/// `alpha = sqrt(1 - beta^2)` real and nonnegative.
pub fn qubit_amplitudes(beta: f64, phase: f64) -> Result<(Complex64, Complex64)> {
    if !(0.0..=1.0).contains(&beta) || !phase.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0, 1] and phase must be finite (got beta = {beta}, phase = {phase})"
        )));
    }
    let alpha = (1.0 - beta * beta).max(0.0).sqrt();
    Ok((real(alpha), Complex64::from_polar(beta, phase)))
}

/// A state vector. Normalized unless built with [`Ket::unnormalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let ket = Self::unnormalized(amplitudes);
        if ket.dim() == 0 {
            return Err(Error::InvalidState(
                "a ket needs at least one amplitude".into(),
            ));
        }
        let norm_sqr = ket.norm_sqr();
        if (norm_sqr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "ket has squared norm {norm_sqr}, expected 1"
            )));
        }
        Ok(ket)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().copied().map(real).collect())
    }

    /// Intermediate vector that is not required to have unit norm.
    pub fn unnormalized(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes: DVector::from_vec(amplitudes),
        }
    }

    pub(crate) fn from_vector(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Computational basis state `|index>` of a `dim`-level system.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = real(1.0);
        Self { amplitudes }
    }

    /// `alpha|0> + beta e^{i phase}|1>`.
    pub fn qubit(beta: f64, phase: f64) -> Result<Self> {
        let (alpha, beta) = qubit_amplitudes(beta, phase)?;
        Ok(Self::unnormalized(vec![alpha, beta]))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STATE_TOL
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "inner product of kets with different dims"
        );
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket::from_vector(self.amplitudes.kronecker(&other.amplitudes))
    }

    pub fn scaled(&self, factor: Complex64) -> Ket {
        Ket::from_vector(&self.amplitudes * factor)
    }

    /// Zero-pads the ket into a larger space; the original levels keep their
    /// indices.
    pub fn embed(&self, dim: usize) -> Ket {
        assert!(dim >= self.dim(), "cannot embed into a smaller space");
        let mut amplitudes = DVector::zeros(dim);
        amplitudes
            .rows_mut(0, self.dim())
            .copy_from(&self.amplitudes);
        Ket::from_vector(amplitudes)
    }

    /// True when the two kets agree to within `tol` in every amplitude.
    pub fn approx_eq(&self, other: &Ket, tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .amplitudes
                .iter()
                .zip(other.amplitudes.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn projector(&self) -> Result<DensityMatrix> {
        let column = &self.amplitudes;
        DensityMatrix::new(column * column.adjoint())
    }

    /// Reduced density matrix of the pure state on the `keep` subsystems.
    pub fn reduced_state(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        let layout = SubsystemLayout::new(dims, keep, self.dim())?;
        let mut block = DMatrix::zeros(layout.keep_offsets.len(), layout.env_offsets.len());
        for (row, &k) in layout.keep_offsets.iter().enumerate() {
            for (col, &e) in layout.env_offsets.iter().enumerate() {
                block[(row, col)] = self.amplitudes[k + e];
            }
        }
        DensityMatrix::new(&block * block.adjoint())
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates the three state invariants.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self { entries };
        rho.check()?;
        Ok(rho)
    }

    pub fn from_ket(ket: &Ket) -> Result<Self> {
        ket.projector()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim) * real(1.0 / dim as f64),
        }
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let diag =
            DVector::from_iterator(probabilities.len(), probabilities.iter().copied().map(real));
        Self::new(DMatrix::from_diagonal(&diag))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let adjoint = self.entries.adjoint();
        self.entries
            .iter()
            .zip(adjoint.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let hermitian = (&self.entries + self.entries.adjoint()) * real(0.5);
        SymmetricEigen::new(hermitian)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self) -> Result<()> {
        let dim = self.entries.nrows();
        if dim == 0 || self.entries.ncols() != dim {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                self.entries.nrows(),
                self.entries.ncols()
            )));
        }
        if self
            .entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState(
                "density matrix has non-finite entries".into(),
            ));
        }
        let herm = self.hermiticity_residual();
        if herm >= STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residual {herm:.3e})"
            )));
        }
        let trace = self.trace();
        if (trace - real(1.0)).norm() >= STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig <= -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (smallest eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            entries: self.entries.kronecker(&other.entries),
        }
    }

    /// Reduced state on the subsystems listed in `keep` (ascending), given
    /// the subsystem dimensions of `self`.
    pub fn partial_trace(&self, keep: &[usize], dims: &[usize]) -> Result<DensityMatrix> {
        let layout = SubsystemLayout::new(dims, keep, self.dim())?;
        let kept = layout.keep_offsets.len();
        let mut out = DMatrix::zeros(kept, kept);
        for (r, &kr) in layout.keep_offsets.iter().enumerate() {
            for (c, &kc) in layout.keep_offsets.iter().enumerate() {
                out[(r, c)] = layout
                    .env_offsets
                    .iter()
                    .map(|&e| self.entries[(kr + e, kc + e)])
                    .sum();
            }
        }
        DensityMatrix::new(out)
    }

    /// `Tr(self * other)`, which is real for Hermitian operands.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "overlap of states with different dims"
        );
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.entries[(i, j)] * other.entries[(j, i)];
            }
        }
        acc.re
    }

    /// Bloch vector of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "Bloch vector needs a qubit state, got dim {}",
                self.dim()
            )));
        }
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = trace_product(&self.entries, &pauli(k + 1));
        }
        Ok(out)
    }

    /// Pauli-basis decomposition of a two-qubit state.
    pub fn bloch_decompose(&self) -> Result<BlochDecomposition> {
        BlochDecomposition::of(self)
    }

    /// Largest elementwise distance to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Index bookkeeping for tracing out subsystems of a row-major tensor space.
struct SubsystemLayout {
    keep_offsets: Vec<usize>,
    env_offsets: Vec<usize>,
}

impl SubsystemLayout {
    fn new(dims: &[usize], keep: &[usize], total: usize) -> Result<Self> {
        let product: usize = dims.iter().product();
        if dims.is_empty() || product != total {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dims {dims:?} do not multiply to {total}"
            )));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::DimensionMismatch(format!(
                "kept subsystems {keep:?} must be ascending indices below {}",
                dims.len()
            )));
        }
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let env: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        Ok(Self {
            keep_offsets: offsets(keep, dims, &strides),
            env_offsets: offsets(&env, dims, &strides),
        })
    }
}

/// Flat offsets of every multi-index over `subsystems`, first listed
/// subsystem most significant.
fn offsets(subsystems: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subsystems {
        out = out
            .iter()
            .flat_map(|&base| (0..dims[s]).map(move |digit| base + digit * strides[s]))
            .collect();
    }
    out
}

/// Pauli matrix `sigma_k` for `k` in 0..=3, with `sigma_0` the identity.
pub fn pauli(k: usize) -> DMatrix<Complex64> {
    let o = real(0.0);
    let one = real(1.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[one, o, o, one]),
        1 => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        2 => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        3 => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
        _ => panic!("no Pauli matrix with index {k}"),
    }
}

fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a * b).trace().re
}

/// Two-qubit Pauli coefficients:
/// `rho = 1/4 (I⊗I + Σ x_i σ_i⊗I + Σ y_i I⊗σ_i + Σ t_ij σ_i⊗σ_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDecomposition {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochDecomposition {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "Bloch decomposition needs a two-qubit state, got dim {}",
                rho.dim()
            )));
        }
        let m = rho.entries();
        let coeff = |i: usize, j: usize| trace_product(m, &pauli(i).kronecker(&pauli(j)));
        let mut out = BlochDecomposition {
            x: [0.0; 3],
            y: [0.0; 3],
            t: [[0.0; 3]; 3],
        };
        for i in 0..3 {
            out.x[i] = coeff(i + 1, 0);
            out.y[i] = coeff(0, i + 1);
            for j in 0..3 {
                out.t[i][j] = coeff(i + 1, j + 1);
            }
        }
        Ok(out)
    }

    /// Rebuilds the 4x4 matrix from the coefficients.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let mut m = pauli(0).kronecker(&pauli(0));
        for i in 0..3 {
            m += pauli(i + 1).kronecker(&pauli(0)) * real(self.x[i]);
            m += pauli(0).kronecker(&pauli(i + 1)) * real(self.y[i]);
            for j in 0..3 {
                m += pauli(i + 1).kronecker(&pauli(j + 1)) * real(self.t[i][j]);
            }
        }
        m * real(0.25)
    }
}

/// Haar-random pure state of dimension `dim`.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    let raw: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let v = DVector::from_vec(raw);
    let norm = v.norm();
    Ket::from_vector(v / real(norm))
}

/// Mixed state obtained by tracing a Haar-random purification over an
/// `env_dim`-level environment.
pub fn random_mixed_state<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    env_dim: usize,
) -> DensityMatrix {
    random_ket(rng, dim * env_dim)
        .reduced_state(&[dim, env_dim], &[0])
        .expect("a normalized purification reduces to a valid state")
}

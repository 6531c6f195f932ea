//! l1-norm coherence in the computational basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{BlochDecomposition, DensityMatrix};

/// Radicands below this are treated as leaving the Bloch-form domain.
const RADICAND_TOL: f64 = 1e-12;

/// Sum of the moduli of the off-diagonal entries.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.entries();
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += m[(i, j)].norm();
            }
        }
    }
    total
}

/// True iff every off-diagonal entry has modulus below `tol`.
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    assert!(tol > 0.0, "incoherence tolerance must be positive");
    let m = rho.entries();
    let d = rho.dim();
    (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)].norm() < tol))
}

/// Global, local and residual coherence of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub global: f64,
    pub local_a: f64,
    pub local_b: f64,
    /// `global - local_a - local_b`
    pub residual: f64,
}

impl CoherenceReport {
    pub fn of(rho_ab: &DensityMatrix) -> Result<Self> {
        if rho_ab.dim() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "coherence report needs a two-qubit state, got dim {}",
                rho_ab.dim()
            )));
        }
        let global = l1_coherence(rho_ab);
        let local_a = l1_coherence(&rho_ab.partial_trace(&[0], &[2, 2])?);
        let local_b = l1_coherence(&rho_ab.partial_trace(&[1], &[2, 2])?);
        Ok(Self {
            global,
            local_a,
            local_b,
            residual: global - local_a - local_b,
        })
    }
}

pub fn coherence_report(rho_ab: &DensityMatrix) -> Result<CoherenceReport> {
    CoherenceReport::of(rho_ab)
}

/// Closed-form global l1 coherence written in terms of the Pauli
/// coefficients. Only a diagnostic: it is not valid for every state, and a
/// negative radicand is reported as [`Error::Domain`].
pub fn bloch_form_global_coherence(b: &BlochDecomposition) -> Result<f64> {
    let (x, y, t) = (&b.x, &b.y, &b.t);
    let sq = |v: f64| v * v;
    // t[i][j] holds t_{i+1, j+1}.
    let radicands = [
        sq(y[0]) + sq(t[2][0]) + sq(y[1]) + sq(t[2][1]),
        sq(y[0]) - sq(t[2][0]) + sq(y[1]) - sq(t[2][1]),
        sq(x[0]) + sq(t[0][2]) + sq(x[1]) + sq(t[1][2]),
        sq(x[0]) - sq(t[0][2]) + sq(x[1]) - sq(t[1][2]),
        sq(t[0][0]) + sq(t[1][1]) + sq(t[0][1]) - sq(t[1][0]),
        sq(t[0][0]) - sq(t[1][1]) + sq(t[0][1]) + sq(t[1][0]),
    ];
    if let Some(&bad) = radicands.iter().find(|&&r| r < -RADICAND_TOL) {
        return Err(Error::Domain { radicand: bad });
    }
    Ok(0.5 * radicands.iter().map(|r| r.max(0.0).sqrt()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_ket, random_mixed_state, Ket};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> DensityMatrix {
        Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
            .unwrap()
            .projector()
            .unwrap()
    }

    fn two_copies(beta: f64) -> DensityMatrix {
        let psi = Ket::qubit(beta, 0.0).unwrap();
        psi.tensor(&psi).projector().unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(
            l1_coherence(&DensityMatrix::diagonal(&[0.3, 0.7]).unwrap()),
            0.0
        );
        assert_abs_diff_eq!(l1_coherence(&plus()), 1.0, epsilon = 1e-15);
        let input = Ket::qubit(FRAC_1_SQRT_2, 0.0)
            .unwrap()
            .tensor(&Ket::basis(2, 0))
            .projector()
            .unwrap();
        assert_abs_diff_eq!(l1_coherence(&input), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn report_of_two_copies() {
        let r = coherence_report(&two_copies(FRAC_1_SQRT_2)).unwrap();
        assert_abs_diff_eq!(r.global, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.local_a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.local_b, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.residual, 1.0, epsilon = 1e-14);

        let zero = coherence_report(&Ket::basis(4, 0).projector().unwrap()).unwrap();
        assert_eq!(
            zero,
            CoherenceReport {
                global: 0.0,
                local_a: 0.0,
                local_b: 0.0,
                residual: 0.0
            }
        );
        assert!(coherence_report(&plus()).is_err());
    }

    #[test]
    fn incoherence_detection() {
        assert!(is_incoherent(&DensityMatrix::maximally_mixed(2), 1e-12));
        assert!(!is_incoherent(&plus(), 1e-12));
    }

    #[test]
    fn bloch_form_examples() {
        let mixed = DensityMatrix::maximally_mixed(4).bloch_decompose().unwrap();
        assert_eq!(bloch_form_global_coherence(&mixed).unwrap(), 0.0);
        let zz = Ket::basis(4, 0)
            .projector()
            .unwrap()
            .bloch_decompose()
            .unwrap();
        assert_eq!(bloch_form_global_coherence(&zz).unwrap(), 0.0);
        let copies = two_copies(FRAC_1_SQRT_2).bloch_decompose().unwrap();
        match bloch_form_global_coherence(&copies) {
            Ok(v) => assert_abs_diff_eq!(v, 3.0, epsilon = 1e-12),
            Err(e) => assert!(matches!(e, Error::Domain { .. })),
        }
    }

    #[test]
    fn bloch_form_reports_domain_errors() {
        // t_31 with no matching y_1 makes the second radicand negative.
        let mut b = DensityMatrix::maximally_mixed(4).bloch_decompose().unwrap();
        b.t[2][0] = 0.5;
        assert!(matches!(
            bloch_form_global_coherence(&b),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn superadditivity_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let rho = random_mixed_state(&mut rng, 4, 4);
            let r = coherence_report(&rho).unwrap();
            assert!(r.residual >= -1e-10, "residual {} for {rho:?}", r.residual);
            assert!(r.global <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn convexity_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let n = rng.random_range(2..5);
            let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            let states: Vec<DensityMatrix> =
                (0..n).map(|_| random_mixed_state(&mut rng, 4, 2)).collect();
            let mut mix = DMatrix::<Complex64>::zeros(4, 4);
            let mut avg = 0.0;
            for (w, s) in weights.iter().zip(&states) {
                mix += s.entries() * Complex64::new(w / total, 0.0);
                avg += w / total * l1_coherence(s);
            }
            let mixed = DensityMatrix::new(mix).unwrap();
            assert!(avg >= l1_coherence(&mixed) - 1e-10);
        }
    }

    #[test]
    fn contractive_under_diagonal_kraus_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let rho = random_mixed_state(&mut rng, 4, 4);
            let kraus_count = rng.random_range(1..4);
            // Column i of the amplitude table is a unit vector, so the
            // diagonal operators satisfy Σ K†K = I.
            let columns: Vec<Ket> = (0..4).map(|_| random_ket(&mut rng, kraus_count)).collect();
            let mut out = DMatrix::<Complex64>::zeros(4, 4);
            for n in 0..kraus_count {
                let k = DMatrix::from_fn(4, 4, |i, j| {
                    if i == j {
                        columns[i].amplitudes()[n]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                out += &k * rho.entries() * k.adjoint();
            }
            let image = DensityMatrix::new(out).unwrap();
            assert!(l1_coherence(&rho) >= l1_coherence(&image) - 1e-10);
        }
    }
}

//! Brute-force verification of the closed-form tables.
//!
//! Machines are turned into explicit isometry matrices on the full
//! system ⊗ ancilla space, applied to pure inputs, and reduced with a partial
//! trace. Nothing here reuses the closed-form evaluators.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machines::{
    clone_p_table, deleted_after_clone_r_table, imperfect_copy_deleter, reclone_m_table,
    reclone_n_table, two_copy_deleted_state, two_copy_deleter, ClonerAncillas, ClonerPhases,
    ClonerSpec, CoefficientTable, DeleterSpec, Machine, GRAM_TOL,
};
use crate::qstate::{random_ket, real, DensityMatrix, Ket};

/// Below this residual norm a vector is treated as lying in the span already
/// collected.
const RANK_TOL: f64 = 1e-8;

/// A matrix `V` with `V^dagger V = I`, together with the subsystem layout of
/// its input and output spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryMatrix {
    entries: DMatrix<Complex64>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl IsometryMatrix {
    pub fn new(
        entries: DMatrix<Complex64>,
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
    ) -> Result<Self> {
        let d_in: usize = in_dims.iter().product();
        let d_out: usize = out_dims.iter().product();
        if entries.shape() != (d_out, d_in) {
            return Err(Error::DimensionMismatch(format!(
                "isometry has shape {:?}, layout needs ({d_out}, {d_in})",
                entries.shape()
            )));
        }
        let gram = entries.adjoint() * &entries;
        let deviation = (gram - DMatrix::<Complex64>::identity(d_in, d_in))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > GRAM_TOL {
            return Err(Error::IsometryViolation { deviation });
        }
        Ok(Self {
            entries,
            in_dims,
            out_dims,
        })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn d_in(&self) -> usize {
        self.entries.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.entries.nrows()
    }

    /// `I ⊗ V ⊗ I` acting on `dims`, with `V` replacing the subsystems
    /// starting at index `factor`.
    pub fn on_factor(&self, dims: &[usize], factor: usize) -> Result<IsometryMatrix> {
        let span = self.in_dims.len();
        if factor + span > dims.len() || dims[factor..factor + span] != self.in_dims[..] {
            return Err(Error::DimensionMismatch(format!(
                "cannot place an isometry on {:?} at factor {factor} of {dims:?}",
                self.in_dims
            )));
        }
        let left: usize = dims[..factor].iter().product();
        let right: usize = dims[factor + span..].iter().product();
        let entries = DMatrix::<Complex64>::identity(left, left)
            .kronecker(&self.entries)
            .kronecker(&DMatrix::<Complex64>::identity(right, right));
        let mut out_dims = dims[..factor].to_vec();
        out_dims.extend_from_slice(&self.out_dims);
        out_dims.extend_from_slice(&dims[factor + span..]);
        Ok(Self {
            entries,
            in_dims: dims.to_vec(),
            out_dims,
        })
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if ket.dim() != self.d_in() {
            return Err(Error::DimensionMismatch(format!(
                "isometry expects dim {}, got {}",
                self.d_in(),
                ket.dim()
            )));
        }
        Ok(Ket::unnormalized(
            (&self.entries * ket.amplitudes()).iter().copied().collect(),
        ))
    }
}

/// Cloner as a map from the input qubit into cloned ⊗ ancilla, output
/// layout `[2, 2, x]`.
pub fn cloner_isometry(spec: &ClonerSpec) -> Result<IsometryMatrix> {
    let x = spec.ancilla_dim();
    let mut m = DMatrix::zeros(4 * x, 2);
    for (col, image) in [spec.image_of_zero(), spec.image_of_one()]
        .iter()
        .enumerate()
    {
        for (sector, t) in image.iter().enumerate() {
            for (k, amp) in t.ancilla.amplitudes().iter().enumerate() {
                m[(sector * x + k, col)] += t.coefficient * amp;
            }
        }
    }
    IsometryMatrix::new(m, vec![2], vec![2, 2, x])
}

/// Subtracts the projection onto `basis` twice for stability and returns the
/// coefficients removed.
fn project_out(v: &mut DVector<Complex64>, basis: &[DVector<Complex64>]) -> Vec<Complex64> {
    let mut coeffs = vec![real(0.0); basis.len()];
    for _ in 0..2 {
        for (e, c) in basis.iter().zip(coeffs.iter_mut()) {
            let overlap = e.dotc(v);
            *v -= e * overlap;
            *c += overlap;
        }
    }
    coeffs
}

/// Extends `basis` with standard basis vectors until it spans `dim`
/// dimensions, returning only the added vectors.
fn complete_basis(basis: &[DVector<Complex64>], dim: usize) -> Vec<DVector<Complex64>> {
    let mut all = basis.to_vec();
    let mut added = Vec::new();
    for i in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = DVector::from_fn(dim, |r, _| if r == i { real(1.0) } else { real(0.0) });
        project_out(&mut v, &all);
        let n = v.norm();
        if n > RANK_TOL {
            v /= real(n);
            all.push(v.clone());
            added.push(v);
        }
    }
    added
}

/// Linear extension of a deleter's rules, completed to a full isometry on
/// system ⊗ ancilla. Layout `[2, 2, anc_in] -> [2, 2, anc_out]`.
pub fn deleter_isometry(deleter: &DeleterSpec) -> Result<IsometryMatrix> {
    let d_in = 4 * deleter.anc_in_dim();
    let d_out = 4 * deleter.anc_out_dim();
    // Orthonormalize the inputs and apply the same combinations to the
    // outputs; a Gram-consistent rule set keeps the outputs orthonormal.
    let mut ins: Vec<DVector<Complex64>> = Vec::new();
    let mut outs: Vec<DVector<Complex64>> = Vec::new();
    for rule in deleter.rules() {
        let mut u = rule.input.amplitudes().clone();
        let mut v = rule.output.amplitudes().clone();
        let coeffs = project_out(&mut u, &ins);
        for (f, c) in outs.iter().zip(&coeffs) {
            v -= f * *c;
        }
        let n = u.norm();
        if n > RANK_TOL {
            ins.push(u / real(n));
            outs.push(v / real(n));
        }
    }
    let extra_in = complete_basis(&ins, d_in);
    let extra_out = complete_basis(&outs, d_out);
    if extra_out.len() < extra_in.len() {
        return Err(Error::DimensionMismatch(
            "deleter output space is too small to complete the isometry".into(),
        ));
    }
    let mut m = DMatrix::zeros(d_out, d_in);
    for (f, e) in outs
        .iter()
        .chain(&extra_out)
        .zip(ins.iter().chain(&extra_in))
    {
        m += f * e.adjoint();
    }
    IsometryMatrix::new(
        m,
        vec![2, 2, deleter.anc_in_dim()],
        vec![2, 2, deleter.anc_out_dim()],
    )
}

/// Runs `input` (laid out as `input_dims`) through `chain` and returns the
/// reduced state on the `keep` subsystems of the final layout.
pub fn simulate_state(
    chain: &[IsometryMatrix],
    input: &Ket,
    input_dims: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix> {
    let mut dims = input_dims.to_vec();
    let mut state = input.clone();
    for iso in chain {
        if iso.in_dims() != dims {
            return Err(Error::DimensionMismatch(format!(
                "chain step expects layout {:?}, state has {dims:?}",
                iso.in_dims()
            )));
        }
        state = iso.apply(&state)?;
        dims = iso.out_dims().to_vec();
    }
    state.reduced_state(&dims, keep)
}

/// [`simulate_state`] on the qubit `alpha|0> + beta e^{i phase}|1>`.
pub fn simulate(
    chain: &[IsometryMatrix],
    beta: f64,
    phase: f64,
    keep: &[usize],
) -> Result<DensityMatrix> {
    simulate_state(chain, &Ket::qubit(beta, phase)?, &[2], keep)
}

/// `|psi>|psi>|A>` with a one-dimensional deleter ancilla.
fn two_copy_input(beta: f64, phase: f64) -> Result<Ket> {
    let psi = Ket::qubit(beta, phase)?;
    Ok(psi.tensor(&psi).tensor(&Ket::basis(1, 0)))
}

const TWO_COPY_IN: [usize; 3] = [2, 2, 1];
const TWO_COPY_OUT: [usize; 3] = [2, 2, 3];

/// Isometry chains for every closed form of one machine.
#[derive(Debug, Clone)]
pub struct OracleChains {
    pub cloner: IsometryMatrix,
    pub deleter: IsometryMatrix,
    pub two_copy: IsometryMatrix,
    pub reclone_first: IsometryMatrix,
    pub reclone_second: IsometryMatrix,
}

impl OracleChains {
    pub fn new(spec: &ClonerSpec) -> Result<Self> {
        let cloner = cloner_isometry(spec)?;
        let deleter = deleter_isometry(&imperfect_copy_deleter(spec)?)?;
        let two_copy = deleter_isometry(&two_copy_deleter())?;
        let reclone_first = cloner.on_factor(&TWO_COPY_OUT, 0)?;
        let reclone_second = cloner.on_factor(&TWO_COPY_OUT, 1)?;
        Ok(Self {
            cloner,
            deleter,
            two_copy,
            reclone_first,
            reclone_second,
        })
    }

    pub fn cloned(&self, beta: f64, phase: f64) -> Result<DensityMatrix> {
        simulate(std::slice::from_ref(&self.cloner), beta, phase, &[0, 1])
    }

    pub fn cloned_then_deleted(&self, beta: f64, phase: f64) -> Result<DensityMatrix> {
        simulate(
            &[self.cloner.clone(), self.deleter.clone()],
            beta,
            phase,
            &[0, 1],
        )
    }

    pub fn two_copy_deleted(&self, beta: f64, phase: f64) -> Result<DensityMatrix> {
        simulate_state(
            std::slice::from_ref(&self.two_copy),
            &two_copy_input(beta, phase)?,
            &TWO_COPY_IN,
            &[0, 1],
        )
    }

    /// First copy after two-copy deletion, re-cloned.
    pub fn recloned_first(&self, beta: f64, phase: f64) -> Result<DensityMatrix> {
        simulate_state(
            &[self.two_copy.clone(), self.reclone_first.clone()],
            &two_copy_input(beta, phase)?,
            &TWO_COPY_IN,
            &[0, 1],
        )
    }

    /// Second copy after two-copy deletion, re-cloned.
    pub fn recloned_second(&self, beta: f64, phase: f64) -> Result<DensityMatrix> {
        simulate_state(
            &[self.two_copy.clone(), self.reclone_second.clone()],
            &two_copy_input(beta, phase)?,
            &TWO_COPY_IN,
            &[1, 2],
        )
    }
}

/// One comparison of a closed form against the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationEntry {
    pub table: String,
    pub beta: f64,
    pub max_deviation: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub machine: String,
    pub tol: f64,
    pub entries: Vec<VerificationEntry>,
}

impl VerificationReport {
    /// Largest deviation over entries that evaluated; NaN if one failed to
    /// evaluate at all.
    pub fn max_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_deviation)
            .fold(0.0, |a, b| {
                if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            })
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<usize> {
        let mut w = csv::Writer::from_writer(sink);
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(self.entries.len())
    }
}

fn table_deviation(table: Result<CoefficientTable>, oracle: Result<DensityMatrix>) -> Result<f64> {
    Ok(table?.max_abs_diff(&oracle?))
}

/// Compares the p, r, m and n tables and the two-copy deleted state with the
/// oracle at every `beta`. Evaluation errors become failed entries.
pub fn verify_all(machine: &Machine, betas: &[f64], tol: f64) -> Result<VerificationReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let spec = machine.spec();
    let chains = OracleChains::new(&spec);
    let mut entries = Vec::with_capacity(5 * betas.len());
    for &beta in betas {
        let deviations: [(&str, Result<f64>); 5] = match &chains {
            Ok(ch) => [
                (
                    "p",
                    table_deviation(clone_p_table(&spec, beta, 0.0), ch.cloned(beta, 0.0)),
                ),
                (
                    "r",
                    table_deviation(
                        deleted_after_clone_r_table(&spec, beta, 0.0),
                        ch.cloned_then_deleted(beta, 0.0),
                    ),
                ),
                (
                    "m",
                    table_deviation(reclone_m_table(&spec, beta), ch.recloned_first(beta, 0.0)),
                ),
                (
                    "n",
                    table_deviation(reclone_n_table(&spec, beta), ch.recloned_second(beta, 0.0)),
                ),
                (
                    "deleted",
                    two_copy_deleted_state(beta, 0.0)
                        .and_then(|rho| Ok(rho.max_abs_diff(&ch.two_copy_deleted(beta, 0.0)?))),
                ),
            ],
            Err(e) => ["p", "r", "m", "n", "deleted"]
                .map(|t| (t, Err(Error::InvalidState(e.to_string())))),
        };
        for (table, dev) in deviations {
            entries.push(match dev {
                Ok(d) => VerificationEntry {
                    table: table.into(),
                    beta,
                    max_deviation: d,
                    passed: d <= tol,
                    error: None,
                },
                Err(e) => VerificationEntry {
                    table: table.into(),
                    beta,
                    max_deviation: f64::NAN,
                    passed: false,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(VerificationReport {
        machine: machine.label().into(),
        tol,
        entries,
    })
}

/// `n` evenly spaced points covering `[0, 1]`.
pub fn beta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

fn random_orthogonal_to<R: Rng + ?Sized>(rng: &mut R, v: &Ket) -> Ket {
    loop {
        let mut r = random_ket(rng, v.dim()).amplitudes().clone();
        project_out(&mut r, std::slice::from_ref(v.amplitudes()));
        let n = r.norm();
        if n > 1e-3 {
            return Ket::unnormalized((r / real(n)).iter().copied().collect());
        }
    }
}

/// `k |v> + sqrt(1 - |k|^2) |w>` with `w` a random unit vector orthogonal to
/// `v`, so that `<v|result> = k`.
fn ket_with_overlap<R: Rng + ?Sized>(rng: &mut R, v: &Ket, k: Complex64) -> Ket {
    let w = random_orthogonal_to(rng, v);
    let s = (1.0 - k.norm_sqr()).max(0.0).sqrt();
    Ket::unnormalized(
        (v.amplitudes() * k + w.amplitudes() * real(s))
            .iter()
            .copied()
            .collect(),
    )
}

/// Random cloner whose two images are orthonormal. With `deletable` the
/// ancillas also satisfy `A ⊥ C~` and `A~ ⊥ C`, which is what the
/// imperfect-copy deleter needs to be isometric.
///
/// Magnitudes, phases and most ancillas are drawn at random; one ancilla is
/// then solved for so that `<U0|U1> = 0`, and draws where no solution exists
/// are rejected.
pub fn random_valid_spec<R: Rng + ?Sized>(
    rng: &mut R,
    ancilla_dim: usize,
    deletable: bool,
) -> ClonerSpec {
    assert!(
        ancilla_dim >= 2,
        "random specs need an ancilla of dimension at least 2"
    );
    loop {
        let raw = random_ket(rng, 4);
        let mut magnitudes = [0.0; 4];
        for (m, z) in magnitudes.iter_mut().zip(raw.amplitudes().iter()) {
            *m = z.norm();
        }
        let mut ph = [0.0; 8];
        for p in ph.iter_mut() {
            *p = rng.random_range(0.0..std::f64::consts::TAU);
        }
        let phases = ClonerPhases {
            a: ph[0],
            b1: ph[1],
            b2: ph[2],
            c: ph[3],
            a_t: ph[4],
            b1_t: ph[5],
            b2_t: ph[6],
            c_t: ph[7],
        };
        let coef = |m: f64, p: f64| Complex64::from_polar(m, p);
        let [ma, mb1, mb2, mc] = magnitudes;
        let (a, b1, b2, c) = (
            coef(ma, ph[0]),
            coef(mb1, ph[1]),
            coef(mb2, ph[2]),
            coef(mc, ph[3]),
        );
        let (a_t, b1_t, b2_t, c_t) = (
            coef(ma, ph[4]),
            coef(mb1, ph[5]),
            coef(mb2, ph[6]),
            coef(mc, ph[7]),
        );
        let mut k = || random_ket(rng, ancilla_dim);
        let (anc_a, anc_b1, anc_b2, anc_c, anc_b1_t) = (k(), k(), k(), k(), k());

        let ancillas = if deletable {
            let anc_c_t = random_orthogonal_to(rng, &anc_a);
            let anc_a_t = random_orthogonal_to(rng, &anc_c);
            // conj(b1) b2~ <B1|B2~> + conj(b2) b1~ <B2|B1~> = 0
            let rest = b2.conj() * b1_t * anc_b2.inner(&anc_b1_t);
            let lead = b1.conj() * b2_t;
            let target = if lead.norm() < 1e-12 {
                None
            } else {
                Some(-rest / lead)
            };
            let Some(overlap) = target.filter(|o| o.norm() <= 1.0) else {
                continue;
            };
            let anc_b2_t = ket_with_overlap(rng, &anc_b1, overlap);
            ClonerAncillas {
                a: anc_a,
                b1: anc_b1,
                b2: anc_b2,
                c: anc_c,
                a_t: anc_a_t,
                b1_t: anc_b1_t,
                b2_t: anc_b2_t,
                c_t: anc_c_t,
            }
        } else {
            let anc_a_t = random_ket(rng, ancilla_dim);
            let anc_b2_t = random_ket(rng, ancilla_dim);
            let rest = b1.conj() * b2_t * anc_b1.inner(&anc_b2_t)
                + b2.conj() * b1_t * anc_b2.inner(&anc_b1_t)
                + c.conj() * a_t * anc_c.inner(&anc_a_t);
            let lead = a.conj() * c_t;
            let target = if lead.norm() < 1e-12 {
                None
            } else {
                Some(-rest / lead)
            };
            let Some(overlap) = target.filter(|o| o.norm() <= 1.0) else {
                continue;
            };
            let anc_c_t = ket_with_overlap(rng, &anc_a, overlap);
            ClonerAncillas {
                a: anc_a,
                b1: anc_b1,
                b2: anc_b2,
                c: anc_c,
                a_t: anc_a_t,
                b1_t: anc_b1_t,
                b2_t: anc_b2_t,
                c_t: anc_c_t,
            }
        };
        // Renormalize away rounding so the spec validates.
        let fix = |v: Ket| {
            Ket::unnormalized(
                (v.amplitudes() / real(v.norm_sqr().sqrt()))
                    .iter()
                    .copied()
                    .collect(),
            )
        };
        let ancillas = ClonerAncillas {
            a: fix(ancillas.a),
            b1: fix(ancillas.b1),
            b2: fix(ancillas.b2),
            c: fix(ancillas.c),
            a_t: fix(ancillas.a_t),
            b1_t: fix(ancillas.b1_t),
            b2_t: fix(ancillas.b2_t),
            c_t: fix(ancillas.c_t),
        };
        let norm: f64 = magnitudes.iter().map(|m| m * m).sum();
        let magnitudes = magnitudes.map(|m| m / norm.sqrt());
        let Ok(spec) = ClonerSpec::new(magnitudes, phases, ancillas) else {
            continue;
        };
        if cloner_isometry(&spec).is_ok() {
            return spec;
        }
    }
}

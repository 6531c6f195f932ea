//! Cloning and deleting machines, and closed-form evaluators for the
//! coefficient tables of their output states.
//!
//! A cloner acts on `|psi>_a |0>_b |X>` and is described by its images
//!
//! ```text
//! U|0> = a  |00>|A>  + b1 |01>|B1>  + b2 |10>|B2>  + c  |11>|C>
//! U|1> = a~ |11>|A~> + b1~|10>|B1~> + b2~|01>|B2~> + c~ |00>|C~>
//! ```
//!
//! The second row is the mirror image of the first under `0 <-> 1`. The
//! coefficient tables, the deleter rules and both named machines are written
//! in this convention.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{qubit_amplitudes, real, DensityMatrix, Ket, STATE_TOL};

/// Tolerance on Gram-matrix agreement for rule sets and isometries.
pub const GRAM_TOL: f64 = 1e-10;

/// Free phases of the eight cloner coefficients (radians).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClonerPhases {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub a_t: f64,
    pub b1_t: f64,
    pub b2_t: f64,
    pub c_t: f64,
}

impl ClonerPhases {
    fn wrapped(self) -> Self {
        let w = |p: f64| p.rem_euclid(TAU);
        Self {
            a: w(self.a),
            b1: w(self.b1),
            b2: w(self.b2),
            c: w(self.c),
            a_t: w(self.a_t),
            b1_t: w(self.b1_t),
            b2_t: w(self.b2_t),
            c_t: w(self.c_t),
        }
    }

    fn all(&self) -> [f64; 8] {
        [
            self.a, self.b1, self.b2, self.c, self.a_t, self.b1_t, self.b2_t, self.c_t,
        ]
    }
}

/// Output ancilla states, all in one space of dimension `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonerAncillas {
    pub a: Ket,
    pub b1: Ket,
    pub b2: Ket,
    pub c: Ket,
    pub a_t: Ket,
    pub b1_t: Ket,
    pub b2_t: Ket,
    pub c_t: Ket,
}

impl ClonerAncillas {
    fn all(&self) -> [&Ket; 8] {
        [
            &self.a, &self.b1, &self.b2, &self.c, &self.a_t, &self.b1_t, &self.b2_t, &self.c_t,
        ]
    }
}

/// One term `coefficient * |ancilla>` of a cloner image.
#[derive(Debug, Clone, Copy)]
pub struct Term<'a> {
    pub coefficient: Complex64,
    pub ancilla: &'a Ket,
}

/// A 1 -> 2 cloner. Both rows share the magnitudes `|a|, |b1|, |b2|, |c|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonerSpec {
    mag_a: f64,
    mag_b1: f64,
    mag_b2: f64,
    mag_c: f64,
    phases: ClonerPhases,
    ancillas: ClonerAncillas,
}

impl ClonerSpec {
    /// `magnitudes` is `[|a|, |b1|, |b2|, |c|]`.
    pub fn new(
        magnitudes: [f64; 4],
        phases: ClonerPhases,
        ancillas: ClonerAncillas,
    ) -> Result<Self> {
        if magnitudes.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coefficient magnitudes must be finite and nonnegative, got {magnitudes:?}"
            )));
        }
        let norm: f64 = magnitudes.iter().map(|m| m * m).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidParameter(format!(
                "squared magnitudes sum to {norm}, expected 1"
            )));
        }
        if phases.all().iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "cloner phases must be finite".into(),
            ));
        }
        let dim = ancillas.a.dim();
        for k in ancillas.all() {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "ancilla kets must share one dimension ({} vs {dim})",
                    k.dim()
                )));
            }
            if !k.is_normalized() {
                return Err(Error::InvalidState(
                    "ancilla kets must be normalized".into(),
                ));
            }
        }
        let [mag_a, mag_b1, mag_b2, mag_c] = magnitudes;
        Ok(Self {
            mag_a,
            mag_b1,
            mag_b2,
            mag_c,
            phases: phases.wrapped(),
            ancillas,
        })
    }

    pub fn magnitudes(&self) -> [f64; 4] {
        [self.mag_a, self.mag_b1, self.mag_b2, self.mag_c]
    }

    pub fn phases(&self) -> &ClonerPhases {
        &self.phases
    }

    pub fn ancillas(&self) -> &ClonerAncillas {
        &self.ancillas
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancillas.a.dim()
    }

    pub fn with_phases(&self, phases: ClonerPhases) -> Result<Self> {
        Self::new(self.magnitudes(), phases, self.ancillas.clone())
    }

    /// Terms of `U|0>` on the sectors `|00>, |01>, |10>, |11>`.
    pub fn image_of_zero(&self) -> [Term<'_>; 4] {
        let p = &self.phases;
        let k = &self.ancillas;
        [
            term(self.mag_a, p.a, &k.a),
            term(self.mag_b1, p.b1, &k.b1),
            term(self.mag_b2, p.b2, &k.b2),
            term(self.mag_c, p.c, &k.c),
        ]
    }

    /// Terms of `U|1>` on the sectors `|00>, |01>, |10>, |11>`.
    pub fn image_of_one(&self) -> [Term<'_>; 4] {
        let p = &self.phases;
        let k = &self.ancillas;
        [
            term(self.mag_c, p.c_t, &k.c_t),
            term(self.mag_b2, p.b2_t, &k.b2_t),
            term(self.mag_b1, p.b1_t, &k.b1_t),
            term(self.mag_a, p.a_t, &k.a_t),
        ]
    }

    /// Bloch-vector shrink factor `|a|^2 - |c|^2`.
    pub fn reduction_factor(&self) -> f64 {
        self.mag_a * self.mag_a - self.mag_c * self.mag_c
    }

    /// Single-copy fidelity `(1 + eta) / 2`.
    pub fn cloner_fidelity(&self) -> f64 {
        0.5 * (1.0 + self.reduction_factor())
    }
}

fn term(magnitude: f64, phase: f64, ancilla: &Ket) -> Term<'_> {
    Term {
        coefficient: Complex64::from_polar(magnitude, phase),
        ancilla,
    }
}

pub fn reduction_factor(spec: &ClonerSpec) -> f64 {
    spec.reduction_factor()
}

pub fn cloner_fidelity(spec: &ClonerSpec) -> f64 {
    spec.cloner_fidelity()
}

/// Optimal universal cloner. Ancilla space is a qubit with `|A> = |0>` and
/// `|A_perp> = |1>`; `C` and `C~` multiply zero magnitudes.
pub fn ouqc_spec() -> ClonerSpec {
    let a = Ket::basis(2, 0);
    let a_perp = Ket::basis(2, 1);
    let ancillas = ClonerAncillas {
        a: a.clone(),
        b1: a_perp.clone(),
        b2: a_perp.clone(),
        c: a.clone(),
        a_t: a_perp.clone(),
        b1_t: a.clone(),
        b2_t: a,
        c_t: a_perp,
    };
    let b = (1.0f64 / 6.0).sqrt();
    ClonerSpec::new(
        [(2.0f64 / 3.0).sqrt(), b, b, 0.0],
        ClonerPhases::default(),
        ancillas,
    )
    .expect("optimal universal cloner is a valid spec")
}

/// Phase-covariant cloner for equatorial inputs.
pub fn pc_spec() -> ClonerSpec {
    let zero = Ket::basis(2, 0);
    let one = Ket::basis(2, 1);
    let ancillas = ClonerAncillas {
        a: zero.clone(),
        b1: one.clone(),
        b2: one.clone(),
        c: zero.clone(),
        a_t: one.clone(),
        b1_t: zero.clone(),
        b2_t: zero,
        c_t: one,
    };
    let s = (1.0f64 / 8.0).sqrt();
    ClonerSpec::new([0.5 + s, s, s, 0.5 - s], ClonerPhases::default(), ancillas)
        .expect("phase-covariant cloner is a valid spec")
}

/// Machine selector shared by pipelines, analysis and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum Machine {
    Ouqc,
    Pc,
    General(Box<ClonerSpec>),
}

impl Machine {
    pub fn spec(&self) -> ClonerSpec {
        match self {
            Machine::Ouqc => ouqc_spec(),
            Machine::Pc => pc_spec(),
            Machine::General(spec) => (**spec).clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Machine::Ouqc => "ouqc",
            Machine::Pc => "pc",
            Machine::General(_) => "general",
        }
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Machine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ouqc" => Ok(Machine::Ouqc),
            "pc" => Ok(Machine::Pc),
            other => Err(Error::InvalidParameter(format!(
                "unknown machine '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TableKind {
    /// cloned state
    P,
    /// cloned then deleted
    R,
    /// re-cloned first copy after two-copy deletion
    M,
    /// re-cloned second copy after two-copy deletion
    N,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TableKind::P => "p",
            TableKind::R => "r",
            TableKind::M => "m",
            TableKind::N => "n",
        };
        f.write_str(s)
    }
}

/// Coefficients `t_{ij,kl}` of `sum t_{ij,kl} |ij><kl|`, indexed by
/// `2i + j` and `2k + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    kind: TableKind,
    entries: [[Complex64; 4]; 4],
}

impl CoefficientTable {
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn entry(&self, ij: usize, kl: usize) -> Complex64 {
        self.entries[ij][kl]
    }

    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.entries
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for k in 0..4 {
                worst = worst.max((self.entries[i][k] - self.entries[k][i].conj()).norm());
            }
        }
        worst
    }

    pub fn diagonal_sum(&self) -> Complex64 {
        (0..4).map(|i| self.entries[i][i]).sum()
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(DMatrix::from_fn(4, 4, |i, k| self.entries[i][k]))
    }

    pub fn max_abs_diff(&self, rho: &DensityMatrix) -> f64 {
        assert_eq!(rho.dim(), 4);
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for k in 0..4 {
                worst = worst.max((self.entries[i][k] - rho.entry(i, k)).norm());
            }
        }
        worst
    }
}

/// `<bra|ket>` for superpositions written out term by term.
fn bracket(bra: &[Term<'_>], ket: &[Term<'_>]) -> Complex64 {
    let mut acc = real(0.0);
    for b in bra {
        for k in ket {
            acc += b.coefficient.conj() * k.coefficient * b.ancilla.inner(k.ancilla);
        }
    }
    acc
}

/// Table of a pure state `sum_s |s>|w_s>`: entry `(s, s')` is `<w_s'|w_s>`.
fn table_from_sectors(kind: TableKind, sectors: &[Vec<Term<'_>>; 4]) -> CoefficientTable {
    let mut entries = [[real(0.0); 4]; 4];
    for (i, row) in entries.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = bracket(&sectors[k], &sectors[i]);
        }
    }
    CoefficientTable { kind, entries }
}

fn scaled(t: Term<'_>, factor: Complex64) -> Term<'_> {
    Term {
        coefficient: t.coefficient * factor,
        ancilla: t.ancilla,
    }
}

/// Coefficients of the cloned state for input `alpha|0> + beta e^{i phase}|1>`
/// and blank `|0>`.
///
/// Sector kets are `u1 = alpha a|A> + beta c~|C~>` on `|00>`,
/// `v1 = alpha b1|B1> + beta b2~|B2~>` on `|01>`,
/// `v2 = alpha b2|B2> + beta b1~|B1~>` on `|10>` and
/// `u2 = alpha c|C> + beta a~|A~>` on `|11>`.
pub fn clone_p_table(spec: &ClonerSpec, beta: f64, phase: f64) -> Result<CoefficientTable> {
    let (alpha, beta) = qubit_amplitudes(beta, phase)?;
    let zero = spec.image_of_zero();
    let one = spec.image_of_one();
    let sectors: [Vec<Term<'_>>; 4] =
        std::array::from_fn(|s| vec![scaled(zero[s], alpha), scaled(one[s], beta)]);
    Ok(table_from_sectors(TableKind::P, &sectors))
}

pub fn cloned_state(spec: &ClonerSpec, beta: f64, phase: f64) -> Result<DensityMatrix> {
    clone_p_table(spec, beta, phase)?.to_density_matrix()
}

/// Cloning of the incoherent mixture `w0 |0><0| + w1 |1><1|`.
fn mixture_table(kind: TableKind, spec: &ClonerSpec, w0: f64, w1: f64) -> CoefficientTable {
    let zero = spec.image_of_zero();
    let one = spec.image_of_one();
    let mut entries = [[real(0.0); 4]; 4];
    for (i, row) in entries.iter_mut().enumerate() {
        for (k, slot) in row.iter_mut().enumerate() {
            *slot = real(w0) * bracket(&[zero[k]], &[zero[i]])
                + real(w1) * bracket(&[one[k]], &[one[i]]);
        }
    }
    CoefficientTable { kind, entries }
}

/// Re-cloning the first copy left by two-copy deletion,
/// `alpha^2 |0><0| + beta^2 |1><1|`.
pub fn reclone_m_table(spec: &ClonerSpec, beta: f64) -> Result<CoefficientTable> {
    let (alpha, beta) = qubit_amplitudes(beta, 0.0)?;
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    Ok(mixture_table(TableKind::M, spec, a2, b2))
}

/// Re-cloning the second copy, `(1 - alpha^2 beta^2)|0><0| + alpha^2 beta^2 |1><1|`.
pub fn reclone_n_table(spec: &ClonerSpec, beta: f64) -> Result<CoefficientTable> {
    let (alpha, beta) = qubit_amplitudes(beta, 0.0)?;
    let x = alpha.norm_sqr() * beta.norm_sqr();
    Ok(mixture_table(TableKind::N, spec, 1.0 - x, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeleterKind {
    /// Deletes the second of two imperfect clones.
    ImperfectCopy,
    /// Deletes the second of two exact copies.
    TwoCopy,
}

/// `input -> output`, both vectors on `system (4) ⊗ ancilla`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteRule {
    pub input: Ket,
    pub output: Ket,
}

impl RewriteRule {
    /// `|sys_in>|anc_in> -> |sys_out>|anc_out>` with two-qubit basis indices.
    pub fn product(sys_in: usize, anc_in: &Ket, sys_out: usize, anc_out: &Ket) -> Self {
        Self {
            input: Ket::basis(4, sys_in).tensor(anc_in),
            output: Ket::basis(4, sys_out).tensor(anc_out),
        }
    }
}

/// A deleting machine given by its action on a set of input vectors.
///
/// The linear extension of the rules to their span must be an isometry.
#[derive(Debug, Clone, PartialEq)]
pub struct DeleterSpec {
    kind: DeleterKind,
    rules: Vec<RewriteRule>,
    anc_in_dim: usize,
    anc_out_dim: usize,
}

impl DeleterSpec {
    /// Merges rules with identical inputs and checks the Gram matrices of
    /// inputs and outputs agree.
    pub fn new(
        kind: DeleterKind,
        rules: Vec<RewriteRule>,
        anc_in_dim: usize,
        anc_out_dim: usize,
    ) -> Result<Self> {
        let (d_in, d_out) = (4 * anc_in_dim, 4 * anc_out_dim);
        let mut merged: Vec<RewriteRule> = Vec::with_capacity(rules.len());
        for rule in rules {
            if rule.input.dim() != d_in || rule.output.dim() != d_out {
                return Err(Error::DimensionMismatch(format!(
                    "rule maps dim {} -> {}, expected {d_in} -> {d_out}",
                    rule.input.dim(),
                    rule.output.dim()
                )));
            }
            match merged
                .iter()
                .find(|r| r.input.approx_eq(&rule.input, GRAM_TOL))
            {
                Some(existing) if existing.output.approx_eq(&rule.output, GRAM_TOL) => {}
                Some(_) => {
                    return Err(Error::ConflictingRules(
                        "one input vector is sent to two different outputs".into(),
                    ))
                }
                None => merged.push(rule),
            }
        }
        let deviation = gram_deviation(&merged);
        if deviation > GRAM_TOL {
            return Err(Error::IsometryViolation { deviation });
        }
        Ok(Self {
            kind,
            rules: merged,
            anc_in_dim,
            anc_out_dim,
        })
    }

    pub fn kind(&self) -> DeleterKind {
        self.kind
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn anc_in_dim(&self) -> usize {
        self.anc_in_dim
    }

    pub fn anc_out_dim(&self) -> usize {
        self.anc_out_dim
    }
}

fn gram_deviation(rules: &[RewriteRule]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in rules {
        for s in rules {
            let g_in = r.input.inner(&s.input);
            let g_out = r.output.inner(&s.output);
            worst = worst.max((g_in - g_out).norm());
        }
    }
    worst
}

/// `Some(<u|v>)` when `v` is a phase multiple of `u`.
fn parallel(u: &Ket, v: &Ket) -> Option<Complex64> {
    let overlap = u.inner(v);
    ((overlap.norm() - 1.0).abs() < GRAM_TOL).then_some(overlap)
}

/// Fresh output ancillas `A0..A3` of the imperfect-copy deleter, in the
/// enlarged space of dimension `x + 4`. They are orthonormal and orthogonal
/// to every cloner ancilla, except that an input pair which coincides up to a
/// phase shares one output direction.
fn deletion_outputs(spec: &ClonerSpec) -> [Ket; 4] {
    let x = spec.ancilla_dim();
    let dim = x + 4;
    let k = spec.ancillas();
    let a0 = Ket::basis(dim, x);
    let a1 = match parallel(&k.a, &k.c_t) {
        Some(lambda) => a0.scaled(lambda),
        None => Ket::basis(dim, x + 1),
    };
    let a2 = Ket::basis(dim, x + 2);
    let a3 = match parallel(&k.a_t, &k.c) {
        Some(lambda) => a2.scaled(lambda),
        None => Ket::basis(dim, x + 3),
    };
    [a0, a1, a2, a3]
}

/// Deleter for the output of `spec`: resets the second clone in the `|00>`
/// and `|11>` sectors and leaves the `|01>`, `|10>` sectors untouched.
pub fn imperfect_copy_deleter(spec: &ClonerSpec) -> Result<DeleterSpec> {
    let x = spec.ancilla_dim();
    let dim = x + 4;
    let k = spec.ancillas();
    let [a0, a1, a2, a3] = deletion_outputs(spec);
    let e = |ket: &Ket| ket.embed(dim);
    let rules = vec![
        RewriteRule::product(0b00, &k.a, 0b00, &a0),
        RewriteRule::product(0b00, &k.c_t, 0b00, &a1),
        RewriteRule::product(0b11, &k.a_t, 0b10, &a2),
        RewriteRule::product(0b11, &k.c, 0b10, &a3),
        RewriteRule::product(0b01, &k.b1, 0b01, &e(&k.b1)),
        RewriteRule::product(0b10, &k.b2, 0b10, &e(&k.b2)),
        RewriteRule::product(0b01, &k.b2_t, 0b01, &e(&k.b2_t)),
        RewriteRule::product(0b10, &k.b1_t, 0b10, &e(&k.b1_t)),
    ];
    DeleterSpec::new(DeleterKind::ImperfectCopy, rules, x, dim)
}

/// Coefficients of the cloned-then-deleted state. The table has no support
/// on `|11>`.
pub fn deleted_after_clone_r_table(
    spec: &ClonerSpec,
    beta: f64,
    phase: f64,
) -> Result<CoefficientTable> {
    // Fails with IsometryViolation when the deleter is undefined for `spec`.
    imperfect_copy_deleter(spec)?;
    let (alpha, beta) = qubit_amplitudes(beta, phase)?;
    let dim = spec.ancilla_dim() + 4;
    let [a0, a1, a2, a3] = deletion_outputs(spec);
    let k = spec.ancillas();
    let emb: Vec<Ket> = [&k.b1, &k.b2_t, &k.b2, &k.b1_t]
        .iter()
        .map(|v| v.embed(dim))
        .collect();
    let zero = spec.image_of_zero();
    let one = spec.image_of_one();
    let t = |c: Complex64, ancilla: &Ket| -> (Complex64, Ket) { (c, ancilla.clone()) };
    let owned: [Vec<(Complex64, Ket)>; 4] = [
        vec![
            t(alpha * zero[0].coefficient, &a0),
            t(beta * one[0].coefficient, &a1),
        ],
        vec![
            t(alpha * zero[1].coefficient, &emb[0]),
            t(beta * one[1].coefficient, &emb[1]),
        ],
        vec![
            t(alpha * zero[2].coefficient, &emb[2]),
            t(beta * one[2].coefficient, &emb[3]),
            t(alpha * zero[3].coefficient, &a3),
            t(beta * one[3].coefficient, &a2),
        ],
        vec![],
    ];
    let sectors: [Vec<Term<'_>>; 4] = std::array::from_fn(|s| {
        owned[s]
            .iter()
            .map(|(coefficient, ancilla)| Term {
                coefficient: *coefficient,
                ancilla,
            })
            .collect()
    });
    Ok(table_from_sectors(TableKind::R, &sectors))
}

/// Deleter acting on two exact copies with initial ancilla `|A>`:
/// `|00>|A> -> |00>|Q0>`, `|11>|A> -> |10>|Q1>` and
/// `(|01> + |10>)|A>` unchanged. Ancilla space `{A, Q0, Q1}`.
pub fn two_copy_deleter() -> DeleterSpec {
    let a_in = Ket::basis(1, 0);
    let a = Ket::basis(3, 0);
    let q0 = Ket::basis(3, 1);
    let q1 = Ket::basis(3, 2);
    let sym = |dim_anc: usize, anc: &Ket| {
        let one = real(1.0);
        let zero = real(0.0);
        Ket::unnormalized(vec![zero, one, one, zero]).tensor(&anc.embed(dim_anc))
    };
    let rules = vec![
        RewriteRule::product(0b00, &a_in, 0b00, &q0),
        RewriteRule::product(0b11, &a_in, 0b10, &q1),
        RewriteRule {
            input: sym(1, &a_in),
            output: sym(3, &a),
        },
    ];
    DeleterSpec::new(DeleterKind::TwoCopy, rules, 1, 3).expect("two-copy deleter is isometric")
}

/// `alpha^4 |00><00| + beta^4 |10><10| + 2 alpha^2 beta^2 |psi+><psi+|`.
pub fn two_copy_deleted_state(beta: f64, phase: f64) -> Result<DensityMatrix> {
    let (alpha, beta) = qubit_amplitudes(beta, phase)?;
    let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = real(a2 * a2);
    m[(2, 2)] = real(b2 * b2);
    // 2 a2 b2 |psi+><psi+| has a2 b2 on the 01/10 block.
    for i in [1, 2] {
        for j in [1, 2] {
            m[(i, j)] += real(a2 * b2);
        }
    }
    DensityMatrix::new(m)
}

/// Probability that the deleted (second) slot is found in the blank `|0>`.
pub fn deletion_fidelity(rho_del: &DensityMatrix) -> Result<f64> {
    Ok(rho_del.partial_trace(&[1], &[2, 2])?.entry(0, 0).re)
}

/// `1 - |alpha beta|^2`.
pub fn deletion_fidelity_closed_form(beta: f64) -> f64 {
    1.0 - beta * beta * (1.0 - beta * beta)
}

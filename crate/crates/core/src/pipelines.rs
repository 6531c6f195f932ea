//! The two composite processes: cloning followed by deletion, and two-copy
//! deletion followed by re-cloning.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::coherence::CoherenceReport;
use crate::error::{Error, Result};
use crate::machines::{
    cloned_state, deleted_after_clone_r_table, reclone_m_table, reclone_n_table,
    two_copy_deleted_state, Machine,
};
use crate::qstate::{DensityMatrix, Ket};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pipeline {
    CloneThenDelete,
    DeleteThenClone,
}

impl Pipeline {
    pub fn label(self) -> &'static str {
        match self {
            Pipeline::CloneThenDelete => "c2d",
            Pipeline::DeleteThenClone => "d2c",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c2d" => Ok(Pipeline::CloneThenDelete),
            "d2c" => Ok(Pipeline::DeleteThenClone),
            other => Err(Error::InvalidParameter(format!(
                "unknown pipeline '{other}'"
            ))),
        }
    }
}

/// Which copy left by two-copy deletion is re-cloned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Branch {
    /// the first copy, giving the pair aa'
    #[default]
    A,
    /// the second copy, giving the pair bb'
    B,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::A => "a",
            Branch::B => "b",
        }
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Branch::A),
            "b" => Ok(Branch::B),
            other => Err(Error::InvalidParameter(format!("unknown branch '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// One of "input", "cloned", "deleted", "recloned".
    pub label: &'static str,
    pub coherence: CoherenceReport,
    pub state: DensityMatrix,
}

impl Stage {
    fn new(label: &'static str, state: DensityMatrix) -> Result<Self> {
        Ok(Self {
            label,
            coherence: CoherenceReport::of(&state)?,
            state,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub pipeline: Pipeline,
    pub machine: String,
    pub beta: f64,
    /// Set for delete-then-clone runs.
    pub branch: Option<Branch>,
    pub stages: Vec<Stage>,
    /// Final minus initial global coherence.
    pub delta_c: f64,
    /// Final minus initial residual coherence.
    pub delta_residual: f64,
    pub fidelity: f64,
    /// Closed-form fidelity, available for the named machines.
    pub fidelity_closed_form: Option<f64>,
}

impl PipelineReport {
    fn assemble(
        pipeline: Pipeline,
        machine: &Machine,
        beta: f64,
        branch: Option<Branch>,
        stages: Vec<Stage>,
        target: &DensityMatrix,
    ) -> Self {
        let first = stages.first().expect("pipelines have stages").coherence;
        let last_stage = stages.last().expect("pipelines have stages");
        let last = last_stage.coherence;
        let fidelity = target.overlap(&last_stage.state);
        Self {
            pipeline,
            machine: machine.label().into(),
            beta,
            branch,
            delta_c: last.global - first.global,
            delta_residual: last.residual - first.residual,
            fidelity,
            fidelity_closed_form: closed_form_fidelity(
                pipeline,
                machine,
                beta,
                branch.unwrap_or_default(),
            ),
            stages,
        }
    }

    pub fn stage(&self, label: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.label == label)
    }

    pub fn initial(&self) -> &Stage {
        &self.stages[0]
    }

    pub fn final_stage(&self) -> &Stage {
        self.stages.last().expect("pipelines have stages")
    }
}

/// Clones `|psi>` onto a blank `|0>` and deletes the second clone. Fidelity
/// is measured against `|psi><psi| ⊗ |0><0|`.
pub fn run_clone_then_delete(machine: &Machine, beta: f64) -> Result<PipelineReport> {
    let spec = machine.spec();
    let input = Ket::qubit(beta, 0.0)?
        .tensor(&Ket::basis(2, 0))
        .projector()?;
    let cloned = cloned_state(&spec, beta, 0.0)?;
    let deleted = deleted_after_clone_r_table(&spec, beta, 0.0)?.to_density_matrix()?;
    let stages = vec![
        Stage::new("input", input.clone())?,
        Stage::new("cloned", cloned)?,
        Stage::new("deleted", deleted)?,
    ];
    Ok(PipelineReport::assemble(
        Pipeline::CloneThenDelete,
        machine,
        beta,
        None,
        stages,
        &input,
    ))
}

/// Deletes one of two exact copies and re-clones the chosen branch. Fidelity
/// is measured against the ideal pair `|psi psi>`.
pub fn run_delete_then_clone(
    machine: &Machine,
    beta: f64,
    branch: Branch,
) -> Result<PipelineReport> {
    let spec = machine.spec();
    let psi = Ket::qubit(beta, 0.0)?;
    let input = psi.tensor(&psi).projector()?;
    let deleted = two_copy_deleted_state(beta, 0.0)?;
    let recloned = match branch {
        Branch::A => reclone_m_table(&spec, beta)?,
        Branch::B => reclone_n_table(&spec, beta)?,
    }
    .to_density_matrix()?;
    let stages = vec![
        Stage::new("input", input.clone())?,
        Stage::new("deleted", deleted)?,
        Stage::new("recloned", recloned)?,
    ];
    Ok(PipelineReport::assemble(
        Pipeline::DeleteThenClone,
        machine,
        beta,
        Some(branch),
        stages,
        &input,
    ))
}

pub fn run(
    pipeline: Pipeline,
    machine: &Machine,
    beta: f64,
    branch: Branch,
) -> Result<PipelineReport> {
    match pipeline {
        Pipeline::CloneThenDelete => run_clone_then_delete(machine, beta),
        Pipeline::DeleteThenClone => run_delete_then_clone(machine, beta, branch),
    }
}

/// Closed-form process fidelity as a function of `x = |alpha beta|^2`.
/// Defined for the two named machines and, after deletion, the first-copy
/// branch only.
pub fn closed_form_fidelity(
    pipeline: Pipeline,
    machine: &Machine,
    beta: f64,
    branch: Branch,
) -> Option<f64> {
    let b2 = beta * beta;
    let x = b2 * (1.0 - b2);
    match (pipeline, machine, branch) {
        (Pipeline::CloneThenDelete, Machine::Ouqc, _) => {
            Some(2.0 / 3.0 * (1.0 - 2.0 * x) + b2 / 6.0)
        }
        (Pipeline::CloneThenDelete, Machine::Pc, _) => {
            Some((4.0 + 3.0 * SQRT_2 - 16.0 * x) / (8.0 * SQRT_2))
        }
        (Pipeline::DeleteThenClone, Machine::Ouqc, Branch::A) => Some(2.0 / 3.0 * (1.0 - 2.0 * x)),
        (Pipeline::DeleteThenClone, Machine::Pc, Branch::A) => {
            Some((3.0 * SQRT_2 + 4.0 - (16.0 - 2.0 * SQRT_2) * x) / (8.0 * SQRT_2))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn grid() -> Vec<f64> {
        (0..=100).map(|k| k as f64 / 100.0).collect()
    }

    #[test]
    fn clone_then_delete_ouqc_examples() {
        let r = run_clone_then_delete(&Machine::Ouqc, FRAC_1_SQRT_2).unwrap();
        assert_abs_diff_eq!(r.delta_c, -2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta_residual, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.fidelity, 5.0 / 12.0, epsilon = 1e-12);
        let labels: Vec<_> = r.stages.iter().map(|s| s.label).collect();
        assert_eq!(labels, ["input", "cloned", "deleted"]);

        let r = run_clone_then_delete(&Machine::Ouqc, 0.0).unwrap();
        assert_abs_diff_eq!(r.delta_c, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta_residual, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.fidelity, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn delete_then_clone_ouqc_examples() {
        let r = run_delete_then_clone(&Machine::Ouqc, FRAC_1_SQRT_2, Branch::A).unwrap();
        assert_abs_diff_eq!(r.delta_c, 1.0 / 3.0 - 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta_residual, 1.0 / 3.0 - 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.fidelity, 1.0 / 3.0, epsilon = 1e-12);

        for (m, target) in [(Machine::Ouqc, 1.0 / 3.0), (Machine::Pc, 0.5)] {
            let r = run_delete_then_clone(&m, 0.0, Branch::A).unwrap();
            assert_abs_diff_eq!(r.delta_c, target, epsilon = 1e-12);
        }
        let r = run_delete_then_clone(&Machine::Ouqc, 0.0, Branch::A).unwrap();
        assert_abs_diff_eq!(r.fidelity, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pc_delete_then_clone_fidelity() {
        let r = run_delete_then_clone(&Machine::Pc, FRAC_1_SQRT_2, Branch::A).unwrap();
        assert_abs_diff_eq!(r.fidelity_closed_form.unwrap(), 0.4375, epsilon = 1e-12);
    }

    #[test]
    fn report_deltas_match_stages() {
        for m in [Machine::Ouqc, Machine::Pc] {
            for p in [Pipeline::CloneThenDelete, Pipeline::DeleteThenClone] {
                for beta in [0.0, 0.37, 0.8] {
                    let r = run(p, &m, beta, Branch::A).unwrap();
                    let (i, f) = (r.initial().coherence, r.final_stage().coherence);
                    assert!((r.delta_c - (f.global - i.global)).abs() < 1e-12);
                    assert!((r.delta_residual - (f.residual - i.residual)).abs() < 1e-12);
                    assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
                }
            }
        }
    }

    #[test]
    fn cloning_is_cohering_and_deletion_decohering() {
        for m in [Machine::Ouqc, Machine::Pc] {
            for beta in grid() {
                let r = run_clone_then_delete(&m, beta).unwrap();
                let [input, cloned, deleted] = [0, 1, 2].map(|i| r.stages[i].coherence);
                if beta > 0.0 && beta < 1.0 {
                    assert!(cloned.global > input.global);
                    assert!(cloned.local_b > input.local_b);
                    assert!(cloned.local_a < input.local_a);
                }
                assert!(deleted.global <= cloned.global + 1e-10);
                assert!(deleted.local_a <= cloned.local_a + 1e-10);
                assert!(deleted.local_b <= cloned.local_b + 1e-10);
            }
        }
    }

    #[test]
    fn residual_after_cloning_is_frozen() {
        for (m, level) in [(Machine::Ouqc, 1.0 / 3.0), (Machine::Pc, 0.5)] {
            for beta in grid() {
                let r = run_clone_then_delete(&m, beta).unwrap();
                assert_abs_diff_eq!(
                    r.stage("cloned").unwrap().coherence.residual,
                    level,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn branches_have_equal_global_coherence() {
        for m in [Machine::Ouqc, Machine::Pc] {
            for beta in grid() {
                let a = run_delete_then_clone(&m, beta, Branch::A).unwrap();
                let b = run_delete_then_clone(&m, beta, Branch::B).unwrap();
                assert_abs_diff_eq!(
                    a.final_stage().coherence.global,
                    b.final_stage().coherence.global,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn ouqc_fidelities_match_closed_forms() {
        for p in [Pipeline::CloneThenDelete, Pipeline::DeleteThenClone] {
            for beta in grid() {
                let r = run(p, &Machine::Ouqc, beta, Branch::A).unwrap();
                assert_abs_diff_eq!(r.fidelity, r.fidelity_closed_form.unwrap(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(
            "c2d".parse::<Pipeline>().unwrap(),
            Pipeline::CloneThenDelete
        );
        assert_eq!(
            "d2c".parse::<Pipeline>().unwrap(),
            Pipeline::DeleteThenClone
        );
        assert!("x".parse::<Pipeline>().is_err());
        assert_eq!("b".parse::<Branch>().unwrap(), Branch::B);
    }
}

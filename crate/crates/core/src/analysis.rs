//! Parameter sweeps over `beta`, coherence-consumption thresholds, fidelity
//! extrema and CSV output.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machines::Machine;
use crate::pipelines::{closed_form_fidelity, run, Branch, Pipeline, PipelineReport};

/// Points in the coarse scan that brackets the roots of the coherence change.
pub const BRACKET_POINTS: usize = 10_000;
/// Grid used to seed the fidelity extremum search.
const EXTREMA_GRID: usize = 2_001;
/// Width in `beta` at which golden-section refinement stops.
const EXTREMA_TOL: f64 = 1e-10;

/// Column order of the CSV output.
pub const CSV_HEADER: [&str; 11] = [
    "beta",
    "alpha_beta",
    "c_global_in",
    "c_local_a_in",
    "c_local_b_in",
    "c_global_mid",
    "c_global_out",
    "residual_out",
    "delta_c",
    "delta_residual",
    "fidelity",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    /// `|alpha beta|`
    pub alpha_beta: f64,
    pub c_global_in: f64,
    pub c_local_a_in: f64,
    pub c_local_b_in: f64,
    pub c_global_mid: f64,
    pub c_global_out: f64,
    pub residual_out: f64,
    pub delta_c: f64,
    pub delta_residual: f64,
    pub fidelity: f64,
}

impl SweepRow {
    pub fn from_report(report: &PipelineReport) -> Self {
        let input = report.initial().coherence;
        let mid = report.stages[1].coherence;
        let out = report.final_stage().coherence;
        let beta = report.beta;
        Self {
            beta,
            alpha_beta: beta * (1.0 - beta * beta).max(0.0).sqrt(),
            c_global_in: input.global,
            c_local_a_in: input.local_a,
            c_local_b_in: input.local_b,
            c_global_mid: mid.global,
            c_global_out: out.global,
            residual_out: out.residual,
            delta_c: report.delta_c,
            delta_residual: report.delta_residual,
            fidelity: report.fidelity,
        }
    }
}

fn check_grid(n_points: usize) -> Result<()> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("grid must be ≥ 2".into()));
    }
    Ok(())
}

/// Rows at `beta = k / (n_points - 1)` for `k = 0..n_points`.
pub fn sweep(pipeline: Pipeline, machine: &Machine, n_points: usize) -> Result<Vec<SweepRow>> {
    sweep_branch(pipeline, machine, n_points, Branch::A)
}

pub fn sweep_branch(
    pipeline: Pipeline,
    machine: &Machine,
    n_points: usize,
    branch: Branch,
) -> Result<Vec<SweepRow>> {
    check_grid(n_points)?;
    (0..n_points)
        .map(|k| {
            let beta = k as f64 / (n_points - 1) as f64;
            Ok(SweepRow::from_report(&run(
                pipeline, machine, beta, branch,
            )?))
        })
        .collect()
}

/// Change in global coherence over one run of the process.
pub fn delta_c(pipeline: Pipeline, machine: &Machine, beta: f64) -> Result<f64> {
    Ok(run(pipeline, machine, beta, Branch::A)?.delta_c)
}

/// Root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite sign.
/// Stops when `|f| < tol` or the bracket cannot shrink further.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.abs() < tol {
        return Ok(lo);
    }
    if f_hi.abs() < tol {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot);
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid.abs() < tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
}

/// The interval of `beta` on which the process consumes coherence
/// (`delta_c < 0`), delimited by the first and last sign changes.
pub fn consumption_interval(pipeline: Pipeline, machine: &Machine, tol: f64) -> Result<(f64, f64)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let f = |beta: f64| delta_c(pipeline, machine, beta);
    let n = BRACKET_POINTS;
    let betas: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let values = betas.iter().map(|&b| f(b)).collect::<Result<Vec<_>>>()?;
    let falling = (0..n).find(|&k| values[k] >= 0.0 && values[k + 1] < 0.0);
    let rising = (0..n)
        .rev()
        .find(|&k| values[k] < 0.0 && values[k + 1] >= 0.0);
    let (Some(i), Some(j)) = (falling, rising) else {
        return Err(Error::NoRoot);
    };
    let lo = bisect(f, betas[i], betas[i + 1], tol)?;
    let hi = bisect(f, betas[j], betas[j + 1], tol)?;
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityExtrema {
    pub f_min: f64,
    pub beta_argmin: f64,
    pub f_max: f64,
    pub beta_argmax: f64,
}

/// Minimizes `g` on `[a, b]` by golden-section search.
fn golden_min<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Refines the grid minimum of `g` and also compares against the grid
/// endpoints so boundary extrema are kept exactly.
fn refine_min<F: Fn(f64) -> f64>(g: F, grid: &[f64]) -> (f64, f64) {
    let values: Vec<f64> = grid.iter().map(|&b| g(b)).collect();
    let k = (0..grid.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("grid is non-empty");
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let refined = golden_min(&g, lo, hi, EXTREMA_TOL);
    let (b, v) = if g(refined) < values[k] {
        (refined, g(refined))
    } else {
        (grid[k], values[k])
    };
    (b, v)
}

/// Extrema of the process fidelity over `beta` in `[0, 1]`. The closed form
/// is used where one exists, the simulated overlap otherwise.
pub fn fidelity_extrema(pipeline: Pipeline, machine: &Machine) -> Result<FidelityExtrema> {
    let fidelity = |beta: f64| -> f64 {
        closed_form_fidelity(pipeline, machine, beta, Branch::A).unwrap_or_else(|| {
            run(pipeline, machine, beta, Branch::A).map_or(f64::NAN, |r| r.fidelity)
        })
    };
    // Surface evaluation errors before searching.
    run(pipeline, machine, 0.5, Branch::A)?;
    let grid: Vec<f64> = (0..EXTREMA_GRID)
        .map(|k| k as f64 / (EXTREMA_GRID - 1) as f64)
        .collect();
    let (beta_argmin, f_min) = refine_min(fidelity, &grid);
    let (beta_argmax, neg_max) = refine_min(|b| -fidelity(b), &grid);
    Ok(FidelityExtrema {
        f_min,
        beta_argmin,
        f_max: -neg_max,
        beta_argmax,
    })
}

/// Writes the header and one line per row; returns the row count.
pub fn emit_csv<W: Write>(rows: &[SweepRow], sink: W) -> Result<usize> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows.len())
}

pub fn read_csv<R: Read>(source: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(source);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidParameter(format!(
            "unexpected CSV header {headers:?}"
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    #[test]
    fn sweep_grid_points() {
        let rows = sweep(Pipeline::CloneThenDelete, &Machine::Ouqc, 3).unwrap();
        let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
        assert_eq!(betas, [0.0, 0.5, 1.0]);
        assert_abs_diff_eq!(rows[0].delta_c, 1.0 / 3.0, epsilon = 1e-12);

        let rows = sweep(Pipeline::DeleteThenClone, &Machine::Pc, 2).unwrap();
        assert_abs_diff_eq!(rows[1].delta_c, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            rows[1].fidelity,
            (3.0 * SQRT_2 + 4.0) / (8.0 * SQRT_2),
            epsilon = 1e-12
        );

        assert!(matches!(
            sweep(Pipeline::DeleteThenClone, &Machine::Ouqc, 1),
            Err(Error::InvalidParameter(m)) if m == "grid must be ≥ 2"
        ));
    }

    #[test]
    fn alpha_beta_column_is_symmetric() {
        let rows = sweep(Pipeline::CloneThenDelete, &Machine::Pc, 41).unwrap();
        for r in &rows {
            let mirror = (1.0 - r.beta * r.beta).sqrt();
            let expected = mirror * (1.0 - mirror * mirror).sqrt();
            assert_abs_diff_eq!(r.alpha_beta, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn rows_match_fresh_reports() {
        let rows = sweep(Pipeline::DeleteThenClone, &Machine::Ouqc, 5).unwrap();
        for row in rows {
            let fresh = SweepRow::from_report(
                &run(
                    Pipeline::DeleteThenClone,
                    &Machine::Ouqc,
                    row.beta,
                    Branch::A,
                )
                .unwrap(),
            );
            assert_eq!(row, fresh);
        }
    }

    #[test]
    fn bisection_finds_simple_roots() {
        let root = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert_abs_diff_eq!(root, SQRT_2, epsilon = 1e-13);
        assert!(matches!(
            bisect(|x| Ok(x + 1.0), 0.0, 1.0, 1e-9),
            Err(Error::NoRoot)
        ));
    }

    #[test]
    fn consumption_interval_endpoints() {
        let tol = 1e-10;
        let (lo, hi) =
            consumption_interval(Pipeline::CloneThenDelete, &Machine::Ouqc, tol).unwrap();
        assert_abs_diff_eq!(lo, 0.169102, epsilon = 5e-4);
        assert_abs_diff_eq!(hi, 0.985598, epsilon = 5e-4);
        for b in [lo, hi] {
            assert!(
                delta_c(Pipeline::CloneThenDelete, &Machine::Ouqc, b)
                    .unwrap()
                    .abs()
                    < tol
            );
        }
        assert!(delta_c(Pipeline::CloneThenDelete, &Machine::Ouqc, lo - 1e-4).unwrap() > 0.0);
        assert!(delta_c(Pipeline::CloneThenDelete, &Machine::Ouqc, lo + 1e-4).unwrap() < 0.0);
        assert!(delta_c(Pipeline::CloneThenDelete, &Machine::Ouqc, 0.5).unwrap() < 0.0);
        assert!(consumption_interval(Pipeline::CloneThenDelete, &Machine::Ouqc, 0.0).is_err());
    }

    #[test]
    fn extrema_of_ouqc_clone_then_delete() {
        let e = fidelity_extrema(Pipeline::CloneThenDelete, &Machine::Ouqc).unwrap();
        assert_abs_diff_eq!(e.f_min, 79.0 / 192.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.beta_argmin, (7.0f64 / 16.0).sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(e.f_max, 5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.beta_argmax, 1.0, epsilon = 1e-12);

        let e = fidelity_extrema(Pipeline::DeleteThenClone, &Machine::Ouqc).unwrap();
        assert_abs_diff_eq!(e.f_min, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.beta_argmin, FRAC_1_SQRT_2, epsilon = 1e-6);
        assert_abs_diff_eq!(e.f_max, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn csv_emission() {
        let mut buf = Vec::new();
        assert_eq!(emit_csv(&[], &mut buf).unwrap(), 0);
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");

        let rows = sweep(Pipeline::CloneThenDelete, &Machine::Pc, 3).unwrap();
        let mut buf = Vec::new();
        assert_eq!(emit_csv(&rows, &mut buf).unwrap(), 3);
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.ends_with('\n'));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }
}

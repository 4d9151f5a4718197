//! End-to-end linearization: from a block operator matrix function with
//! product and Schur complement entries to a monic linear pencil, composing
//! the per-stage equivalence certificates.

use crate::blockfun::{BlockOperatorFunction, Entry};
use crate::blocklin::{block_companion, BlockCompanionResult, BlockPolySpec};
use crate::equivalence::{compose_certificates, EquivalenceCertificate};
use crate::error::{Error, Result};
use crate::reduction::{column_reduce_general, PolyGrid, ReductionTrace};
use crate::schur_product::unfold_entry_at;

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Distinguished index per column of the polynomial grid that reaches
    /// the companion stage (after unfolding and reduction). Defaults to all
    /// zeros.
    pub l: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct StageInfo {
    pub name: String,
    pub grid_size: usize,
    pub total_dim: usize,
}

#[derive(Debug)]
pub struct PipelineOutcome {
    /// Composed certificate from the original function to the monic pencil.
    pub certificate: EquivalenceCertificate,
    pub result: BlockCompanionResult,
    /// First all-polynomial stage (products and Schur complements cleared);
    /// the natural anchor for the determinant-root oracle.
    pub polynomial_stage: BlockOperatorFunction,
    pub reduction_trace: Option<ReductionTrace>,
    pub stages: Vec<StageInfo>,
}

fn with_stage<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: stage.into(),
        source: Box::new(e),
    })
}

fn find_entry(
    bof: &BlockOperatorFunction,
    pred: impl Fn(&Entry) -> bool,
) -> Option<(usize, usize)> {
    let n = bof.grid_size();
    for j in 0..n {
        for i in 0..n {
            if pred(bof.entry(j, i)) {
                return Some((j, i));
            }
        }
    }
    None
}

/// Linearize a block operator matrix function step by step: unfold products,
/// unfold Schur complements, column-reduce until the diagonal dominates,
/// then take the block companion form.
pub fn linearize(
    bof: &BlockOperatorFunction,
    opts: &PipelineOptions,
) -> Result<PipelineOutcome> {
    let mut stages = Vec::new();
    let mut current = bof.clone();
    let mut cert: Option<EquivalenceCertificate> = None;
    let push_stage = |stages: &mut Vec<StageInfo>, name: &str, g: &BlockOperatorFunction| {
        stages.push(StageInfo {
            name: name.into(),
            grid_size: g.grid_size(),
            total_dim: g.total_rows(),
        });
    };
    push_stage(&mut stages, "input", &current);

    // products first, then Schur complements, as in the worked example
    while let Some((j, i)) = find_entry(&current, |e| matches!(e, Entry::Product(_))) {
        let step = with_stage("product unfolding", unfold_entry_at(&current, j, i))?;
        current = step.rhs.clone();
        cert = Some(match cert {
            None => step,
            Some(prev) => with_stage("composition", compose_certificates(&prev, &step))?,
        });
        push_stage(&mut stages, "product unfolding", &current);
    }
    while let Some((j, i)) =
        find_entry(&current, |e| matches!(e, Entry::SchurComplement { .. }))
    {
        let step = with_stage("Schur unfolding", unfold_entry_at(&current, j, i))?;
        current = step.rhs.clone();
        cert = Some(match cert {
            None => step,
            Some(prev) => with_stage("composition", compose_certificates(&prev, &step))?,
        });
        push_stage(&mut stages, "Schur unfolding", &current);
    }
    let polynomial_stage = current.clone();

    // column reduction when the diagonal does not strictly dominate
    let mut grid = with_stage("column reduction", PolyGrid::from_block_function(&current))?;
    let l = opts.l.clone().unwrap_or_else(|| vec![0; grid.size()]);
    let mut reduction_trace = None;
    if BlockPolySpec::new(grid.clone(), l.clone()).is_err() {
        let (reduced, trace) = with_stage("column reduction", column_reduce_general(&grid))?;
        let red_cert = with_stage("column reduction", trace.to_certificate(&grid))?;
        current = red_cert.rhs.clone();
        cert = Some(match cert {
            None => red_cert,
            Some(prev) => with_stage("composition", compose_certificates(&prev, &red_cert))?,
        });
        push_stage(&mut stages, "column reduction", &current);
        reduction_trace = Some(trace);
        grid = reduced;
    }

    let spec = with_stage("block companion", BlockPolySpec::new(grid, l))?;
    let (result, comp_cert) = with_stage("block companion", block_companion(&spec))?;
    let certificate = match cert {
        None => comp_cert,
        Some(prev) => with_stage("composition", compose_certificates(&prev, &comp_cert))?,
    };
    push_stage(&mut stages, "block companion", &certificate.rhs);
    Ok(PipelineOutcome {
        certificate,
        result,
        polynomial_stage,
        reduction_trace,
        stages,
    })
}

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::SignalRecord;
use crate::grid::{Grid3D, Image2D, Volume3D};
use crate::model::ScanGeometry;
use crate::scalar::Real;
use crate::solvers::CgOptions;

use super::fbp::{stage3_fbp, ProjectionStack, WindowKind};
use super::stage1::{first_component_ratio, stage1_bin, stage1_solve, stage1_trace, transform_record, TraceFill};
use super::stage2::Deconvolver;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>", serialize = "T: Serialize"))]
pub struct ReconConfig<T> {
    /// Tikhonov weight shared by all angles.
    pub lambda: T,
    /// Optional per-angle weights overriding `lambda`.
    pub lambda_per_angle: Option<Vec<T>>,
    pub cg_tol: T,
    pub cg_max_iter: usize,
    pub window: WindowKind,
    /// Window cutoff in cycles/sample.
    pub cutoff: T,
    /// Zero the volume outside the disc covered by every angle.
    pub circle_mask: bool,
    /// Boolean threshold as a fraction of the maximum.
    pub threshold: T,
    pub trace_fill: TraceFill,
    /// Report `‖s̃₁‖/‖s̃‖` per angle.
    pub first_component_diagnostic: bool,
    /// Kernel truncation radius for the deconvolution operator.
    pub kernel_truncation: Option<T>,
}

impl<T: Real> Default for ReconConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(5e-4),
            lambda_per_angle: None,
            cg_tol: T::lit(1e-10),
            cg_max_iter: 1000,
            window: WindowKind::Rect,
            cutoff: T::lit(0.5),
            circle_mask: true,
            threshold: T::lit(0.05),
            trace_fill: TraceFill::Zero,
            first_component_diagnostic: false,
            kernel_truncation: None,
        }
    }
}

impl<T: Real> ReconConfig<T> {
    pub fn validate(&self, n_angles: usize) -> Result<()> {
        if !(self.lambda > T::zero()) {
            return Err(Error::validation("lambda must be positive"));
        }
        if let Some(per) = &self.lambda_per_angle {
            if per.len() != n_angles {
                return Err(Error::validation(format!(
                    "{} per-angle lambdas for {n_angles} angles",
                    per.len()
                )));
            }
            if per.iter().any(|l| !(*l > T::zero())) {
                return Err(Error::validation("per-angle lambdas must be positive"));
            }
        }
        if !(self.cg_tol > T::zero()) || self.cg_max_iter == 0 {
            return Err(Error::validation("CG tolerance and iteration cap must be positive"));
        }
        if !(self.cutoff > T::zero() && self.cutoff <= T::lit(0.5)) {
            return Err(Error::validation("window cutoff must lie in (0, 0.5]"));
        }
        if !(self.threshold >= T::zero() && self.threshold < T::one()) {
            return Err(Error::validation("threshold must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn lambda_for(&self, angle_index: usize) -> T {
        self.lambda_per_angle
            .as_ref()
            .and_then(|l| l.get(angle_index).copied())
            .unwrap_or(self.lambda)
    }

    pub fn cg_options(&self) -> CgOptions<T> {
        CgOptions {
            tol: self.cg_tol,
            max_iter: self.cg_max_iter,
        }
    }
}

/// Per-angle bookkeeping from stages 1 and 2.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleStats<T> {
    pub angle_index: usize,
    pub dropped: usize,
    pub flagged_cells: usize,
    pub first_component_ratio: Option<T>,
    pub cg_iterations: usize,
    pub cg_residual: T,
    pub cg_converged: bool,
}

/// Stage 1 for every record: trace images `u_l`.
pub fn run_stage1<T: Real>(
    records: &[SignalRecord<T>],
    geom: &ScanGeometry<T>,
    vol_grid: &Grid3D<T>,
    cfg: &ReconConfig<T>,
) -> Result<(ProjectionStack<T>, Vec<AngleStats<T>>)> {
    check_records(records, geom)?;
    let plane = vol_grid.projection_grid();
    let per_angle: Vec<(Image2D<T>, AngleStats<T>)> = records
        .par_iter()
        .map(|rec| {
            let samples = transform_record(rec, geom).map_err(|e| e.in_stage("stage 1").with_angle(rec.angle_index))?;
            let ratio = cfg.first_component_diagnostic.then(|| first_component_ratio(&samples));
            if let Some(r) = ratio {
                info!("angle {}: first-component ratio {r:e}", rec.angle_index);
            }
            let bins = stage1_bin(&samples, &plane);
            let cf = stage1_solve(&bins);
            let stats = AngleStats {
                angle_index: rec.angle_index,
                dropped: bins.dropped,
                flagged_cells: cf.flagged(),
                first_component_ratio: ratio,
                cg_iterations: 0,
                cg_residual: T::zero(),
                cg_converged: false,
            };
            Ok((stage1_trace(&cf, cfg.trace_fill), stats))
        })
        .collect::<Result<_>>()?;
    let (images, stats): (Vec<_>, Vec<_>) = per_angle.into_iter().unzip();
    Ok((
        ProjectionStack::new(records.iter().map(|r| r.theta).collect(), images)?,
        stats,
    ))
}

/// How CG finished for one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgSummary<T> {
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
}

/// Stage 2 for every trace image: deconvolved projections `χ_l`.
pub fn run_stage2<T: Real>(
    traces: &ProjectionStack<T>,
    angle_indices: &[usize],
    h: T,
    cfg: &ReconConfig<T>,
) -> Result<(ProjectionStack<T>, Vec<CgSummary<T>>)> {
    let grid = *traces
        .grid()
        .ok_or_else(|| Error::validation("no trace images to deconvolve"))?;
    let deconv = Deconvolver::new(grid, h, cfg.kernel_truncation)?;
    let opts = cfg.cg_options();
    let results: Vec<(Image2D<T>, CgSummary<T>)> = traces
        .images
        .par_iter()
        .zip(angle_indices.par_iter())
        .map(|(u, &l)| {
            let (chi, out) = deconv
                .deconvolve(u, cfg.lambda_for(l), &opts)
                .map_err(|e| e.in_stage("stage 2 (cg)").with_angle(l))?;
            if !out.converged {
                warn!(
                    "angle {l}: CG stopped after {} iterations at relative residual {:e}",
                    out.iterations, out.residual
                );
            }
            let summary = CgSummary {
                iterations: out.iterations,
                residual: out.residual,
                converged: out.converged,
            };
            Ok((chi, summary))
        })
        .collect::<Result<_>>()?;
    let (images, stats): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((ProjectionStack::new(traces.angles.clone(), images)?, stats))
}

/// Output of [`reconstruct`] with the intermediate stacks.
#[derive(Clone, Debug)]
pub struct Reconstruction<T> {
    pub volume: Volume3D<T>,
    pub traces: ProjectionStack<T>,
    pub projections: ProjectionStack<T>,
    pub stats: Vec<AngleStats<T>>,
}

/// The full three-stage reconstruction onto `vol_grid`.
pub fn reconstruct<T: Real>(
    records: &[SignalRecord<T>],
    geom: &ScanGeometry<T>,
    vol_grid: &Grid3D<T>,
    cfg: &ReconConfig<T>,
) -> Result<Reconstruction<T>> {
    geom.validate()?;
    cfg.validate(geom.angles.len())?;
    let (traces, mut stats) = run_stage1(records, geom, vol_grid, cfg)?;
    let indices: Vec<usize> = records.iter().map(|r| r.angle_index).collect();
    let (projections, cg) = run_stage2(&traces, &indices, geom.h, cfg)?;
    for (s, c) in stats.iter_mut().zip(cg) {
        s.cg_iterations = c.iterations;
        s.cg_residual = c.residual;
        s.cg_converged = c.converged;
    }
    let volume = stage3_fbp(&projections, vol_grid, cfg.window, cfg.cutoff, cfg.circle_mask)?;
    Ok(Reconstruction {
        volume,
        traces,
        projections,
        stats,
    })
}

fn check_records<T: Real>(records: &[SignalRecord<T>], geom: &ScanGeometry<T>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::validation("no signal records"));
    }
    for rec in records {
        match geom.angles.get(rec.angle_index) {
            Some(&a) if (a - rec.theta).abs() <= T::lit(1e-9) * (T::one() + a.abs()) => {}
            _ => {
                return Err(Error::validation(format!(
                    "record angle {} (index {}) does not match the geometry",
                    rec.theta, rec.angle_index
                )))
            }
        }
    }
    Ok(())
}

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::SignalRecord;
use crate::grid::{Grid2D, Image2D};
use crate::linalg::{Mat2, Vec2, Vec3};
use crate::model::{ffl_trajectory_with_period, ScanGeometry, SignalTransform};
use crate::scalar::Real;
use crate::solvers::lstsq_qr;

/// One sample in the rotated frame: trajectory point, velocity and `s̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneSample<T> {
    pub r: Vec2<T>,
    pub v: Vec2<T>,
    pub s: Vec3<T>,
}

/// Applies the signal transform and attaches the analytic trajectory at each sample time.
pub fn transform_record<T: Real>(rec: &SignalRecord<T>, geom: &ScanGeometry<T>) -> Result<Vec<PlaneSample<T>>> {
    let transform = SignalTransform::new(rec.theta, geom)?;
    let period = geom.period_for(rec.angle_index);
    Ok(rec
        .samples
        .iter()
        .map(|smp| {
            let traj = ffl_trajectory_with_period(smp.t, geom, period);
            PlaneSample {
                r: traj.r,
                v: traj.v,
                s: transform.apply(smp.s),
            }
        })
        .collect())
}

/// `‖s̃₁‖ / ‖s̃‖` over a record; zero for noise-free data from the model.
pub fn first_component_ratio<T: Real>(samples: &[PlaneSample<T>]) -> T {
    let first: T = samples.iter().map(|p| p.s.x * p.s.x).sum();
    let all: T = samples.iter().map(|p| p.s.dot(p.s)).sum();
    if all == T::zero() {
        T::zero()
    } else {
        (first / all).sqrt()
    }
}

/// Velocities and reduced signals `(s̃₂, s̃₃)` gathered per cell.
#[derive(Clone, Debug)]
pub struct CellBins<T> {
    pub grid: Grid2D<T>,
    pub velocities: Vec<Vec<Vec2<T>>>,
    pub signals: Vec<Vec<Vec2<T>>>,
    /// Samples whose `r` fell outside the grid.
    pub dropped: usize,
}

impl<T> CellBins<T> {
    pub fn count(&self, cell: usize) -> usize {
        self.velocities[cell].len()
    }

    pub fn binned(&self) -> usize {
        self.velocities.iter().map(Vec::len).sum()
    }
}

pub fn stage1_bin<T: Real>(samples: &[PlaneSample<T>], grid: &Grid2D<T>) -> CellBins<T> {
    let mut velocities = vec![Vec::new(); grid.len()];
    let mut signals = vec![Vec::new(); grid.len()];
    let mut dropped = 0;
    for p in samples {
        match (grid.u.cell_of(p.r.x), grid.v.cell_of(p.r.y)) {
            (Some(j), Some(k)) => {
                let c = grid.index(j, k);
                velocities[c].push(p.v);
                signals[c].push(Vec2::new(p.s.y, p.s.z));
            }
            _ => dropped += 1,
        }
    }
    CellBins {
        grid: *grid,
        velocities,
        signals,
        dropped,
    }
}

/// Discrete core operator: one 2×2 matrix per plane cell.
#[derive(Clone, Debug)]
pub struct CoreField<T> {
    pub grid: Grid2D<T>,
    pub a: Vec<Mat2<T>>,
    pub count: Vec<usize>,
    pub rank_ok: Vec<bool>,
}

impl<T: Real> CoreField<T> {
    pub fn scaled(&self, c: T) -> Self {
        Self {
            a: self.a.iter().map(|m| m.scale(c)).collect(),
            ..self.clone()
        }
    }

    pub fn flagged(&self) -> usize {
        self.rank_ok.iter().filter(|ok| !**ok).count()
    }
}

/// Per-cell least squares `S = A V`; cells with fewer than two samples or a
/// rank-deficient `V` are zeroed and flagged.
pub fn stage1_solve<T: Real>(bins: &CellBins<T>) -> CoreField<T> {
    let solved: Vec<(Mat2<T>, bool)> = bins
        .velocities
        .par_iter()
        .zip(bins.signals.par_iter())
        .map(|(v, s)| {
            if v.len() < 2 {
                return (Mat2::zero(), false);
            }
            match lstsq_qr(v, s) {
                Some(sol) if sol.rank == 2 => (sol.a, true),
                _ => (Mat2::zero(), false),
            }
        })
        .collect();
    CoreField {
        grid: bins.grid,
        a: solved.iter().map(|p| p.0).collect(),
        count: bins.velocities.iter().map(Vec::len).collect(),
        rank_ok: solved.iter().map(|p| p.1).collect(),
    }
}

/// Treatment of flagged cells when extracting the trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFill {
    #[default]
    Zero,
    /// Mean of the valid 4-neighbours, zero if there are none.
    NeighborAverage,
}

impl FromStr for TraceFill {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Self::Zero),
            "neighbor_average" => Ok(Self::NeighborAverage),
            other => Err(Error::Config(format!(
                "unknown trace fill '{other}' (expected zero or neighbor_average)"
            ))),
        }
    }
}

/// `u = trace A` per cell.
pub fn stage1_trace<T: Real>(cf: &CoreField<T>, fill: TraceFill) -> Image2D<T> {
    let mut img = Image2D::zeros(cf.grid);
    for (i, (m, ok)) in cf.a.iter().zip(&cf.rank_ok).enumerate() {
        if *ok {
            img.values[i] = m.trace();
        }
    }
    if fill == TraceFill::NeighborAverage {
        let [nu, nv] = cf.grid.dims();
        let src = img.values.clone();
        for k in 0..nv {
            for j in 0..nu {
                let c = k * nu + j;
                if cf.rank_ok[c] {
                    continue;
                }
                let mut acc = T::zero();
                let mut n = 0;
                let neigh = [
                    (j > 0).then(|| c - 1),
                    (j + 1 < nu).then(|| c + 1),
                    (k > 0).then(|| c - nu),
                    (k + 1 < nv).then(|| c + nu),
                ];
                for q in neigh.into_iter().flatten() {
                    if cf.rank_ok[q] {
                        acc += src[q];
                        n += 1;
                    }
                }
                if n > 0 {
                    img.values[c] = acc / T::from_usize_lossy(n);
                }
            }
        }
    }
    img
}

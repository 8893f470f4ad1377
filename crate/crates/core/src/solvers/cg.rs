use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{dot, LinearOperator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions<T> {
    /// Stop once `‖b - A x‖ / ‖b‖ ≤ tol`.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for CgOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Relative residual of the returned iterate.
    pub residual: T,
    pub converged: bool,
    /// Relative residual after each iteration (index 0 is the initial residual).
    pub history: Vec<T>,
}

/// Applies `M⁻¹` for preconditioned CG.
pub trait Preconditioner<T> {
    fn apply(&self, r: &[T], out: &mut [T]);
}

pub struct IdentityPreconditioner;

impl<T: Real> Preconditioner<T> for IdentityPreconditioner {
    fn apply(&self, r: &[T], out: &mut [T]) {
        out.copy_from_slice(r);
    }
}

/// Plain conjugate gradients from a zero initial guess.
pub fn cg_solve<T: Real, A: LinearOperator<T> + ?Sized>(op: &A, b: &[T], opts: &CgOptions<T>) -> Result<CgOutcome<T>> {
    pcg_solve(op, &IdentityPreconditioner, b, opts)
}

pub fn pcg_solve<T, A, M>(op: &A, precond: &M, b: &[T], opts: &CgOptions<T>) -> Result<CgOutcome<T>>
where
    T: Real,
    A: LinearOperator<T> + ?Sized,
    M: Preconditioner<T> + ?Sized,
{
    let n = op.len();
    if b.len() != n {
        return Err(Error::dimension(format!("rhs has {} entries, operator {}", b.len(), n)));
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::validation("CG tolerance must be > 0"));
    }
    let mut x = vec![T::zero(); n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == T::zero() {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual: T::zero(),
            converged: true,
            history: vec![T::zero()],
        });
    }
    let fail = |iteration: usize, reason: &str| Error::Solver {
        stage: "cg",
        angle: None,
        iteration,
        reason: reason.to_string(),
    };

    let mut r = b.to_vec();
    let mut z = vec![T::zero(); n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = dot(&r, &z);
    let mut rel = T::one();
    let mut history = vec![rel];
    let mut iterations = 0;

    while rel > opts.tol && iterations < opts.max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(fail(iterations, "non-finite curvature pᵀAp"));
        }
        if pap <= T::zero() {
            return Err(fail(
                iterations,
                "operator is not positive definite along the search direction",
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        rel = dot(&r, &r).sqrt() / b_norm;
        if !rel.is_finite() {
            return Err(fail(iterations, "residual became NaN"));
        }
        history.push(rel);
        if rel <= opts.tol {
            break;
        }
        precond.apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgOutcome {
        x,
        iterations,
        residual: rel,
        converged: rel <= opts.tol,
        history,
    })
}

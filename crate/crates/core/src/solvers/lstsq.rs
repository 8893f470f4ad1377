use crate::linalg::{Mat2, Vec2};
use crate::scalar::Real;

/// Singular directions below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LstsqSolution<T> {
    pub a: Mat2<T>,
    /// Numerical rank of `V` (0, 1 or 2).
    pub rank: usize,
}

impl<T> LstsqSolution<T> {
    pub fn full_rank(&self) -> bool {
        self.rank == 2
    }
}

/// Householder vector annihilating `x[1..]`, `None` for a zero column.
fn householder<T: Real>(x: &[T]) -> Option<Vec<T>> {
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm == T::zero() {
        return None;
    }
    let alpha = if x[0] > T::zero() { -norm } else { norm };
    let mut w = x.to_vec();
    w[0] -= alpha;
    Some(w)
}

fn reflect<T: Real>(w: &[T], target: &mut [T]) {
    let wnorm2 = w.iter().map(|&v| v * v).sum::<T>();
    if wnorm2 == T::zero() {
        return;
    }
    let f = T::lit(2.0) * w.iter().zip(target.iter()).map(|(&a, &b)| a * b).sum::<T>() / wnorm2;
    for (t, &wi) in target.iter_mut().zip(w) {
        *t -= f * wi;
    }
}

/// Least-squares solution of `S = A V` for `A ∈ ℝ^{2×2}` from paired columns
/// `v_m`, `s_m`.
///
/// Uses a column-pivoted Householder QR of `Vᵀ` (M×2) and solves for the two
/// rows of `A` independently. Rank-deficient `V` yields the minimum-norm
/// solution. Returns `None` when there are no samples.
pub fn lstsq_qr<T: Real>(v: &[Vec2<T>], s: &[Vec2<T>]) -> Option<LstsqSolution<T>> {
    assert_eq!(v.len(), s.len(), "velocity and signal columns must pair up");
    let m = v.len();
    if m == 0 {
        return None;
    }
    // Columns of Vᵀ and the two right-hand sides (rows of S).
    let mut cols = [
        v.iter().map(|p| p.x).collect::<Vec<T>>(),
        v.iter().map(|p| p.y).collect::<Vec<T>>(),
    ];
    let mut rhs = [
        s.iter().map(|p| p.x).collect::<Vec<T>>(),
        s.iter().map(|p| p.y).collect::<Vec<T>>(),
    ];
    let sq = |c: &[T]| c.iter().map(|&x| x * x).sum::<T>();
    let perm = if sq(&cols[1]) > sq(&cols[0]) { [1, 0] } else { [0, 1] };
    if perm[0] == 1 {
        cols.swap(0, 1);
    }

    let mut r = [[T::zero(); 2]; 2];
    for step in 0..m.min(2) {
        let Some(w) = householder(&cols[step][step..]) else {
            continue;
        };
        for target in cols.iter_mut().skip(step).chain(rhs.iter_mut()) {
            reflect(&w, &mut target[step..]);
        }
    }
    r[0][0] = cols[0][0];
    r[0][1] = cols[1][0];
    if m > 1 {
        r[1][1] = cols[1][1];
    }

    let r11 = r[0][0].abs();
    let rank = if r11 == T::zero() {
        0
    } else if m < 2 || r[1][1].abs() <= T::lit(RANK_TOL) * r11 {
        1
    } else {
        2
    };

    let mut rows = [[T::zero(); 2]; 2];
    for (row, b) in rows.iter_mut().zip(&rhs) {
        let x_perm = match rank {
            0 => [T::zero(), T::zero()],
            1 => {
                // Vᵀ P ≈ q1 [r00 r01]: minimum-norm solution along that row vector.
                let c = b[0];
                let n2 = r[0][0] * r[0][0] + r[0][1] * r[0][1];
                [c * r[0][0] / n2, c * r[0][1] / n2]
            }
            _ => {
                let x1 = b[1] / r[1][1];
                let x0 = (b[0] - r[0][1] * x1) / r[0][0];
                [x0, x1]
            }
        };
        row[perm[0]] = x_perm[0];
        row[perm[1]] = x_perm[1];
    }
    Some(LstsqSolution { a: Mat2(rows), rank })
}

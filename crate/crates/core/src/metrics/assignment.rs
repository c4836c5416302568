//! Maximum-weight bipartite assignment via the Hungarian algorithm with
//! potentials, O(n³). Used to align key and response clusters for the
//! entity-based metric.

use crate::num::Real;

/// Total weight of an optimal one-to-one assignment between rows and
/// columns of `weights` (rectangular allowed; unmatched rows/columns
/// contribute nothing).
pub fn max_weight_assignment<S: Real>(weights: &[Vec<S>]) -> S {
    let rows = weights.len();
    let cols = weights.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return S::zero();
    }
    let n = rows.max(cols);
    // Minimization on the negated, zero-padded square matrix.
    let cost = |i: usize, j: usize| -> S {
        if i < rows && j < cols {
            -weights[i][j]
        } else {
            S::zero()
        }
    };

    // Potentials u/v and column matching p, 1-indexed with a virtual 0 slot.
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![S::infinity(); n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = S::infinity();
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut total = S::zero();
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < rows && j - 1 < cols {
            total += weights[i - 1][j - 1];
        }
    }
    total
}

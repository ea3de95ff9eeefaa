//! Distances between functions sampled on a shared grid.

/// λ-slack interleaving distance between two nonnegative functions sampled on `grid`.
///
/// Returns the smallest `ε ≥ 0` such that for every grid time `t` and
/// `i, j ∈ {1, 2}`, the minimum of `f_i` over grid samples within `ε` of `t`
/// is at most `f_j(t) + λε`. Windows are clamped to the grid.
///
/// Feasibility is monotone in `ε` and only changes at a pairwise grid gap or
/// at a value `(f_i(s) - f_j(t)) / λ`, so the infimum is found exactly by
/// binary search over that finite candidate set. When `λ = 0` and no window
/// radius works, the distance is `+∞`.
pub fn slack_interleaving_distance(lambda: f64, grid: &[f64], f1: &[f64], f2: &[f64]) -> f64 {
    assert_eq!(grid.len(), f1.len(), "sample length does not match grid");
    assert_eq!(grid.len(), f2.len(), "sample length does not match grid");
    if f1 == f2 {
        return 0.0;
    }
    let k = grid.len();
    let mut candidates = vec![0.0];
    for a in 0..k {
        for b in a + 1..k {
            candidates.push(grid[b] - grid[a]);
        }
    }
    if lambda > 0.0 {
        for fi in [f1, f2] {
            for fj in [f1, f2] {
                for &x in fi {
                    for &y in fj {
                        if x > y {
                            candidates.push((x - y) / lambda);
                        }
                    }
                }
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let feasible = |eps: f64| interleaved(lambda, grid, f1, f2, eps);
    if !feasible(*candidates.last().unwrap()) {
        return f64::INFINITY;
    }
    // Invariant: candidates[hi] is feasible; everything below lo is not.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[hi]
}

fn interleaved(lambda: f64, grid: &[f64], f1: &[f64], f2: &[f64], eps: f64) -> bool {
    let k = grid.len();
    let slack = lambda * eps;
    let mut lo = 0;
    let mut hi = 0;
    for t in 0..k {
        while grid[t] - grid[lo] > eps {
            lo += 1;
        }
        while hi + 1 < k && grid[hi + 1] - grid[t] <= eps {
            hi += 1;
        }
        let m1 = f1[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
        let m2 = f2[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
        let floor = f1[t].min(f2[t]) + slack;
        if m1.max(m2) > floor {
            return false;
        }
    }
    true
}

/// `max_k e^{-2/t_k} |f1(t_k) - f2(t_k)|` over a positive grid.
pub fn damped_sup_distance(grid: &[f64], f1: &[f64], f2: &[f64]) -> f64 {
    assert_eq!(grid.len(), f1.len(), "sample length does not match grid");
    assert_eq!(grid.len(), f2.len(), "sample length does not match grid");
    grid.iter()
        .zip(f1.iter().zip(f2))
        .map(|(t, (a, b))| (-2.0 / t).exp() * (a - b).abs())
        .fold(0.0, f64::max)
}

//! Clustering disagreement under the best cluster relabeling.

/// Maximum-weight perfect assignment on a square matrix (Hungarian method
/// with potentials, O(k³)).
pub(crate) fn hungarian_max(weights: &[Vec<u64>]) -> u64 {
    let k = weights.len();
    if k == 0 {
        return 0;
    }
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0) as i64;
    // Minimize cost = max_w − weight.
    let cost = |i: usize, j: usize| max_w - weights[i][j] as i64;

    // Potentials over rows/columns, 1-indexed with a dummy 0 slot.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut p = vec![0usize; k + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0usize;
            for j in 1..=k {
                if !used[j] {
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
            }
            for j in 0..=k {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
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
    let mut total = 0u64;
    for j in 1..=k {
        if p[j] != 0 {
            total += weights[p[j] - 1][j - 1];
        }
    }
    total
}

/// Fraction of points misclassified under the best bijection between output
/// clusters and latent clusters: `min_σ (1/2n) Σ_i |C_i Δ Ĉ_σ(i)|`.
/// Unlabeled points (None) count as their own mismatch.
pub fn clustering_error(assignment: &[Option<usize>], labels: &[usize], k: usize) -> f64 {
    assert_eq!(assignment.len(), labels.len(), "assignment and labels must cover the same ids");
    let n = labels.len();
    if n == 0 {
        return 0.0;
    }
    let max_label = labels.iter().copied().max().unwrap_or(0);
    let max_local = assignment.iter().flatten().copied().max().unwrap_or(0);
    let size = k.max(max_label + 1).max(max_local + 1);

    let mut overlap = vec![vec![0u64; size]; size];
    let mut assigned = 0u64;
    for (a, &l) in assignment.iter().zip(labels) {
        if let Some(c) = a {
            overlap[l][*c] += 1;
            assigned += 1;
        }
    }
    let matched = hungarian_max(&overlap);
    (n as u64 + assigned - 2 * matched) as f64 / (2.0 * n as f64)
}

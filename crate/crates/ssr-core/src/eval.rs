//! Scoring: Hungarian matching, clustering metrics (accuracy, NMI, Rand
//! index), the within-class distance ratio, the rotation-recovery cosine
//! score, and a small Spearman helper for the sweep harness.

use crate::cluster::ClusterLabels;
use crate::error::{Result, SsrError};
use crate::linalg::RotationMatrix;
use crate::mat::Mat;

/// Minimum-cost perfect matching on a square cost matrix; `assignment[row]`
/// is the chosen column. O(K³) shortest-augmenting-path formulation with
/// row/column potentials.
pub fn hungarian(cost: &Mat) -> Result<Vec<usize>> {
    if !cost.is_square() {
        return Err(SsrError::validation(
            "hungarian requires a square cost matrix",
        ));
    }
    if !cost.all_finite() {
        return Err(SsrError::validation("hungarian cost matrix must be finite"));
    }
    let n = cost.rows();
    // 1-based arrays; index 0 is the virtual unassigned slot.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut assigned_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        assigned_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
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
                    u[assigned_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned_row[j0] = assigned_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if assigned_row[j] > 0 {
            assignment[assigned_row[j] - 1] = j - 1;
        }
    }
    Ok(assignment)
}

/// Pred × truth co-occurrence counts.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn from_labels(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<Self> {
        if pred.n() != truth.n() {
            return Err(SsrError::validation(format!(
                "label lengths differ: {} vs {}",
                pred.n(),
                truth.n()
            )));
        }
        let mut counts = vec![vec![0usize; truth.k()]; pred.k()];
        for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
            counts[p][t] += 1;
        }
        Ok(ContingencyTable {
            counts,
            n: pred.n(),
        })
    }

    fn pred_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    fn truth_sums(&self) -> Vec<usize> {
        let kt = self.counts.first().map_or(0, |r| r.len());
        (0..kt)
            .map(|j| self.counts.iter().map(|row| row[j]).sum())
            .collect()
    }
}

/// Fraction of correctly classified samples under the best label matching
/// (Hungarian on the negated contingency table).
pub fn accuracy(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let table = ContingencyTable::from_labels(pred, truth)?;
    let k = pred.k().max(truth.k());
    let padded = Mat::from_fn(k, k, |i, j| {
        let c = table
            .counts
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0);
        -(c as f64)
    });
    let assignment = hungarian(&padded)?;
    let mut matched = 0usize;
    for (i, &j) in assignment.iter().enumerate() {
        matched += table
            .counts
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0);
    }
    Ok(matched as f64 / table.n as f64)
}

/// Normalized mutual information with geometric-mean normalization and
/// natural logarithms (0·log 0 = 0). Two identical single-cluster partitions
/// score 1; any other degenerate entropy scores 0.
pub fn nmi(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let table = ContingencyTable::from_labels(pred, truth)?;
    let n = table.n as f64;
    let entropy = |sums: &[usize]| -> f64 {
        sums.iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let hp = entropy(&table.pred_sums());
    let ht = entropy(&table.truth_sums());
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    let pred_sums = table.pred_sums();
    let truth_sums = table.truth_sums();
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let pij = c as f64 / n;
            mi += pij * ((n * c as f64) / (pred_sums[i] as f64 * truth_sums[j] as f64)).ln();
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// Plain (unadjusted) Rand index: agreeing pairs over C(n,2).
pub fn rand_index(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let table = ContingencyTable::from_labels(pred, truth)?;
    if table.n < 2 {
        return Err(SsrError::validation("rand index needs at least 2 samples"));
    }
    let choose2 = |c: usize| (c * c.saturating_sub(1) / 2) as f64;
    let same_same: f64 = table.counts.iter().flatten().map(|&c| choose2(c)).sum();
    let pred_pairs: f64 = table.pred_sums().iter().map(|&c| choose2(c)).sum();
    let truth_pairs: f64 = table.truth_sums().iter().map(|&c| choose2(c)).sum();
    let total = choose2(table.n);
    // diff-diff pairs by inclusion-exclusion; agreeing = same-same + diff-diff.
    let agree = total - pred_pairs - truth_pairs + 2.0 * same_same;
    Ok(agree / total)
}

/// S_W/S_T: within-class scatter around class means over total scatter
/// around the global mean; columns of `x` are samples.
pub fn within_class_ratio(x: &Mat, truth: &ClusterLabels) -> Result<f64> {
    let n = x.cols();
    if truth.n() != n {
        return Err(SsrError::validation("label length must match sample count"));
    }
    let p = x.rows();
    let k = truth.k();
    let mut class_means = Mat::zeros(p, k);
    let mut counts = vec![0usize; k];
    let mut global = vec![0.0; p];
    for j in 0..n {
        let c = truth.labels()[j];
        counts[c] += 1;
        for d in 0..p {
            class_means[(d, c)] += x[(d, j)];
            global[d] += x[(d, j)];
        }
    }
    for c in 0..k {
        for d in 0..p {
            class_means[(d, c)] /= counts[c].max(1) as f64;
        }
    }
    for g in global.iter_mut() {
        *g /= n as f64;
    }
    let mut s_w = 0.0;
    let mut s_t = 0.0;
    for j in 0..n {
        let c = truth.labels()[j];
        for d in 0..p {
            s_w += (x[(d, j)] - class_means[(d, c)]).powi(2);
            s_t += (x[(d, j)] - global[d]).powi(2);
        }
    }
    if s_t == 0.0 {
        return Err(SsrError::validation(
            "total scatter is zero; ratio undefined",
        ));
    }
    Ok(s_w / s_t)
}

/// Mean |cosine| between matched columns of the two rotations; matching by
/// Hungarian maximizing total |cosine|, so permutations and sign flips of
/// the estimate do not count against it.
pub fn rotation_recovery_score(r_hat: &RotationMatrix, r_true: &RotationMatrix) -> Result<f64> {
    if r_hat.dim() != r_true.dim() {
        return Err(SsrError::validation("rotation dimensions differ"));
    }
    let r = r_hat.dim();
    let g = r_hat.as_mat().tr_matmul(r_true.as_mat());
    let cost = Mat::from_fn(r, r, |i, j| -g[(i, j)].abs());
    let assignment = hungarian(&cost)?;
    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| g[(i, j)].abs())
        .sum();
    Ok(total / r as f64)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(SsrError::validation(
            "spearman inputs must have equal length",
        ));
    }
    if a.len() < 2 {
        return Err(SsrError::validation(
            "spearman needs at least 2 observations",
        ));
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for i in 0..a.len() {
        let da = ra[i] - mean;
        let db = rb[i] - mean;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(SsrError::validation(
            "spearman undefined for constant input",
        ));
    }
    Ok(cov / (var_a * var_b).sqrt())
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap().then(i.cmp(&j)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[usize]) -> ClusterLabels {
        let k = v.iter().max().unwrap() + 1;
        ClusterLabels::new(v.to_vec(), k).unwrap()
    }

    #[test]
    fn hungarian_three_by_three_known_optimum() {
        // All six permutations enumerated by hand: minimum total is 5 at
        // (0->1, 1->0, 2->2).
        #[rustfmt::skip]
        let cost = Mat::from_rows(&[
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ]);
        let a = hungarian(&cost).unwrap();
        assert_eq!(a, vec![1, 0, 2]);
    }

    #[test]
    fn hungarian_identity_when_diagonal_is_free() {
        let cost = Mat::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(hungarian(&cost).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn hungarian_matches_brute_force_on_random_instances() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let k = rng.random_range(1..=6);
            let cost = Mat::from_fn(k, k, |_, _| rng.random_range(-5.0..5.0));
            let assignment = hungarian(&cost).unwrap();
            let total: f64 = assignment
                .iter()
                .enumerate()
                .map(|(i, &j)| cost[(i, j)])
                .sum();
            // Exhaustive oracle over all permutations.
            let mut perm: Vec<usize> = (0..k).collect();
            let best = permutations_min(&mut perm, 0, &cost);
            assert!(
                total <= best + 1e-9,
                "hungarian {total} worse than brute force {best}"
            );
        }
    }

    fn permutations_min(perm: &mut Vec<usize>, at: usize, cost: &Mat) -> f64 {
        if at == perm.len() {
            return perm.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
        }
        let mut best = f64::INFINITY;
        for i in at..perm.len() {
            perm.swap(at, i);
            best = best.min(permutations_min(perm, at + 1, cost));
            perm.swap(at, i);
        }
        best
    }

    #[test]
    fn accuracy_absorbs_relabeling_and_scores_splits() {
        let truth = labels(&[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(accuracy(&truth, &truth).unwrap(), 1.0);
        let relabeled = labels(&[1, 1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(accuracy(&relabeled, &truth).unwrap(), 1.0);
        // One true cluster split evenly against the other: 6 of 8 match.
        let split = labels(&[0, 0, 1, 1, 1, 1, 1, 1]);
        assert_eq!(accuracy(&split, &truth).unwrap(), 0.75);
    }

    #[test]
    fn accuracy_handles_differing_cluster_counts() {
        let truth = labels(&[0, 0, 1, 1]);
        let pred = labels(&[0, 1, 2, 2]);
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.75);
    }

    #[test]
    fn nmi_zero_for_independent_and_one_for_identical() {
        let pred = labels(&[0, 0, 1, 1]);
        let truth = labels(&[0, 1, 0, 1]);
        assert_eq!(nmi(&pred, &truth).unwrap(), 0.0);
        assert_eq!(nmi(&pred, &pred).unwrap(), 1.0);
        // Symmetry.
        let a = labels(&[0, 0, 1, 2]);
        let b = labels(&[0, 1, 1, 1]);
        assert!((nmi(&a, &b).unwrap() - nmi(&b, &a).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn nmi_degenerate_single_cluster_rules() {
        let single = ClusterLabels::new(vec![0, 0, 0], 1).unwrap();
        let multi = labels(&[0, 1, 0]);
        assert_eq!(nmi(&single, &single).unwrap(), 1.0);
        assert_eq!(nmi(&single, &multi).unwrap(), 0.0);
        assert_eq!(nmi(&multi, &single).unwrap(), 0.0);
    }

    #[test]
    fn rand_index_pair_counting() {
        let pred = labels(&[0, 0, 1, 1]);
        let truth = labels(&[0, 1, 0, 1]);
        assert!((rand_index(&pred, &truth).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rand_index(&pred, &pred).unwrap(), 1.0);
        // All-one-cluster vs two equal halves on n=6: agree only on the
        // 2*C(3,2) same-cluster pairs.
        let one = ClusterLabels::new(vec![0; 6], 1).unwrap();
        let halves = labels(&[0, 0, 0, 1, 1, 1]);
        let expect = 6.0 / 15.0;
        assert!((rand_index(&one, &halves).unwrap() - expect).abs() < 1e-15);
        // Symmetry.
        assert_eq!(
            rand_index(&one, &halves).unwrap(),
            rand_index(&halves, &one).unwrap()
        );
    }

    #[test]
    fn within_class_ratio_edges() {
        let x = Mat::from_rows(&[vec![0.0, 0.0, 1.0, 1.0]]);
        let truth = labels(&[0, 0, 1, 1]);
        assert_eq!(within_class_ratio(&x, &truth).unwrap(), 0.0);
        // Identical classes: ratio 1 (class means equal the global mean).
        let x2 = Mat::from_rows(&[vec![0.0, 1.0, 0.0, 1.0]]);
        assert!((within_class_ratio(&x2, &truth).unwrap() - 1.0).abs() < 1e-12);
        // Zero scatter errors.
        let flat = Mat::from_rows(&[vec![2.0, 2.0]]);
        assert!(within_class_ratio(&flat, &labels(&[0, 1])).is_err());
    }

    #[test]
    fn rotation_score_invariances() {
        let theta: f64 = 0.9;
        #[rustfmt::skip]
        let r = Mat::from_rows(&[
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(),  theta.cos()],
        ]);
        let rot = RotationMatrix::new(r.clone()).unwrap();
        assert!((rotation_recovery_score(&rot, &rot).unwrap() - 1.0).abs() < 1e-12);
        // Swap columns and flip one sign: still a perfect recovery.
        let mut permuted = Mat::zeros(2, 2);
        for i in 0..2 {
            permuted[(i, 0)] = -r[(i, 1)];
            permuted[(i, 1)] = r[(i, 0)];
        }
        let perm_rot = RotationMatrix::new(permuted).unwrap();
        assert!((rotation_recovery_score(&perm_rot, &rot).unwrap() - 1.0).abs() < 1e-12);
        // Mismatched rotation scores below 1.
        let other = RotationMatrix::identity(2);
        let score = rotation_recovery_score(&other, &rot).unwrap();
        assert!(score < 1.0 && score > 0.0);
    }

    #[test]
    fn spearman_monotone_and_ties() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let up = [10.0, 20.0, 30.0, 40.0];
        let down = [5.0, 4.0, 3.0, 2.0];
        assert!((spearman(&a, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &down).unwrap() + 1.0).abs() < 1e-12);
        assert!(spearman(&a, &[1.0, 1.0, 1.0, 1.0]).is_err());
        // Ties get average ranks; correlation stays defined.
        let tied = [1.0, 1.0, 2.0, 3.0];
        let s = spearman(&tied, &up).unwrap();
        assert!(s > 0.9 && s <= 1.0);
    }
}

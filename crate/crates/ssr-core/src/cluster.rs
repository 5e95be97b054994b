//! Clustering front-ends: Scut on sparse codes, a plain Lloyd K-means
//! baseline with restarts, and the spectral/linear pipelines built on them.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SsrError};
use crate::graph::{laplacian, SimilarityMatrix};
use crate::linalg::{compact_svd, sym_eig, Which};
use crate::mat::{DataMatrix, Mat};
use crate::nscrt::SparseCodes;

/// Length-n assignment into K clusters; every label is < K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterLabels {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(SsrError::validation("labels must be non-empty"));
        }
        if k == 0 {
            return Err(SsrError::validation("cluster count must be positive"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(SsrError::validation(format!(
                "label {bad} out of range 0..{k}"
            )));
        }
        Ok(ClusterLabels { labels, k })
    }

    /// Re-indexes arbitrary integers to 0..K−1 by first appearance.
    pub fn from_raw(raw: &[usize]) -> Result<Self> {
        let mut map = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &v in raw {
            let id = match map.iter().position(|&m| m == v) {
                Some(i) => i,
                None => {
                    map.push(v);
                    map.len() - 1
                }
            };
            labels.push(id);
        }
        ClusterLabels::new(labels, map.len().max(1))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Scut (argmax readout): sample i joins the row with the largest code.
/// Ties take the smallest row index so results are deterministic.
pub fn scut(codes: &SparseCodes) -> ClusterLabels {
    let h = &codes.h;
    let mut labels = Vec::with_capacity(h.cols());
    for j in 0..h.cols() {
        let mut best = 0;
        for i in 1..h.rows() {
            if h[(i, j)] > h[(best, j)] {
                best = i;
            }
        }
        labels.push(best);
    }
    ClusterLabels {
        labels,
        k: h.rows(),
    }
}

#[derive(Debug, Clone)]
pub struct KmeansOptions {
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        KmeansOptions {
            max_iter: 300,
            restarts: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KmeansResult {
    pub labels: ClusterLabels,
    pub centers: Mat,
    pub objective: f64,
    pub iterations: usize,
    /// Objective after each Lloyd iteration of the winning restart.
    pub objective_trace: Vec<f64>,
}

/// Lloyd K-means with uniform random-point initialization and restarts.
/// Restarts run in parallel on derived seeds; the lowest objective wins,
/// with ties going to the smallest restart index.
pub fn kmeans(points: &DataMatrix, k: usize, opts: &KmeansOptions) -> Result<KmeansResult> {
    let n = points.n_samples();
    if k < 1 || k > n {
        return Err(SsrError::validation(format!(
            "K must be in 1..={n}, got {k}"
        )));
    }
    if opts.restarts < 1 {
        return Err(SsrError::validation("at least one restart required"));
    }
    let runs: Vec<KmeansResult> = (0..opts.restarts)
        .into_par_iter()
        .map(|ridx| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, ridx as u64));
            lloyd_once(points, k, opts.max_iter, &mut rng)
        })
        .collect();
    let mut best = 0;
    for i in 1..runs.len() {
        if runs[i].objective < runs[best].objective {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).unwrap())
}

/// SplitMix64-style mixing so per-restart streams are decorrelated.
pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn lloyd_once(
    points: &DataMatrix,
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> KmeansResult {
    let p = points.dim();
    let n = points.n_samples();
    let a = points.as_mat();

    let init = rand::seq::index::sample(rng, n, k);
    let mut centers = Mat::zeros(p, k);
    for (c, idx) in init.iter().enumerate() {
        for d in 0..p {
            centers[(d, c)] = a[(d, idx)];
        }
    }

    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        // Assignment step: nearest center, ties to the smaller index.
        let mut changed = false;
        for j in 0..n {
            let mut best = 0;
            let mut best_d = center_dist2(a, &centers, j, 0);
            for c in 1..k {
                let d = center_dist2(a, &centers, j, c);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[j] != best {
                changed = true;
            }
            labels[j] = best;
            dists[j] = best_d;
        }

        // Empty-cluster repair: move the point farthest from its own center.
        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = usize::MAX;
            for j in 0..n {
                if !taken[j]
                    && counts[labels[j]] > 1
                    && (far == usize::MAX || dists[j] > dists[far])
                {
                    far = j;
                }
            }
            if far == usize::MAX {
                continue;
            }
            taken[far] = true;
            counts[labels[far]] -= 1;
            labels[far] = c;
            counts[c] = 1;
            dists[far] = 0.0;
            changed = true;
        }

        // Update step: centers become cluster means.
        centers = Mat::zeros(p, k);
        for j in 0..n {
            for d in 0..p {
                centers[(d, labels[j])] += a[(d, j)];
            }
        }
        for c in 0..k {
            // Repair guarantees counts[c] >= 1 when k <= n; max(1) keeps the
            // arithmetic finite regardless.
            for d in 0..p {
                centers[(d, c)] /= counts[c].max(1) as f64;
            }
        }

        let obj: f64 = (0..n)
            .map(|j| center_dist2(a, &centers, j, labels[j]))
            .sum();
        trace.push(obj);
        if !changed && iterations > 1 {
            break;
        }
    }

    let objective = *trace.last().unwrap();
    KmeansResult {
        labels: ClusterLabels { labels, k },
        centers,
        objective,
        iterations,
        objective_trace: trace,
    }
}

fn center_dist2(a: &Mat, centers: &Mat, j: usize, c: usize) -> f64 {
    let mut acc = 0.0;
    for d in 0..a.rows() {
        let diff = a[(d, j)] - centers[(d, c)];
        acc += diff * diff;
    }
    acc
}

/// Ratio cut baseline: K-means over the columns of the K smallest Laplacian
/// eigenvectors (each sample is an ℝᴷ point).
pub fn rcut_pipeline(w: &SimilarityMatrix, k: usize, opts: &KmeansOptions) -> Result<KmeansResult> {
    if k < 1 || k > w.n() {
        return Err(SsrError::validation(format!(
            "K must be in 1..={}, got {k}",
            w.n()
        )));
    }
    let l = laplacian(w);
    let basis = sym_eig(&l.matrix, k, Which::Smallest)?;
    let embedded = DataMatrix::new(basis.vectors)?;
    kmeans(&embedded, k, opts)
}

/// Linear (original-data) pipelines from the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearVariant {
    /// K-means on Σ_{1:K−1}·V_{1:K−1} (scaled principal components).
    Kpc,
    /// K-means on V_{1:K−1} (unscaled right singular vectors).
    Rcuto,
}

/// K-means over the leading right singular vectors of the centered data,
/// optionally scaled by the singular values (KPC).
pub fn linear_pipeline(
    a: &DataMatrix,
    k: usize,
    variant: LinearVariant,
    opts: &KmeansOptions,
) -> Result<KmeansResult> {
    let n = a.n_samples();
    if k < 1 || k > n {
        return Err(SsrError::validation(format!(
            "K must be in 1..={n}, got {k}"
        )));
    }
    if k == 1 {
        // Zero-dimensional embedding: everything is one cluster.
        return Ok(KmeansResult {
            labels: ClusterLabels {
                labels: vec![0; n],
                k: 1,
            },
            centers: Mat::zeros(a.dim(), 1),
            objective: 0.0,
            iterations: 0,
            objective_trace: Vec::new(),
        });
    }
    let centered = crate::ssr::center_data(a);
    let f = compact_svd(centered.as_mat())?;
    if k - 1 > f.rank() {
        return Err(SsrError::validation(format!(
            "K-1 = {} exceeds the data rank {}",
            k - 1,
            f.rank()
        )));
    }
    let mut emb = Mat::zeros(k - 1, n);
    for i in 0..k - 1 {
        let scale = match variant {
            LinearVariant::Kpc => f.s[i],
            LinearVariant::Rcuto => 1.0,
        };
        for j in 0..n {
            emb[(i, j)] = scale * f.v[(i, j)];
        }
    }
    kmeans(&DataMatrix::new(emb)?, k, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nscrt::{nscrt, NscrtOptions};

    fn data_1d(xs: &[f64]) -> DataMatrix {
        DataMatrix::new(Mat::from_rows(&[xs.to_vec()])).unwrap()
    }

    #[test]
    fn scut_reads_argmax_with_smallest_index_ties() {
        // Build codes through the public solver on an indicator input.
        let mut x = Mat::zeros(2, 4);
        x[(0, 0)] = 1.0 / 2.0_f64.sqrt();
        x[(0, 1)] = 1.0 / 2.0_f64.sqrt();
        x[(1, 2)] = 1.0 / 2.0_f64.sqrt();
        x[(1, 3)] = 1.0 / 2.0_f64.sqrt();
        let codes = nscrt(&x, &NscrtOptions::default()).unwrap();
        let labels = scut(&codes);
        assert_eq!(labels.labels(), &[0, 0, 1, 1]);
        assert_eq!(labels.k(), 2);

        // Tie column: argmax must pick the smallest row index.
        let mut tied = codes.clone();
        tied.h = Mat::from_rows(&[vec![0.1, 0.2], vec![0.1, 0.7]]);
        assert_eq!(scut(&tied).labels(), &[0, 1]);
    }

    #[test]
    fn scut_invariant_under_positive_column_rescaling() {
        let x = Mat::from_rows(&[vec![0.9, 0.1, 0.4, 0.0], vec![0.1, 0.8, 0.6, 0.3]]);
        let mut codes = nscrt(&Mat::identity(2), &NscrtOptions::default()).unwrap();
        codes.h = x.clone();
        let base = scut(&codes);
        let mut scaled = x;
        for j in 0..4 {
            let f = 0.5 + j as f64;
            for i in 0..2 {
                scaled[(i, j)] *= f;
            }
        }
        codes.h = scaled;
        assert_eq!(scut(&codes).labels(), base.labels());
    }

    #[test]
    fn kmeans_two_pairs_in_1d_matches_enumerated_optimum() {
        // All 2-partitions of {0,1,9,10} say {0,1} vs {9,10} with WCSS 1.0.
        let res = kmeans(
            &data_1d(&[0.0, 1.0, 9.0, 10.0]),
            2,
            &KmeansOptions::default(),
        )
        .unwrap();
        assert!((res.objective - 1.0).abs() < 1e-12);
        assert_eq!(res.labels.labels()[0], res.labels.labels()[1]);
        assert_eq!(res.labels.labels()[2], res.labels.labels()[3]);
        assert_ne!(res.labels.labels()[0], res.labels.labels()[2]);
    }

    #[test]
    fn kmeans_k_equals_n_reaches_zero_objective() {
        let res = kmeans(&data_1d(&[1.0, 4.0, 9.0]), 3, &KmeansOptions::default()).unwrap();
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn kmeans_coincident_pairs_reach_zero_objective() {
        let pts = DataMatrix::new(Mat::from_rows(&[
            vec![0.0, 0.0, 5.0, 5.0],
            vec![1.0, 1.0, -3.0, -3.0],
        ]))
        .unwrap();
        let res = kmeans(&pts, 2, &KmeansOptions::default()).unwrap();
        assert_eq!(res.objective, 0.0);
        assert_eq!(res.labels.labels()[0], res.labels.labels()[1]);
        assert_ne!(res.labels.labels()[0], res.labels.labels()[2]);
    }

    #[test]
    fn kmeans_objective_trace_is_non_increasing_and_recomputable() {
        use rand::prelude::*;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let pts = DataMatrix::new(Mat::from_fn(3, 40, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let res = kmeans(
            &pts,
            4,
            &KmeansOptions {
                restarts: 3,
                ..Default::default()
            },
        )
        .unwrap();
        for w in res.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        // Recompute the objective from labels and data.
        let a = pts.as_mat();
        let k = res.labels.k();
        let mut centers = Mat::zeros(3, k);
        let mut counts = vec![0usize; k];
        for (j, &l) in res.labels.labels().iter().enumerate() {
            counts[l] += 1;
            for d in 0..3 {
                centers[(d, l)] += a[(d, j)];
            }
        }
        for c in 0..k {
            for d in 0..3 {
                centers[(d, c)] /= counts[c].max(1) as f64;
            }
        }
        let recomputed: f64 = (0..40)
            .map(|j| center_dist2(a, &centers, j, res.labels.labels()[j]))
            .sum();
        assert!((recomputed - res.objective).abs() < 1e-8);
    }

    #[test]
    fn kmeans_is_deterministic_and_respects_seed() {
        let pts = data_1d(&[0.0, 0.2, 0.4, 5.0, 5.3, 9.9, 10.2]);
        let a = kmeans(&pts, 3, &KmeansOptions::default()).unwrap();
        let b = kmeans(&pts, 3, &KmeansOptions::default()).unwrap();
        assert_eq!(a.labels.labels(), b.labels.labels());
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn kmeans_validates_k() {
        let pts = data_1d(&[1.0, 2.0]);
        assert!(kmeans(&pts, 0, &KmeansOptions::default()).is_err());
        assert!(kmeans(&pts, 3, &KmeansOptions::default()).is_err());
    }

    #[test]
    fn rcut_on_ideal_blocks_is_perfect() {
        // Two complete blocks of unit weight: the 2 smallest eigenvectors are
        // component indicators, where K-means cannot miss.
        let mut wm = Mat::zeros(7, 7);
        for (lo, hi) in [(0usize, 3usize), (3, 7)] {
            for i in lo..hi {
                for j in lo..hi {
                    if i != j {
                        wm[(i, j)] = 1.0;
                    }
                }
            }
        }
        let w = SimilarityMatrix::new(wm).unwrap();
        let res = rcut_pipeline(&w, 2, &KmeansOptions::default()).unwrap();
        let l = res.labels.labels();
        assert!(l[0] == l[1] && l[1] == l[2]);
        assert!(l[3] == l[4] && l[4] == l[5] && l[5] == l[6]);
        assert_ne!(l[0], l[3]);
        assert!(res.objective < 1e-12);
    }

    #[test]
    fn linear_variants_agree_on_rank_one_data() {
        // Rank-1 data: the single embedding coordinate differs between KPC
        // and Rcuto only by a positive scale, so optima coincide.
        let base = vec![-3.0, -2.9, -3.1, 2.9, 3.0, 3.1];
        let a = DataMatrix::new(Mat::from_rows(&[
            base.clone(),
            base.iter().map(|v| 2.0 * v).collect(),
        ]))
        .unwrap();
        let kpc = linear_pipeline(&a, 2, LinearVariant::Kpc, &KmeansOptions::default()).unwrap();
        let rcuto =
            linear_pipeline(&a, 2, LinearVariant::Rcuto, &KmeansOptions::default()).unwrap();
        let same = kpc.labels.labels() == rcuto.labels.labels();
        let flipped: Vec<usize> = kpc.labels.labels().iter().map(|&l| 1 - l).collect();
        assert!(same || flipped == rcuto.labels.labels());
        assert_eq!(kpc.labels.labels()[0], kpc.labels.labels()[1]);
        assert_ne!(kpc.labels.labels()[0], kpc.labels.labels()[5]);
    }

    #[test]
    fn linear_pipeline_validates_rank() {
        let a = data_1d(&[1.0, -1.0, 2.0, -2.0]);
        // 1-D data has rank 1 after centering; K=3 needs rank 2.
        assert!(linear_pipeline(&a, 3, LinearVariant::Rcuto, &KmeansOptions::default()).is_err());
        assert!(linear_pipeline(&a, 2, LinearVariant::Rcuto, &KmeansOptions::default()).is_ok());
    }

    #[test]
    fn cluster_labels_validation() {
        assert!(ClusterLabels::new(vec![0, 1, 2], 3).is_ok());
        assert!(ClusterLabels::new(vec![0, 3], 3).is_err());
        assert!(ClusterLabels::new(vec![], 1).is_err());
        let raw = ClusterLabels::from_raw(&[7, 7, 2, 9]).unwrap();
        assert_eq!(raw.labels(), &[0, 0, 1, 2]);
        assert_eq!(raw.k(), 3);
    }
}

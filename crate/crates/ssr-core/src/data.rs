//! Synthetic generators (Gaussian mixtures, the onion set, rotated-indicator
//! recovery instances) and dataset I/O: dense CSV and edge-list graphs.

use std::fmt::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cluster::ClusterLabels;
use crate::error::{Result, SsrError};
use crate::graph::SimilarityMatrix;
use crate::linalg::RotationMatrix;
use crate::mat::{DataMatrix, Mat};

#[derive(Debug, Clone)]
pub struct GaussianComponent {
    pub center: Vec<f64>,
    pub scale: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct GaussianMixtureSpec {
    pub components: Vec<GaussianComponent>,
    pub seed: u64,
}

/// Isotropic Gaussian samples per component, columns grouped by component in
/// spec order. Deterministic in (spec, seed).
pub fn gen_gaussian_mixture(spec: &GaussianMixtureSpec) -> Result<(DataMatrix, ClusterLabels)> {
    if spec.components.is_empty() {
        return Err(SsrError::validation("mixture needs at least one component"));
    }
    let dim = spec.components[0].center.len();
    if dim == 0 {
        return Err(SsrError::validation("component centers must be non-empty"));
    }
    for (k, c) in spec.components.iter().enumerate() {
        if c.center.len() != dim {
            return Err(SsrError::validation(format!(
                "component {k} has dimension {} but component 0 has {dim}",
                c.center.len()
            )));
        }
        if c.count < 1 {
            return Err(SsrError::validation(format!(
                "component {k} count must be >= 1"
            )));
        }
        if !c.scale.is_finite() || c.scale <= 0.0 {
            return Err(SsrError::validation(format!(
                "component {k} scale must be positive"
            )));
        }
    }

    let n: usize = spec.components.iter().map(|c| c.count).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut m = Mat::zeros(dim, n);
    let mut labels = Vec::with_capacity(n);
    let mut j = 0;
    for (k, c) in spec.components.iter().enumerate() {
        for _ in 0..c.count {
            for d in 0..dim {
                let z: f64 = rng.sample(StandardNormal);
                m[(d, j)] = c.center[d] + c.scale * z;
            }
            labels.push(k);
            j += 1;
        }
    }
    Ok((
        DataMatrix::new(m)?,
        ClusterLabels::new(labels, spec.components.len())?,
    ))
}

/// Built-in benchmark datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    G1,
    G2,
    G3,
    Onion,
}

impl Preset {
    pub fn from_name(name: &str) -> Option<Preset> {
        match name.to_ascii_lowercase().as_str() {
            "g1" => Some(Preset::G1),
            "g2" => Some(Preset::G2),
            "g3" => Some(Preset::G3),
            "onion" => Some(Preset::Onion),
            _ => None,
        }
    }

    /// Number of classes in the preset.
    pub fn classes(&self) -> usize {
        3
    }

    pub fn generate(&self, seed: u64) -> (DataMatrix, ClusterLabels) {
        match self {
            Preset::G1 => gaussian_triangle(8.0, seed),
            Preset::G2 => gaussian_triangle(4.0, seed),
            Preset::G3 => gaussian_triangle(2.5, seed),
            Preset::Onion => gen_onion(seed),
        }
    }
}

/// Three unit-variance 2-D Gaussians of 50 points on an equilateral triangle
/// of side `side`; shrinking the side increases the class overlap.
fn gaussian_triangle(side: f64, seed: u64) -> (DataMatrix, ClusterLabels) {
    let h = side * 3f64.sqrt() / 2.0;
    let spec = GaussianMixtureSpec {
        components: vec![
            GaussianComponent {
                center: vec![0.0, 0.0],
                scale: 1.0,
                count: 50,
            },
            GaussianComponent {
                center: vec![side, 0.0],
                scale: 1.0,
                count: 50,
            },
            GaussianComponent {
                center: vec![side / 2.0, h],
                scale: 1.0,
                count: 50,
            },
        ],
        seed,
    };
    gen_gaussian_mixture(&spec).expect("triangle preset spec is valid")
}

/// Unbalanced concentric classes in 2-D: a 5-point blob inside rings of 20
/// and 50 points. The radii/jitters keep pointwise gaps within a ring well
/// below the gap between rings, so a small-k neighborhood graph separates
/// the classes.
pub fn gen_onion(seed: u64) -> (DataMatrix, ClusterLabels) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes = [5usize, 20, 50];
    let n: usize = sizes.iter().sum();
    let mut m = Mat::zeros(2, n);
    let mut labels = Vec::with_capacity(n);
    let mut j = 0;

    for _ in 0..sizes[0] {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        m[(0, j)] = 0.2 * zx;
        m[(1, j)] = 0.2 * zy;
        j += 1;
    }
    labels.extend(std::iter::repeat_n(0, sizes[0]));
    for (cls, (&count, radius)) in sizes[1..].iter().zip([3.2f64, 6.5]).enumerate() {
        for i in 0..count {
            let jitter: f64 = rng.sample(StandardNormal);
            let radial: f64 = rng.sample(StandardNormal);
            let theta = 2.0 * std::f64::consts::PI * i as f64 / count as f64 + 0.04 * jitter;
            let rho = radius + 0.08 * radial;
            m[(0, j)] = rho * theta.cos();
            m[(1, j)] = rho * theta.sin();
            labels.push(cls + 1);
            j += 1;
        }
    }
    (
        DataMatrix::new(m).expect("onion generator output is finite"),
        ClusterLabels::new(labels, 3).expect("onion labels are valid"),
    )
}

/// Cluster size layout for recovery experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeProfile {
    /// n/r samples per cluster (n must divide evenly).
    Uniform,
    /// Sizes 2, 4, …, 2^(r−1), with the final cluster absorbing the rest.
    Exponential,
}

impl SizeProfile {
    pub fn from_name(name: &str) -> Option<SizeProfile> {
        match name.to_ascii_lowercase().as_str() {
            "uniform" => Some(SizeProfile::Uniform),
            "exponential" | "exp" => Some(SizeProfile::Exponential),
            _ => None,
        }
    }

    pub fn sizes(&self, r: usize, n: usize) -> Result<Vec<usize>> {
        if r < 1 || n < 1 {
            return Err(SsrError::validation("r and n must be positive"));
        }
        match self {
            SizeProfile::Uniform => {
                if !n.is_multiple_of(r) {
                    return Err(SsrError::validation(format!(
                        "uniform profile needs r | n, got n = {n}, r = {r}"
                    )));
                }
                Ok(vec![n / r; r])
            }
            SizeProfile::Exponential => {
                if r == 1 {
                    return Ok(vec![n]);
                }
                if r > 62 {
                    return Err(SsrError::validation(
                        "exponential profile limited to r <= 62",
                    ));
                }
                let head: usize = (1..r).map(|k| 1usize << k).sum();
                if head >= n {
                    return Err(SsrError::validation(format!(
                        "exponential profile needs n > {head} for r = {r}, got n = {n}"
                    )));
                }
                let mut sizes: Vec<usize> = (1..r).map(|k| 1usize << k).collect();
                sizes.push(n - head);
                Ok(sizes)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoverySpec {
    pub r: usize,
    pub n: usize,
    pub profile: SizeProfile,
    pub noise_a: f64,
    pub seed: u64,
}

/// One synthetic rotated-indicator problem: X = R(H* + E).
#[derive(Debug, Clone)]
pub struct RecoveryInstance {
    pub x: Mat,
    pub r_true: RotationMatrix,
    pub h_star: Mat,
    pub sizes: Vec<usize>,
}

pub fn gen_recovery_instance(spec: &RecoverySpec) -> Result<RecoveryInstance> {
    if !spec.noise_a.is_finite() || spec.noise_a < 0.0 {
        return Err(SsrError::validation("noise_a must be finite and >= 0"));
    }
    let sizes = spec.profile.sizes(spec.r, spec.n)?;
    let (r, n) = (spec.r, spec.n);

    let mut h_star = Mat::zeros(r, n);
    let mut col = 0;
    for (k, &sz) in sizes.iter().enumerate() {
        let v = 1.0 / (sz as f64).sqrt();
        for _ in 0..sz {
            h_star[(k, col)] = v;
            col += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r_true = haar_rotation(r, &mut rng);

    let max_size = *sizes
        .iter()
        .max()
        .expect("profile yields at least one cluster");
    let sigma = spec.noise_a / (max_size as f64).sqrt();
    let mut noisy = h_star.clone();
    for i in 0..r {
        for j in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            noisy[(i, j)] += sigma * z;
        }
    }

    let x = r_true.as_mat().matmul(&noisy);
    Ok(RecoveryInstance {
        x,
        r_true,
        h_star,
        sizes,
    })
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the R-diagonal
/// sign correction, then a final column flip to force det = +1.
pub fn haar_rotation(r: usize, rng: &mut impl Rng) -> RotationMatrix {
    assert!(r >= 1, "rotation dimension must be positive");
    let mut q = Mat::from_fn(r, r, |_, _| rng.sample(StandardNormal));
    // Modified Gram-Schmidt over columns; record the diagonal signs of R.
    for j in 0..r {
        for prev in 0..j {
            let mut dot = 0.0;
            for i in 0..r {
                dot += q[(i, prev)] * q[(i, j)];
            }
            for i in 0..r {
                q[(i, j)] -= dot * q[(i, prev)];
            }
        }
        let norm: f64 = (0..r).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
        if norm < 1e-150 {
            // Degenerate draw (measure zero); restart with fresh randomness.
            return haar_rotation(r, rng);
        }
        for i in 0..r {
            q[(i, j)] /= norm;
        }
    }
    if det_sign(&q) < 0.0 {
        for i in 0..r {
            q[(i, r - 1)] = -q[(i, r - 1)];
        }
    }
    RotationMatrix::new(q).expect("Gram-Schmidt output is orthonormal")
}

/// Sign of det via Gaussian elimination with partial pivoting.
fn det_sign(m: &Mat) -> f64 {
    let n = m.rows();
    let mut a = m.clone();
    let mut sign = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if a[(i, k)].abs() > a[(piv, k)].abs() {
                piv = i;
            }
        }
        if a[(piv, k)] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            sign = -sign;
        }
        if a[(k, k)] < 0.0 {
            sign = -sign;
        }
        for i in (k + 1)..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    sign
}

/// Parses CSV text: samples as rows on disk, transposed to columns in
/// memory. Lines starting with '#' and blank lines are skipped. With
/// `has_labels`, the final column is a label string mapped to 0..K−1 by
/// first appearance.
pub fn parse_csv(text: &str, has_labels: bool) -> Result<(DataMatrix, Option<ClusterLabels>)> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width: Option<usize> = None;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if has_labels {
            let label = fields.pop().ok_or_else(|| SsrError::Parse {
                line: line_no,
                msg: "row has no label column".into(),
            })?;
            let id = match label_names.iter().position(|l| l == label) {
                Some(i) => i,
                None => {
                    label_names.push(label.to_string());
                    label_names.len() - 1
                }
            };
            labels.push(id);
        }
        if fields.is_empty() {
            return Err(SsrError::Parse {
                line: line_no,
                msg: "row has no feature columns".into(),
            });
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(SsrError::Parse {
                    line: line_no,
                    msg: format!("expected {w} feature columns, found {}", fields.len()),
                });
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in &fields {
            let v: f64 = f.parse().map_err(|_| SsrError::Parse {
                line: line_no,
                msg: format!("cannot parse '{f}' as a number"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(SsrError::validation("CSV contains no data rows"));
    }
    let p = width.unwrap();
    let n = rows.len();
    let m = Mat::from_fn(p, n, |d, j| rows[j][d]);
    let data = DataMatrix::new(m)?;
    let labels = if has_labels {
        Some(ClusterLabels::new(labels, label_names.len())?)
    } else {
        None
    };
    Ok((data, labels))
}

pub fn load_csv(
    path: impl AsRef<Path>,
    has_labels: bool,
) -> Result<(DataMatrix, Option<ClusterLabels>)> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, has_labels)
}

/// Writes samples as rows using 17-significant-digit scientific notation, so
/// a reload reproduces every f64 bit-exactly. Labels become a final integer
/// column.
pub fn save_csv(
    path: impl AsRef<Path>,
    data: &DataMatrix,
    labels: Option<&ClusterLabels>,
) -> Result<()> {
    if let Some(l) = labels {
        if l.n() != data.n_samples() {
            return Err(SsrError::validation(
                "label count does not match sample count",
            ));
        }
    }
    let m = data.as_mat();
    let mut out = String::new();
    for j in 0..m.cols() {
        for d in 0..m.rows() {
            if d > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.16e}", m[(d, j)]);
        }
        if let Some(l) = labels {
            let _ = write!(out, ",{}", l.labels()[j]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Bundled iris measurements: 4 features × 150 samples, 3 classes of 50.
pub fn iris() -> (DataMatrix, ClusterLabels) {
    let text = include_str!("../assets/iris.csv");
    let (data, labels) = parse_csv(text, true).expect("bundled iris data is well-formed");
    (data, labels.expect("bundled iris data is labeled"))
}

/// Reads a whitespace-separated edge list: `i j` or `i j w` per line (w
/// defaults to 1). '#' lines are comments; a comment containing `one-based`
/// switches vertex numbering. Duplicate edges keep the max weight;
/// self-loops are skipped; negative weights are rejected.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SimilarityMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text)
}

pub fn parse_edge_list(text: &str) -> Result<SimilarityMatrix> {
    let mut one_based = false;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_vertex = 0usize;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if trimmed.contains("one-based") {
                one_based = true;
            }
            continue;
        }
        // The indexing flag may also stand alone as a header line.
        if trimmed.eq_ignore_ascii_case("one-based") {
            one_based = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(SsrError::Parse {
                line: line_no,
                msg: format!("expected 'i j' or 'i j w', found {} fields", fields.len()),
            });
        }
        let parse_idx = |f: &str| -> Result<usize> {
            f.parse().map_err(|_| SsrError::Parse {
                line: line_no,
                msg: format!("cannot parse vertex '{f}'"),
            })
        };
        let mut i = parse_idx(fields[0])?;
        let mut j = parse_idx(fields[1])?;
        let w: f64 = match fields.get(2) {
            Some(f) => f.parse().map_err(|_| SsrError::Parse {
                line: line_no,
                msg: format!("cannot parse weight '{f}'"),
            })?,
            None => 1.0,
        };
        if w < 0.0 || !w.is_finite() {
            return Err(SsrError::validation(format!(
                "line {line_no}: edge weight must be finite and non-negative, got {w}"
            )));
        }
        if one_based {
            if i == 0 || j == 0 {
                return Err(SsrError::Parse {
                    line: line_no,
                    msg: "vertex 0 in a one-based edge list".into(),
                });
            }
            i -= 1;
            j -= 1;
        }
        if i == j {
            continue;
        }
        max_vertex = max_vertex.max(i).max(j);
        edges.push((i, j, w));
    }

    if edges.is_empty() {
        return Err(SsrError::validation("edge list contains no usable edges"));
    }
    let n = max_vertex + 1;
    let mut w = Mat::zeros(n, n);
    for (i, j, wt) in edges {
        if wt > w[(i, j)] {
            w[(i, j)] = wt;
            w[(j, i)] = wt;
        }
    }
    SimilarityMatrix::new(w)
}

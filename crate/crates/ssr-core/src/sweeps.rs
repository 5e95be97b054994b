//! Experiment harnesses behind the sweep subcommands: rotation-recovery
//! grids and the separation/ρ/sparsity/accuracy sweep. They live in the
//! library so the test suite can drive them directly.

use rayon::prelude::*;

use crate::cluster::{derive_seed, scut};
use crate::data::{
    gen_gaussian_mixture, gen_recovery_instance, GaussianComponent, GaussianMixtureSpec,
    RecoverySpec, SizeProfile,
};
use crate::error::{Result, SsrError};
use crate::eval::{accuracy, rotation_recovery_score, spearman};
use crate::graph::{build_knn_similarity, laplacian, rho};
use crate::nscrt::{nscrt, NscrtOptions};
use crate::ssr::{sparsity, ssrk};

#[derive(Debug, Clone)]
pub struct RecoverySweepConfig {
    pub profile: SizeProfile,
    pub r: usize,
    pub n: usize,
    pub noise_levels: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl RecoverySweepConfig {
    /// The benchmark grid: n = 1024, 20 trials, a ∈ {1/32, 1/16, 1/8, 1/4}.
    pub fn benchmark(profile: SizeProfile, r: usize, seed: u64) -> Self {
        RecoverySweepConfig {
            profile,
            r,
            n: 1024,
            noise_levels: vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0],
            trials: 20,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryRow {
    pub profile: SizeProfile,
    pub r: usize,
    pub noise_a: f64,
    pub mean_score: f64,
    pub std: f64,
}

/// Mean/std of the rotation-recovery cosine score per noise level; trials
/// run in parallel with per-trial derived seeds, rows in grid order.
pub fn recovery_sweep(cfg: &RecoverySweepConfig) -> Result<Vec<RecoveryRow>> {
    if cfg.trials == 0 {
        return Err(SsrError::validation(
            "recovery sweep needs at least one trial",
        ));
    }
    if cfg.noise_levels.is_empty() {
        return Err(SsrError::validation(
            "recovery sweep needs at least one noise level",
        ));
    }
    // The synthetic inputs are orthonormal only up to the injected noise, so
    // the solver runs with the orthonormality gate open.
    let opts = NscrtOptions::tolerant();
    let mut rows = Vec::with_capacity(cfg.noise_levels.len());
    for (li, &noise_a) in cfg.noise_levels.iter().enumerate() {
        let scores: Result<Vec<f64>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let salt = (li as u64) << 32 | t as u64;
                let spec = RecoverySpec {
                    r: cfg.r,
                    n: cfg.n,
                    profile: cfg.profile,
                    noise_a,
                    seed: derive_seed(cfg.seed, salt),
                };
                let inst = gen_recovery_instance(&spec)?;
                let codes = nscrt(&inst.x, &opts)?;
                rotation_recovery_score(&codes.rotation, &inst.r_true)
            })
            .collect();
        let scores = scores?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / scores.len() as f64;
        rows.push(RecoveryRow {
            profile: cfg.profile,
            r: cfg.r,
            noise_a,
            mean_score: mean,
            std: var.sqrt(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct RhoSweepConfig {
    /// Triangle side lengths, one sweep point each.
    pub separations: Vec<f64>,
    pub trials: usize,
    pub points_per_class: usize,
    pub knn_k: usize,
    pub seed: u64,
}

impl Default for RhoSweepConfig {
    fn default() -> Self {
        let lo = 1.5;
        let hi = 8.0;
        let steps = 10;
        let separations = (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect();
        RhoSweepConfig {
            separations,
            trials: 50,
            points_per_class: 50,
            knn_k: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RhoSweepRow {
    pub separation: f64,
    pub rho: f64,
    pub mean_sparsity: f64,
    pub scut_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct RhoSweepResult {
    pub rows: Vec<RhoSweepRow>,
    pub spearman_rho_accuracy: f64,
    pub spearman_sparsity_accuracy: f64,
}

/// Sweeps three-Gaussian separation: per point, averages ρ, the mean column
/// sparsity of the codes, and Scut accuracy over seeded trials, then
/// correlates the per-point curves.
pub fn rho_sweep(cfg: &RhoSweepConfig) -> Result<RhoSweepResult> {
    if cfg.separations.len() < 2 {
        return Err(SsrError::validation(
            "rho sweep needs at least two separation points",
        ));
    }
    if cfg.trials == 0 {
        return Err(SsrError::validation("rho sweep needs at least one trial"));
    }
    let mut rows = Vec::with_capacity(cfg.separations.len());
    for (pi, &side) in cfg.separations.iter().enumerate() {
        let trials: Result<Vec<(f64, f64, f64)>> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let salt = (pi as u64) << 32 | t as u64;
                rho_trial(cfg, side, derive_seed(cfg.seed, salt))
            })
            .collect();
        let trials = trials?;
        let m = trials.len() as f64;
        rows.push(RhoSweepRow {
            separation: side,
            rho: trials.iter().map(|v| v.0).sum::<f64>() / m,
            mean_sparsity: trials.iter().map(|v| v.1).sum::<f64>() / m,
            scut_accuracy: trials.iter().map(|v| v.2).sum::<f64>() / m,
        });
    }

    let rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    let sparsities: Vec<f64> = rows.iter().map(|r| r.mean_sparsity).collect();
    let accuracies: Vec<f64> = rows.iter().map(|r| r.scut_accuracy).collect();
    Ok(RhoSweepResult {
        spearman_rho_accuracy: spearman(&rhos, &accuracies)?,
        spearman_sparsity_accuracy: spearman(&sparsities, &accuracies)?,
        rows,
    })
}

fn rho_trial(cfg: &RhoSweepConfig, side: f64, seed: u64) -> Result<(f64, f64, f64)> {
    let h = side * 3f64.sqrt() / 2.0;
    let spec = GaussianMixtureSpec {
        components: vec![
            GaussianComponent {
                center: vec![0.0, 0.0],
                scale: 1.0,
                count: cfg.points_per_class,
            },
            GaussianComponent {
                center: vec![side, 0.0],
                scale: 1.0,
                count: cfg.points_per_class,
            },
            GaussianComponent {
                center: vec![side / 2.0, h],
                scale: 1.0,
                count: cfg.points_per_class,
            },
        ],
        seed,
    };
    let (data, truth) = gen_gaussian_mixture(&spec)?;
    let w = build_knn_similarity(&data, cfg.knn_k)?;
    let report = rho(&laplacian(&w), 3)?;
    let res = ssrk(&w, 3, None)?;
    let labels = scut(&res.codes);
    let acc = accuracy(&labels, &truth)?;
    // When the draw produces more graph components than r, samples in the
    // unrepresented components get exactly-zero codes; average the sparsity
    // over the informative columns only.
    let h = &res.codes.h;
    let mut total = 0.0;
    let mut counted = 0usize;
    for j in 0..h.cols() {
        let col = h.col(j);
        if col.iter().any(|&v| v != 0.0) {
            total += sparsity(&col)?;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(SsrError::numeric("all code columns are zero"));
    }
    Ok((report.rho, total / counted as f64, acc))
}

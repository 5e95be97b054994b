//! Minimal end-to-end run: preset data → kNN graph → sparse codes → Scut.

use ssr_core::cluster::scut;
use ssr_core::data::Preset;
use ssr_core::eval::accuracy;
use ssr_core::graph::build_knn_similarity;
use ssr_core::ssr::ssrk;

fn main() -> ssr_core::Result<()> {
    let (data, truth) = Preset::G1.generate(7);
    let w = build_knn_similarity(&data, 4)?;
    let result = ssrk(&w, 3, None)?; // r = 3, lambda = 0.6/sqrt(n)
    let labels = scut(&result.codes);
    assert_eq!(accuracy(&labels, &truth)?, 1.0);
    println!(
        "clustered {} samples in {} iterations (accuracy 1.0)",
        labels.n(),
        result.codes.iterations
    );
    Ok(())
}

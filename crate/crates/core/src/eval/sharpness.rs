use crate::model::AcousticScores;

/// Average over frames of the accumulated top-`k` posterior mass, for
/// `k = 1..=max_k`. Non-decreasing in `k` and at most 1.
pub fn posterior_sharpness(am: &AcousticScores, max_k: usize) -> Vec<f64> {
    corpus_sharpness(std::slice::from_ref(am), max_k)
}

/// Same as [`posterior_sharpness`], pooled over every frame of every utterance.
pub fn corpus_sharpness(ams: &[AcousticScores], max_k: usize) -> Vec<f64> {
    let mut totals = vec![0.0; max_k];
    let mut frames = 0usize;
    for am in ams {
        for t in 0..am.num_frames() {
            let mut row = am.frame(t).to_vec();
            row.sort_by(|a, b| b.total_cmp(a));
            let mut acc = 0.0;
            for (k, total) in totals.iter_mut().enumerate() {
                acc += row.get(k).copied().unwrap_or(0.0);
                *total += acc.min(1.0);
            }
            frames += 1;
        }
    }
    totals.into_iter().map(|v| v / frames.max(1) as f64).collect()
}

//! Two-stage acoustic/LM scale tuning.
//!
//! Stage 1 tunes `β` with `α = 1`. Stage 2 keeps the ratio `β/α` fixed and
//! scales both by `γ`. In Viterbi mode the MAP decision is invariant to joint
//! scaling, so stage 2 is skipped and `γ = 1`. Ties among equal WERs prefer
//! the smaller `β` in stage 1 and the smaller `γ` in stage 2.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::corpus::{decode_corpus, Utterance};
use crate::model::{Models, ScaleConfig};
use crate::search::BeamConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneGrids {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for TuneGrids {
    fn default() -> Self {
        Self {
            beta: (2..=8).map(|i| f64::from(2 * i)).collect(),
            gamma: (5..=15).map(|i| f64::from(i) / 10.0).collect(),
        }
    }
}

impl TuneGrids {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_empty() || self.gamma.is_empty() {
            return Err(Error::Config("tuning grids must be non-empty".into()));
        }
        if self.beta.iter().chain(&self.gamma).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("tuning grid values must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub scales: ScaleConfig,
    /// `None` when the point could not be evaluated.
    pub wer: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuneResult {
    pub stage1: Vec<GridPoint>,
    pub stage2: Vec<GridPoint>,
    pub gamma: f64,
    pub chosen: ScaleConfig,
    pub chosen_wer: f64,
}

impl TuneResult {
    /// `alpha,beta,wer` for every evaluated point, stage 1 first.
    pub fn to_csv(&self) -> String {
        grid_csv(self.stage1.iter().chain(&self.stage2))
    }
}

pub fn grid_csv<'a>(points: impl IntoIterator<Item = &'a GridPoint>) -> String {
    let mut out = String::from("alpha,beta,wer\n");
    for p in points {
        let wer = p.wer.map_or_else(|| "NA".to_string(), |w| format!("{w:.6}"));
        out.push_str(&format!("{},{},{wer}\n", p.scales.acoustic, p.scales.lm));
    }
    out
}

fn evaluate<F>(objective: &F, scales: Vec<ScaleConfig>) -> Vec<GridPoint>
where
    F: Fn(ScaleConfig) -> Option<f64> + Sync,
{
    scales
        .into_par_iter()
        .map(|s| GridPoint {
            scales: s,
            wer: objective(s),
        })
        .collect()
}

/// Lowest WER; ties resolved by `tie_key` (smaller wins), then grid order.
fn argmin(points: &[GridPoint], tie_key: impl Fn(&GridPoint) -> [f64; 3]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        let Some(w) = p.wer else { continue };
        best = match best {
            None => Some(i),
            Some(b) => {
                let bw = points[b].wer.unwrap_or(f64::INFINITY);
                let better = w < bw
                    || (w == bw && tie_key(p).partial_cmp(&tie_key(&points[b])) == Some(std::cmp::Ordering::Less));
                if better {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Runs the two-stage procedure against an arbitrary WER objective.
pub fn two_stage<F>(objective: F, grids: &TuneGrids, joint_scaling: bool) -> Result<TuneResult>
where
    F: Fn(ScaleConfig) -> Option<f64> + Sync,
{
    grids.validate()?;
    let stage1 = evaluate(&objective, grids.beta.iter().map(|&b| ScaleConfig { acoustic: 1.0, lm: b }).collect());
    let b1 = argmin(&stage1, |p| [p.scales.lm, 0.0, 0.0])
        .ok_or_else(|| Error::Data("no stage-1 grid point could be evaluated".into()))?;
    let base = stage1[b1].scales;
    if !joint_scaling {
        return Ok(TuneResult {
            chosen_wer: stage1[b1].wer.unwrap_or(f64::NAN),
            stage1,
            stage2: Vec::new(),
            gamma: 1.0,
            chosen: base,
        });
    }
    let stage2 = evaluate(&objective, grids.gamma.iter().map(|&g| base.scaled(g)).collect());
    match argmin(&stage2, |p| [p.scales.acoustic, 0.0, 0.0]) {
        Some(b2) => Ok(TuneResult {
            gamma: stage2[b2].scales.acoustic,
            chosen: stage2[b2].scales,
            chosen_wer: stage2[b2].wer.unwrap_or(f64::NAN),
            stage1,
            stage2,
        }),
        None => Err(Error::Data("no stage-2 grid point could be evaluated".into())),
    }
}

/// Every `(γ, γ·β)` for `γ` in the gamma grid and `β` in the beta grid: the
/// point lattice both stages draw from.
pub fn grid_2d<F>(objective: F, grids: &TuneGrids) -> Result<Vec<GridPoint>>
where
    F: Fn(ScaleConfig) -> Option<f64> + Sync,
{
    grids.validate()?;
    let mut scales = Vec::new();
    for &g in &grids.gamma {
        for &b in &grids.beta {
            scales.push(ScaleConfig { acoustic: g, lm: g * b });
        }
    }
    Ok(evaluate(&objective, scales))
}

/// Best point of a 2-D grid; ties toward `α` nearest 1, then smaller `α`,
/// then smaller `β`.
pub fn grid_optimum(points: &[GridPoint]) -> Option<GridPoint> {
    argmin(points, |p| closest_to_unscaled(p.scales.acoustic, p.scales.lm)).map(|i| points[i])
}

fn closest_to_unscaled(alpha: f64, beta: f64) -> [f64; 3] {
    [(alpha - 1.0).abs(), alpha, beta]
}

/// Dev-set WER objective for one decoder setup. Any failed utterance makes
/// the point invalid.
pub fn dev_objective<'a>(
    models: &'a Models,
    dev: &'a [Utterance],
    mode: &'a str,
    decision: &'a str,
    beam: BeamConfig,
) -> impl Fn(ScaleConfig) -> Option<f64> + Sync + 'a {
    let decisions = vec![decision.to_string()];
    move |scales| {
        let run = decode_corpus(models, dev, mode, scales, beam, &decisions, 1).ok()?;
        (run.failures() == 0).then(|| run.report(0, dev).wer)
    }
}

pub fn tune_scales(
    models: &Models,
    dev: &[Utterance],
    mode: &str,
    decision: &str,
    beam: BeamConfig,
    grids: &TuneGrids,
) -> Result<TuneResult> {
    if dev.is_empty() {
        return Err(Error::Config("tuning needs a non-empty dev set".into()));
    }
    two_stage(dev_objective(models, dev, mode, decision, beam), grids, mode != "viterbi")
}

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::score::Score;

const NORM_TOL: f64 = 1e-9;
/// Files store decimals; rows within this of 1 are renormalized on load.
const FILE_NORM_TOL: f64 = 1e-6;

/// Per-frame state posteriors `p(s|x_t)` and state priors `p(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AcousticScores {
    num_frames: usize,
    num_states: usize,
    posterior: Vec<f64>,
    prior: Vec<f64>,
}

impl AcousticScores {
    /// Validates shapes and normalization (rows and priors sum to 1 within 1e-9).
    pub fn new(posterior: Vec<Vec<f64>>, prior: Vec<f64>) -> Result<Self> {
        let num_frames = posterior.len();
        let num_states = prior.len();
        if num_frames == 0 || num_states == 0 {
            return Err(Error::Data("acoustic scores need at least one frame and one state".into()));
        }
        for (t, row) in posterior.iter().enumerate() {
            if row.len() != num_states {
                return Err(Error::Data(format!(
                    "frame {t} has {} posteriors, expected {num_states}",
                    row.len()
                )));
            }
            check_distribution(row, &format!("posterior of frame {t}"), false)?;
        }
        check_distribution(&prior, "state prior", true)?;
        Ok(Self {
            num_frames,
            num_states,
            posterior: posterior.into_iter().flatten().collect(),
            prior,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn posterior(&self, t: usize, s: usize) -> f64 {
        self.posterior[t * self.num_states + s]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.posterior[t * self.num_states..(t + 1) * self.num_states]
    }

    pub fn prior(&self, s: usize) -> f64 {
        self.prior[s]
    }

    pub fn priors(&self) -> &[f64] {
        &self.prior
    }

    /// Scaled-likelihood score `α · (-ln p(s|x_t) + ln p(s))`.
    ///
    /// Can be negative: the ratio is a likelihood, not a probability.
    pub fn emission_score(&self, t: usize, s: usize, acoustic_scale: f64) -> Score {
        let post = self.posterior(t, s);
        if post <= 0.0 {
            return Score::INFINITY;
        }
        Score(acoustic_scale * (-post.ln() + self.prior[s].ln()))
    }

    /// Dense `T × S` emission matrix at the given acoustic scale.
    pub fn emission_matrix(&self, acoustic_scale: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.posterior.len());
        for t in 0..self.num_frames {
            for s in 0..self.num_states {
                out.push(self.emission_score(t, s, acoustic_scale).value());
            }
        }
        out
    }

    /// Parses the text format: header `T S`, `T` posterior rows, one prior row.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty acoustic score file"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|tok| tok.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(origin, hline + 1, format!("bad header: {e}")))?;
        let [frames, states] = dims[..] else {
            return Err(Error::parse(origin, hline + 1, "header must be `T S`"));
        };
        let mut rows = Vec::with_capacity(frames + 1);
        for (lno, line) in lines {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(origin, lno + 1, format!("bad number: {e}")))?;
            if row.len() != states {
                return Err(Error::parse(
                    origin,
                    lno + 1,
                    format!("expected {states} values, found {}", row.len()),
                ));
            }
            rows.push(row);
        }
        if rows.len() != frames + 1 {
            return Err(Error::parse(
                origin,
                0,
                format!("expected {} posterior rows plus a prior row, found {} rows", frames, rows.len()),
            ));
        }
        let mut prior = rows.pop().unwrap_or_default();
        for (t, row) in rows.iter_mut().enumerate() {
            renormalize(row, &format!("posterior of frame {t}"))?;
        }
        renormalize(&mut prior, "state prior")?;
        Self::new(rows, prior)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }

    /// Text serialization using shortest round-trip decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.num_frames, self.num_states);
        for t in 0..self.num_frames {
            push_row(&mut out, self.frame(t));
        }
        push_row(&mut out, &self.prior);
        out
    }
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
    }
    out.push('\n');
}

fn check_distribution(values: &[f64], what: &str, strictly_positive: bool) -> Result<()> {
    for &v in values {
        if !v.is_finite() || v < 0.0 || (strictly_positive && v <= 0.0) {
            return Err(Error::Data(format!("{what} contains invalid probability {v}")));
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::Data(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn renormalize(values: &mut [f64], what: &str) -> Result<()> {
    let sum: f64 = values.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > FILE_NORM_TOL {
        return Err(Error::Data(format!("{what} sums to {sum}, expected 1")));
    }
    if (sum - 1.0).abs() > NORM_TOL {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

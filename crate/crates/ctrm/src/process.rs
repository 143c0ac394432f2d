//! Path construction for the renewal maxima processes and the rescaled
//! samples of the scaling-limit theorem.
//!
//! With arrival sums S(n) and running maxima M(n), the renewal count is
//! N(t) = max{n : S(n) <= t}; the value processes are V(t) = M(N(t)) and
//! U(t) = M(N(t) + 1) with the empty-max convention M(0) = -inf.

use rand::Rng;
use thiserror::Error;

use crate::model::{scaling, ModelError, ModelSpec};
use crate::rng::sample_pair;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("waiting times must be positive, got {0} at index {1}")]
    NonPositiveWait(f64, usize),
    #[error("path exhausted: needs S(n) beyond {needed}, path ends at {have}")]
    PathExhausted { needed: f64, have: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which of the two value processes to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Which {
    #[serde(rename = "ctrm")]
    Ctrm,
    #[serde(rename = "octrm")]
    Octrm,
}

impl std::fmt::Display for Which {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Which::Ctrm => "ctrm",
            Which::Octrm => "octrm",
        })
    }
}

/// One realized sequence of (W_i, J_i) with prefix sums and prefix maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRealization {
    pub waits: Vec<f64>,
    pub jumps: Vec<f64>,
    pub cum_sums: Vec<f64>,
    pub run_max: Vec<f64>,
}

impl PathRealization {
    pub fn len(&self) -> usize {
        self.waits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waits.is_empty()
    }
}

/// Build prefix sums S(n) and prefix maxima M(n) from raw pairs.
pub fn build_path(pairs: &[(f64, f64)]) -> Result<PathRealization, ProcessError> {
    let mut waits = Vec::with_capacity(pairs.len());
    let mut jumps = Vec::with_capacity(pairs.len());
    let mut cum_sums = Vec::with_capacity(pairs.len());
    let mut run_max = Vec::with_capacity(pairs.len());
    let mut s = 0.0;
    let mut m = f64::NEG_INFINITY;
    for (i, &(w, j)) in pairs.iter().enumerate() {
        if !(w > 0.0) {
            return Err(ProcessError::NonPositiveWait(w, i));
        }
        s += w;
        m = m.max(j);
        waits.push(w);
        jumps.push(j);
        cum_sums.push(s);
        run_max.push(m);
    }
    Ok(PathRealization {
        waits,
        jumps,
        cum_sums,
        run_max,
    })
}

/// N(t) = max{n >= 0 : S(n) <= t}, by binary search. Errors when t lies
/// strictly beyond the last recorded arrival, where N(t) is unknowable.
pub fn renewal_count(path: &PathRealization, t: f64) -> Result<usize, ProcessError> {
    let last = path.cum_sums.last().copied().unwrap_or(0.0);
    if path.is_empty() || t > last {
        return Err(ProcessError::PathExhausted { needed: t, have: last });
    }
    Ok(path.cum_sums.partition_point(|&s| s <= t))
}

/// V(t) = M(N(t)), with M(0) = -inf before the first renewal.
pub fn ctrm_value(path: &PathRealization, t: f64) -> Result<f64, ProcessError> {
    let n = renewal_count(path, t)?;
    Ok(if n == 0 {
        f64::NEG_INFINITY
    } else {
        path.run_max[n - 1]
    })
}

/// U(t) = M(N(t) + 1); needs the path to extend one renewal past N(t).
pub fn octrm_value(path: &PathRealization, t: f64) -> Result<f64, ProcessError> {
    let n = renewal_count(path, t)?;
    if n >= path.len() {
        return Err(ProcessError::PathExhausted {
            needed: t,
            have: path.cum_sums[n - 1],
        });
    }
    Ok(path.run_max[n])
}

/// One rescaled sample b-tilde(c) * V(ct) (or the OCTRM analogue) of the
/// scaling-limit theorem, simulating pairs lazily until the arrival sum
/// passes the horizon ct. The path never needs to be stored: only the
/// running maximum before the horizon and the straddling jump matter.
pub fn rescaled_sample<R: Rng + ?Sized>(
    model: &ModelSpec,
    c: f64,
    t: f64,
    which: Which,
    rng: &mut R,
) -> Result<f64, ProcessError> {
    let b_tilde = match model {
        // pre-limit oracle model: no rescaling, report raw values
        ModelSpec::ExponentialIndependent { .. } => 1.0,
        _ => scaling(model)?.b_tilde(c),
    };
    let horizon = c * t;
    let mut s = 0.0;
    let mut vmax = f64::NEG_INFINITY;
    loop {
        let (w, j) = sample_pair(model, rng);
        if s + w <= horizon {
            s += w;
            vmax = vmax.max(j);
        } else {
            return Ok(match which {
                Which::Ctrm => b_tilde * vmax,
                Which::Octrm => b_tilde * vmax.max(j),
            });
        }
    }
}

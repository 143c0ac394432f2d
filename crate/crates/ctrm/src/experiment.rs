//! Monte-Carlo convergence experiments: rescaled samples against limit CDFs,
//! KS distances, and paired CTRM/OCTRM comparisons.
//!
//! Sampling is split into fixed-size chunks, each driven by its own RNG
//! stream keyed only by the chunk index. With the `parallel` feature the
//! chunks fan out over a rayon pool; either way the concatenated output is
//! byte-identical for a given seed, independent of worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::limits::{
    coupled_ctrm_cdf, coupled_octrm_cdf, uncoupled_cdf, LimitsError, UncoupledMethod,
};
use crate::model::{ModelError, ModelSpec};
use crate::process::{rescaled_sample, ProcessError, Which};
use crate::rng::SeededStream;

/// Samples per RNG stream. Fixed so that the stream layout (and hence the
/// output) does not depend on how many workers run.
const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
    #[error("model {0} has no limit CDF to converge to")]
    NoLimit(&'static str),
}

/// Sorted samples with ECDF evaluation and KS support. Samples at -inf
/// (empty running maxima) sort first and count as <= every x.
#[derive(Debug, Clone)]
pub struct EcdfTable {
    sorted: Vec<f64>,
}

impl EcdfTable {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// Right-continuous ECDF: fraction of samples <= x.
pub fn ecdf_eval(table: &EcdfTable, x: f64) -> f64 {
    let k = table.sorted.partition_point(|&s| s <= x);
    k as f64 / table.n() as f64
}

/// Exact sup |ECDF - cdf| over the grid and over both one-sided limits at
/// every sample jump.
pub fn ks_distance(table: &EcdfTable, cdf: impl Fn(f64) -> f64, xs: &[f64]) -> f64 {
    let n = table.n() as f64;
    let mut d: f64 = 0.0;
    for &x in xs {
        d = d.max((ecdf_eval(table, x) - cdf(x)).abs());
    }
    let mut i = 0usize;
    let sorted = &table.sorted;
    while i < sorted.len() {
        let x = sorted[i];
        // advance over ties so ECDF jumps are handled once per value
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let c = cdf(x);
        d = d.max((i as f64 / n - c).abs());
        d = d.max((j as f64 / n - c).abs());
        i = j;
    }
    d
}

fn chunk_layout(n: usize) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    let mut remaining = n;
    let mut idx = 0u64;
    while remaining > 0 {
        let len = remaining.min(CHUNK);
        out.push((idx, len));
        remaining -= len;
        idx += 1;
    }
    out
}

fn sample_chunk(
    model: &ModelSpec,
    c: f64,
    t: f64,
    which: Which,
    seed: u64,
    stream: u64,
    len: usize,
) -> Result<Vec<f64>, ProcessError> {
    let mut rng = SeededStream::new(seed, stream).rng();
    (0..len)
        .map(|_| rescaled_sample(model, c, t, which, &mut rng))
        .collect()
}

/// Draw `n` rescaled samples deterministically; parallel over chunks when the
/// `parallel` feature is enabled.
pub fn sample_rescaled_many(
    model: &ModelSpec,
    c: f64,
    t: f64,
    which: Which,
    seed: u64,
    n: usize,
) -> Result<Vec<f64>, ProcessError> {
    #[cfg(feature = "parallel")]
    {
        let chunks: Result<Vec<Vec<f64>>, ProcessError> = chunk_layout(n)
            .into_par_iter()
            .map(|(stream, len)| sample_chunk(model, c, t, which, seed, stream, len))
            .collect();
        Ok(chunks?.into_iter().flatten().collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        sample_rescaled_many_seq(model, c, t, which, seed, n)
    }
}

/// Single-threaded reference implementation with the identical stream layout
/// (and therefore identical output) as the parallel path.
pub fn sample_rescaled_many_seq(
    model: &ModelSpec,
    c: f64,
    t: f64,
    which: Which,
    seed: u64,
    n: usize,
) -> Result<Vec<f64>, ProcessError> {
    let mut out = Vec::with_capacity(n);
    for (stream, len) in chunk_layout(n) {
        out.extend(sample_chunk(model, c, t, which, seed, stream, len)?);
    }
    Ok(out)
}

/// Limit CDF of `model`/`which` at time `t` as a closure in x, with x <= 0
/// mapped to 0 so that -inf samples evaluate cleanly.
pub fn limit_cdf_fn(
    model: &ModelSpec,
    which: Which,
    t: f64,
) -> Result<impl Fn(f64) -> f64 + Sync, ExperimentError> {
    enum Kind {
        Coupled { beta: f64, gamma: f64 },
        Uncoupled { beta: f64, alpha: f64 },
    }
    let kind = match model {
        ModelSpec::CoupledProductFrechet { beta, gamma } => Kind::Coupled {
            beta: beta.get(),
            gamma: gamma.get(),
        },
        ModelSpec::IndependentStableFrechet { beta, alpha } => Kind::Uncoupled {
            beta: beta.get(),
            alpha: alpha.get(),
        },
        ModelSpec::ExponentialIndependent { .. } => {
            return Err(ExperimentError::NoLimit(model.name()))
        }
    };
    Ok(move |x: f64| {
        if !(x > 0.0) {
            return 0.0;
        }
        match kind {
            Kind::Coupled { beta, gamma } => match which {
                Which::Ctrm => coupled_ctrm_cdf(beta, gamma, t, x).unwrap_or(f64::NAN),
                Which::Octrm => coupled_octrm_cdf(beta, gamma, t, x).unwrap_or(f64::NAN),
            },
            Kind::Uncoupled { beta, alpha } => {
                uncoupled_cdf(beta, alpha, t, x, UncoupledMethod::Series).unwrap_or(f64::NAN)
            }
        }
    })
}

/// Grid of `count` quantile points of a continuous CDF, found by bisection.
pub fn quantile_grid(cdf: impl Fn(f64) -> f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| {
            let p = i as f64 / (count + 1) as f64;
            let (mut lo, mut hi) = (1e-9f64, 1e9f64);
            for _ in 0..200 {
                let mid = (lo * hi).sqrt(); // log-scale bisection, both > 0
                if cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo * hi).sqrt()
        })
        .collect()
}

/// One scale in a convergence study.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ConvergenceRow {
    pub c: f64,
    pub n_samples: usize,
    pub ks: f64,
    pub mc_se: f64,
}

/// Empirical check of the scaling-limit theorem: KS distance between the
/// rescaled-sample ECDF and the limit CDF, for each scale c.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub which: Which,
    pub t: f64,
    pub seed: u64,
    pub rows: Vec<ConvergenceRow>,
}

pub fn run_convergence(
    model: &ModelSpec,
    which: Which,
    t: f64,
    cs: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<ConvergenceReport, ExperimentError> {
    let cdf = limit_cdf_fn(model, which, t)?;
    let grid = quantile_grid(&cdf, 512);
    let mut rows = Vec::with_capacity(cs.len());
    for &c in cs {
        let samples = sample_rescaled_many(model, c, t, which, seed, n_samples)?;
        let table = EcdfTable::new(samples);
        let ks = ks_distance(&table, &cdf, &grid);
        rows.push(ConvergenceRow {
            c,
            n_samples,
            ks,
            mc_se: 0.5 / (n_samples as f64).sqrt(),
        });
    }
    Ok(ConvergenceReport {
        model: model.name().to_string(),
        which,
        t,
        seed,
        rows,
    })
}

/// Same-seed paired CTRM/OCTRM comparison: sup over sample points of
/// |ECDF_V - ECDF_U| and the location where it is attained.
pub fn compare_ctrm_octrm(
    model: &ModelSpec,
    t: f64,
    c: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64), ExperimentError> {
    let v = sample_rescaled_many(model, c, t, Which::Ctrm, seed, n_samples)?;
    let u = sample_rescaled_many(model, c, t, Which::Octrm, seed, n_samples)?;
    let tv = EcdfTable::new(v);
    let tu = EcdfTable::new(u);
    let mut max_gap = 0.0f64;
    let mut location = f64::NAN;
    for &x in tv.sorted().iter().chain(tu.sorted().iter()) {
        if !x.is_finite() {
            continue;
        }
        let gap = (ecdf_eval(&tv, x) - ecdf_eval(&tu, x)).abs();
        if gap > max_gap {
            max_gap = gap;
            location = x;
        }
    }
    Ok((max_gap, location))
}

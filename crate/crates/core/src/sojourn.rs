//! Sojourn bookkeeping and state-wise conflation.
//!
//! Watching the additive component only while the chain sits in a fixed
//! state, with each excursion collapsed to a single jump, yields a Lévy
//! process whose triplet keeps the in-state drift and variance and whose
//! jump measure gains the excursion-increment law at rate `-q_jj`.

use crate::error::{Error, Result};
use crate::map::MapSpec;
use crate::path::{MarkKind, SamplePath};
use crate::rng::PathStreams;
use crate::simulate::ExcursionSampler;

/// Return times, exit times and sojourn intervals of a path in one state.
#[derive(Debug, Clone, Default)]
pub struct SojournDecomposition {
    /// tau^re_n: entry epochs into the state (tau^re_0 = 0 when the path
    /// starts there).
    pub returns: Vec<f64>,
    /// tau^ex_n: exit epochs, one per completed sojourn.
    pub exits: Vec<f64>,
    /// Half-open sojourn intervals `[start, end)`; the last may be
    /// truncated by the horizon.
    pub sojourns: Vec<(f64, f64)>,
}

/// Splits the time axis of `path` into the sojourns of `state` and the
/// bounding return/exit epochs. A state never visited yields an empty
/// decomposition.
pub fn sojourn_decomposition(path: &SamplePath, state: usize) -> Result<SojournDecomposition> {
    path.check_invariants()?;
    let mut out = SojournDecomposition::default();
    let mut inside = false;
    let mut start = 0.0;
    for k in 0..path.len() {
        let here = path.states[k] == state;
        if here && !inside {
            start = path.times[k];
            out.returns.push(start);
            inside = true;
        } else if !here && inside {
            let exit = path.times[k];
            out.exits.push(exit);
            out.sojourns.push((start, exit));
            inside = false;
        }
    }
    if inside {
        out.sojourns.push((start, path.horizon()));
    }
    Ok(out)
}

/// Conflates a one-dimensional path started in `state`: the grid is the
/// concatenation of the sojourn intervals, and each excursion collapses to
/// a single marked jump of size `X_{tau^re} - X_{tau^ex-}` (the exit-time
/// transition jump belongs to the excursion).
pub fn conflate_path(path: &SamplePath, state: usize) -> Result<SamplePath> {
    path.require_dim(1, "conflate_path")?;
    if path.states[0] != state {
        return Err(Error::Structural(format!(
            "conflation is defined under the law started in state {state}, path starts in {}",
            path.states[0]
        )));
    }
    let n = path.len();
    let mut times = vec![0.0];
    let mut values = vec![path.values[0][0]];
    let mut jumps = vec![0.0];
    let mut marks = vec![MarkKind::None];
    let mut shift = 0.0; // cumulative excursion time removed so far
    let mut inside = true;
    let mut exit_epoch = 0.0;
    let mut excursion_base = 0.0; // X_{tau^ex-}
    for k in 1..n {
        let here = path.states[k] == state;
        if inside {
            if here {
                times.push(path.times[k] - shift);
                values.push(path.values[0][k]);
                jumps.push(path.jumps[0][k]);
                marks.push(path.marks[k]);
            } else {
                exit_epoch = path.times[k];
                excursion_base = path.pre_value(0, k);
                inside = false;
            }
        } else if here {
            // returned: the whole excursion becomes one jump placed at the
            // conflated exit instant; exactly zero increments collapse to
            // no jump at all (Lévy measures exclude the origin)
            shift += path.times[k] - exit_epoch;
            let v = path.values[0][k];
            let jump = v - excursion_base;
            times.push(path.times[k] - shift);
            values.push(v);
            jumps.push(jump);
            marks.push(if jump == 0.0 { MarkKind::None } else { MarkKind::Excursion });
            inside = true;
        }
    }
    if !inside {
        // the path ended mid-excursion: the conflated clock stops at the
        // last exit, with the pre-exit value as terminal point
        times.push(exit_epoch - shift);
        values.push(excursion_base);
        jumps.push(0.0);
        marks.push(MarkKind::None);
    }
    Ok(SamplePath {
        dim: 1,
        states: vec![state; times.len()],
        values: vec![values],
        jumps: vec![jumps],
        marks,
        diffusion_cov: path.diffusion_cov.clone(),
        times,
    })
}

/// Characteristic triplet of the conflated process in one state, with the
/// excursion-increment law realized as an empirical sample: drift and
/// Brownian variance are copied from the specification, the jump part is
/// the in-state compound Poisson plus excursion jumps at rate `-q_jj`.
#[derive(Debug, Clone)]
pub struct ConflatedTriplet {
    pub drift: f64,
    pub variance: f64,
    pub levy_rate: f64,
    /// Excursion jump rate `-q_jj` (zero for a single-state chain).
    pub excursion_rate: f64,
    /// Nonzero excursion increments (Lévy measures carry no mass at 0;
    /// exact zeros are dropped and accounted for in `zero_fraction`).
    pub excursion_samples: Vec<f64>,
    pub zero_fraction: f64,
    /// Mean and standard error of the excursion increment including zeros,
    /// for drift diagnostics of the conflated process.
    pub excursion_mean: f64,
    pub excursion_mean_se: f64,
}

impl ConflatedTriplet {
    /// E[X̂_1] = drift + rate E[jump] + (-q_jj) E[excursion increment];
    /// `None` when the in-state jump law has no mean.
    pub fn mean(&self, jump_mean: Option<f64>) -> Option<f64> {
        let jm = if self.levy_rate > 0.0 { jump_mean? } else { 0.0 };
        Some(self.drift + self.levy_rate * jm + self.excursion_rate * self.excursion_mean)
    }
}

/// Estimates the conflated triplet of a one-dimensional MAP in `state`
/// from `samples` independent excursions. At least 100 excursions are
/// required for the empirical jump law to be meaningful.
pub fn conflated_triplet(
    spec: &MapSpec,
    state: usize,
    samples: usize,
    micro_step: f64,
    seed: u64,
) -> Result<ConflatedTriplet> {
    spec.validate()?;
    if spec.dim != 1 {
        return Err(Error::Structural(
            "conflated_triplet expects a one-dimensional component".into(),
        ));
    }
    if state >= spec.num_states() {
        return Err(Error::parameter("state", "out of range"));
    }
    let comp = &spec.per_state[state];
    let mut triplet = ConflatedTriplet {
        drift: comp.drift[0],
        variance: comp.cov[0],
        levy_rate: comp.jump_rate,
        excursion_rate: -spec.chain.rate(state, state),
        excursion_samples: Vec::new(),
        zero_fraction: 0.0,
        excursion_mean: 0.0,
        excursion_mean_se: 0.0,
    };
    if spec.num_states() == 1 {
        return Ok(triplet);
    }
    if samples < 100 {
        return Err(Error::parameter("samples", "at least 100 excursions required"));
    }
    let sampler = ExcursionSampler::new(spec, state, micro_step)?;
    let mut zeros = 0usize;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for i in 0..samples {
        let mut streams = PathStreams::new(seed, i as u64);
        let e = sampler.sample(&mut streams);
        let inc = e.increment[0];
        sum += inc;
        sumsq += inc * inc;
        if inc == 0.0 {
            zeros += 1;
        } else {
            triplet.excursion_samples.push(inc);
        }
    }
    let n = samples as f64;
    triplet.zero_fraction = zeros as f64 / n;
    triplet.excursion_mean = sum / n;
    let var = (sumsq / n - triplet.excursion_mean * triplet.excursion_mean).max(0.0);
    triplet.excursion_mean_se = (var / n).sqrt();
    Ok(triplet)
}

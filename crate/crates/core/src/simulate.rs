//! Event-driven simulation of Markov additive processes.
//!
//! The chain is simulated exactly (exponential holding times, embedded
//! transition probabilities), compound-Poisson epochs are simulated exactly
//! within each sojourn, and Brownian-plus-drift increments between
//! consecutive grid points are exact Gaussians. Chain-induced jumps are
//! drawn at each transition. Lévy and chain jumps never coincide: their
//! clocks are independent exponentials, so simultaneity has probability
//! zero and the construction keeps the epochs distinct.

use crate::chain::chain_jump_epochs;
use crate::error::{Error, Result};
use crate::map::MapSpec;
use crate::path::{MarkKind, SamplePath};
use crate::rng::PathStreams;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::ops::ControlFlow;

/// One simulation event handed to a consumer, in grid order.
#[derive(Debug, Clone, Copy)]
pub enum Step {
    /// Continuous evolution over `(t0, t1]` in `state`; `dx` is the exact
    /// drift-plus-Gaussian increment.
    Micro { t0: f64, t1: f64, state: usize, dx: [f64; 2] },
    /// Compound-Poisson jump at `t` while in `state`.
    Levy { t: f64, state: usize, dx: [f64; 2] },
    /// Chain transition at `t` with its induced jump.
    Chain { t: f64, from: usize, to: usize, dx: [f64; 2] },
}

impl Step {
    pub fn time(&self) -> f64 {
        match self {
            Step::Micro { t1, .. } => *t1,
            Step::Levy { t, .. } | Step::Chain { t, .. } => *t,
        }
    }
}

/// Drives one path of `spec` on `[0, horizon]` with micro step `h`,
/// pushing every grid event into `on_step`. Returns the initial state.
///
/// `h = f64::INFINITY` suppresses micro refinement entirely (event-exact
/// skeleton only), which is enough whenever no quadrature against the
/// continuous part is required.
pub fn drive<F>(
    spec: &MapSpec,
    horizon: f64,
    h: f64,
    streams: &mut PathStreams,
    mut on_step: F,
) -> Result<usize>
where
    F: FnMut(Step) -> ControlFlow<()>,
{
    if !(horizon > 0.0) {
        return Err(Error::parameter("horizon", "must be > 0"));
    }
    if !(h > 0.0) {
        return Err(Error::parameter("micro_step", "must be > 0"));
    }
    let initial = spec.chain.draw_initial(&mut streams.init);
    let chain_jumps = chain_jump_epochs(&spec.chain, initial, horizon, &mut streams.chain);

    let mut state = initial;
    let mut t = 0.0;
    let mut jump_iter = chain_jumps.into_iter().peekable();
    'outer: loop {
        let (sojourn_end, next_state) = match jump_iter.peek() {
            Some(&(epoch, s)) if epoch <= horizon => (epoch, Some(s)),
            _ => (horizon, None),
        };
        // compound-Poisson epochs within (t, sojourn_end)
        let comp = &spec.per_state[state];
        let mut levy_epochs = Vec::new();
        if comp.jump_rate > 0.0 {
            let mut s = t;
            loop {
                let u: f64 = streams.poisson.gen();
                s += -(1.0 - u).ln() / comp.jump_rate;
                if s >= sojourn_end {
                    break;
                }
                levy_epochs.push(s);
            }
        }
        // anchors: levy epochs then the sojourn end
        let chol = comp.cholesky();
        let has_noise = chol[0] != 0.0 || chol[2] != 0.0 || chol[3] != 0.0;
        let mut segment_start = t;
        for anchor_idx in 0..=levy_epochs.len() {
            let anchor = if anchor_idx < levy_epochs.len() {
                levy_epochs[anchor_idx]
            } else {
                sojourn_end
            };
            // micro refinement of (segment_start, anchor)
            let mut cursor = segment_start;
            loop {
                let mut next = cursor + h;
                let tol = 1e-9 * (1.0 + anchor.abs());
                if next >= anchor - tol {
                    next = anchor;
                }
                let dt = next - cursor;
                if dt <= 0.0 {
                    break;
                }
                let mut dx = [comp.drift[0] * dt, if spec.dim > 1 { comp.drift[1] * dt } else { 0.0 }];
                if has_noise {
                    let sq = dt.sqrt();
                    let z0: f64 = StandardNormal.sample(&mut streams.brownian);
                    if spec.dim == 1 {
                        dx[0] += chol[0] * sq * z0;
                    } else {
                        let z1: f64 = StandardNormal.sample(&mut streams.brownian);
                        dx[0] += chol[0] * sq * z0;
                        dx[1] += (chol[2] * z0 + chol[3] * z1) * sq;
                    }
                }
                if on_step(Step::Micro { t0: cursor, t1: next, state, dx }).is_break() {
                    return Ok(initial);
                }
                cursor = next;
                if cursor >= anchor {
                    break;
                }
            }
            if anchor_idx < levy_epochs.len() {
                let law = comp.jump_law.as_ref().expect("validated: rate > 0 implies law");
                let dx = law.sample_vec(&mut streams.jump_size);
                if on_step(Step::Levy { t: anchor, state, dx }).is_break() {
                    return Ok(initial);
                }
            }
            segment_start = anchor;
        }
        t = sojourn_end;
        match next_state {
            Some(to) => {
                jump_iter.next();
                let dx = match spec.transition_jumps.law(state, to) {
                    Some(law) => law.sample_vec(&mut streams.shock),
                    None => [0.0, 0.0],
                };
                if on_step(Step::Chain { t, from: state, to, dx }).is_break() {
                    return Ok(initial);
                }
                state = to;
            }
            None => break 'outer,
        }
    }
    Ok(initial)
}

/// Simulates one full trajectory on the event-anchored grid.
pub fn simulate_map_path(spec: &MapSpec, horizon: f64, h: f64, seed: u64) -> Result<SamplePath> {
    simulate_map_path_indexed(spec, horizon, h, seed, 0)
}

/// Same as [`simulate_map_path`] with an explicit path index for Monte
/// Carlo batches (path `i` of a run is reproducible in isolation).
pub fn simulate_map_path_indexed(
    spec: &MapSpec,
    horizon: f64,
    h: f64,
    seed: u64,
    path_index: u64,
) -> Result<SamplePath> {
    spec.validate()?;
    let mut streams = PathStreams::new(seed, path_index);
    let n_hint = (horizon / h.min(horizon)).min(4e6) as usize + 16;
    let mut times = Vec::with_capacity(n_hint);
    let mut states = Vec::with_capacity(n_hint);
    let mut vals: Vec<Vec<f64>> = (0..spec.dim).map(|_| Vec::with_capacity(n_hint)).collect();
    let mut jmps: Vec<Vec<f64>> = (0..spec.dim).map(|_| Vec::with_capacity(n_hint)).collect();
    let mut marks = Vec::with_capacity(n_hint);

    let mut cur = [0.0f64; 2];
    let dim = spec.dim;
    let initial = drive(spec, horizon, h, &mut streams, |step| {
        match step {
            Step::Micro { t1, state, dx, .. } => {
                for c in 0..dim {
                    cur[c] += dx[c];
                    vals[c].push(cur[c]);
                    jmps[c].push(0.0);
                }
                times.push(t1);
                states.push(state);
                marks.push(MarkKind::None);
            }
            Step::Levy { t, state, dx } => {
                // a micro segment ending exactly at the jump epoch shares
                // this grid point; the jump lands on top of it
                let merge = times.last() == Some(&t);
                for c in 0..dim {
                    cur[c] += dx[c];
                    if merge {
                        *vals[c].last_mut().unwrap() = cur[c];
                        *jmps[c].last_mut().unwrap() = dx[c];
                    } else {
                        vals[c].push(cur[c]);
                        jmps[c].push(dx[c]);
                    }
                }
                if merge {
                    *marks.last_mut().unwrap() = MarkKind::Levy;
                } else {
                    times.push(t);
                    states.push(state);
                    marks.push(MarkKind::Levy);
                }
            }
            Step::Chain { t, to, dx, .. } => {
                let merge = times.last() == Some(&t);
                for c in 0..dim {
                    cur[c] += dx[c];
                    if merge {
                        *vals[c].last_mut().unwrap() = cur[c];
                        *jmps[c].last_mut().unwrap() = dx[c];
                    } else {
                        vals[c].push(cur[c]);
                        jmps[c].push(dx[c]);
                    }
                }
                if merge {
                    *states.last_mut().unwrap() = to;
                    *marks.last_mut().unwrap() = MarkKind::Chain;
                } else {
                    times.push(t);
                    states.push(to);
                    marks.push(MarkKind::Chain);
                }
            }
        }
        ControlFlow::Continue(())
    })?;

    // prepend the origin
    times.insert(0, 0.0);
    states.insert(0, initial);
    marks.insert(0, MarkKind::None);
    for c in 0..dim {
        vals[c].insert(0, 0.0);
        jmps[c].insert(0, 0.0);
    }

    let diffusion_cov = spec
        .per_state
        .iter()
        .map(|comp| {
            if dim == 1 {
                [comp.cov[0], 0.0, 0.0, 0.0]
            } else {
                [comp.cov[0], comp.cov[1], comp.cov[2], comp.cov[3]]
            }
        })
        .collect();
    let path = SamplePath { dim, times, states, values: vals, jumps: jmps, marks, diffusion_cov };
    debug_assert!(path.check_invariants().is_ok());
    Ok(path)
}

/// Increment of the additive component over one complete excursion away
/// from state `j` (from the exit instant's left limit to the return),
/// together with the excursion length. The exit-instant transition jump is
/// part of the excursion.
///
/// `with_weighted_integral` additionally accumulates
/// `∫ e^{-(x1_{s-} - x1_exit)} dx2_s` over the excursion (both endpoint
/// jumps included), which requires micro refinement `h` of the continuous
/// segments.
pub struct ExcursionSampler<'a> {
    spec: &'a MapSpec,
    from: usize,
    h: f64,
}

pub struct Excursion {
    pub increment: [f64; 2],
    pub length: f64,
    pub weighted_integral: f64,
}

impl<'a> ExcursionSampler<'a> {
    pub fn new(spec: &'a MapSpec, from: usize, h: f64) -> Result<Self> {
        spec.validate()?;
        if from >= spec.num_states() {
            return Err(Error::parameter("state", "out of range"));
        }
        if spec.num_states() == 1 {
            return Err(Error::parameter("state", "single-state chain has no excursions"));
        }
        Ok(ExcursionSampler { spec, from, h })
    }

    /// Draws one excursion using the given streams.
    pub fn sample(&self, streams: &mut PathStreams) -> Excursion {
        let spec = self.spec;
        let m = spec.num_states();
        let j = self.from;

        // exit transition drawn from the embedded chain at j
        let rate = -spec.chain.rate(j, j);
        let v: f64 = streams.chain.gen();
        let mut acc = 0.0;
        let mut state = j;
        for k in 0..m {
            if k == j {
                continue;
            }
            acc += spec.chain.rate(j, k) / rate;
            if v < acc {
                state = k;
                break;
            }
        }
        if state == j {
            state = (0..m).filter(|&k| k != j && spec.chain.rate(j, k) > 0.0).last().unwrap();
        }

        // x is tracked relative to the left limit at the exit instant; the
        // weighted integral is normalized to the post-exit value, so the
        // raw accumulation below (weights e^{-x1_{s-}}) is rescaled by
        // e^{x1_exit} at the end.
        let mut x = [0.0f64; 2];
        let mut integral = 0.0;
        let mut t = 0.0;
        let mut exit_jump_x1 = 0.0;
        // exit shock
        if let Some(law) = spec.transition_jumps.law(j, state) {
            let dx = law.sample_vec(&mut streams.shock);
            integral += (-x[0]).exp() * dx[1];
            x[0] += dx[0];
            x[1] += dx[1];
            exit_jump_x1 = dx[0];
        }
        // wander until return to j
        loop {
            let comp = &spec.per_state[state];
            let hold_u: f64 = streams.chain.gen();
            let hold = -(1.0 - hold_u).ln() / (-spec.chain.rate(state, state));
            let sojourn_end = t + hold;
            // Poisson epochs inside the sojourn
            let mut epochs = Vec::new();
            if comp.jump_rate > 0.0 {
                let mut s = t;
                loop {
                    let u: f64 = streams.poisson.gen();
                    s += -(1.0 - u).ln() / comp.jump_rate;
                    if s >= sojourn_end {
                        break;
                    }
                    epochs.push(s);
                }
            }
            let chol = comp.cholesky();
            let has_noise = chol[0] != 0.0 || chol[2] != 0.0 || chol[3] != 0.0;
            let mut cursor = t;
            for idx in 0..=epochs.len() {
                let anchor = if idx < epochs.len() { epochs[idx] } else { sojourn_end };
                loop {
                    let mut next = cursor + self.h;
                    if next >= anchor - 1e-12 * (1.0 + anchor.abs()) {
                        next = anchor;
                    }
                    let dt = next - cursor;
                    if dt <= 0.0 {
                        break;
                    }
                    let mut dx = [
                        comp.drift[0] * dt,
                        if spec.dim > 1 { comp.drift[1] * dt } else { 0.0 },
                    ];
                    if has_noise {
                        let sq = dt.sqrt();
                        let z0: f64 = StandardNormal.sample(&mut streams.brownian);
                        if spec.dim == 1 {
                            dx[0] += chol[0] * sq * z0;
                        } else {
                            let z1: f64 = StandardNormal.sample(&mut streams.brownian);
                            dx[0] += chol[0] * sq * z0;
                            dx[1] += (chol[2] * z0 + chol[3] * z1) * sq;
                        }
                    }
                    integral += (-x[0]).exp() * dx[1];
                    x[0] += dx[0];
                    x[1] += dx[1];
                    cursor = next;
                    if cursor >= anchor {
                        break;
                    }
                }
                if idx < epochs.len() {
                    let law = comp.jump_law.as_ref().expect("rate > 0 implies law");
                    let dx = law.sample_vec(&mut streams.jump_size);
                    integral += (-x[0]).exp() * dx[1];
                    x[0] += dx[0];
                    x[1] += dx[1];
                }
            }
            t = sojourn_end;
            // chain transition out of `state`
            let v: f64 = streams.chain.gen();
            let rate = -spec.chain.rate(state, state);
            let mut acc = 0.0;
            let mut next_state = state;
            for k in 0..m {
                if k == state {
                    continue;
                }
                acc += spec.chain.rate(state, k) / rate;
                if v < acc {
                    next_state = k;
                    break;
                }
            }
            if next_state == state {
                next_state =
                    (0..m).filter(|&k| k != state && spec.chain.rate(state, k) > 0.0).last().unwrap();
            }
            if let Some(law) = spec.transition_jumps.law(state, next_state) {
                let dx = law.sample_vec(&mut streams.shock);
                integral += (-x[0]).exp() * dx[1];
                x[0] += dx[0];
                x[1] += dx[1];
            }
            if next_state == j {
                return Excursion {
                    increment: x,
                    length: t,
                    weighted_integral: exit_jump_x1.exp() * integral,
                };
            }
            state = next_state;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainSpec, InitialLaw};
    use crate::dist::{DistributionSpec, JumpLaw};
    use crate::map::{LevyComponentSpec, TransitionJumpSpec};

    fn two_state_spec(drifts: [f64; 2]) -> MapSpec {
        MapSpec::new(
            ChainSpec::new(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], InitialLaw::State(0)).unwrap(),
            1,
            vec![
                LevyComponentSpec {
                    drift: vec![drifts[0]],
                    cov: vec![0.0],
                    jump_rate: 0.0,
                    jump_law: None,
                },
                LevyComponentSpec {
                    drift: vec![drifts[1]],
                    cov: vec![0.0],
                    jump_rate: 0.0,
                    jump_law: None,
                },
            ],
            TransitionJumpSpec::none(),
        )
        .unwrap()
    }

    #[test]
    fn zero_spec_gives_zero_path() {
        let spec = two_state_spec([0.0, 0.0]);
        let path = simulate_map_path(&spec, 5.0, 0.1, 9).unwrap();
        path.check_invariants().unwrap();
        assert!(path.values[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pure_drift_single_state_is_linear() {
        let spec = MapSpec::new(
            ChainSpec::single_state(),
            1,
            vec![LevyComponentSpec {
                drift: vec![0.7],
                cov: vec![0.0],
                jump_rate: 0.0,
                jump_law: None,
            }],
            TransitionJumpSpec::none(),
        )
        .unwrap();
        let path = simulate_map_path(&spec, 3.0, 0.01, 1).unwrap();
        let end = *path.values[0].last().unwrap();
        assert!((end - 2.1).abs() < 1e-10, "got {end}");
    }

    #[test]
    fn switching_drift_has_zero_ergodic_mean() {
        let mut spec = two_state_spec([1.0, -1.0]);
        spec.chain.initial = InitialLaw::Probabilities(vec![0.5, 0.5]);
        let n = 10_000;
        let horizon = 5.0;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let p = simulate_map_path_indexed(&spec, horizon, 1.0, 77, i as u64).unwrap();
            let v = p.values[0].last().unwrap() / horizon;
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn deterministic_given_seed() {
        let mut spec = two_state_spec([1.0, -1.0]);
        spec.per_state[0].cov = vec![0.3];
        spec.per_state[0].jump_rate = 2.0;
        spec.per_state[0].jump_law =
            Some(JumpLaw::Scalar(DistributionSpec::Normal { mean: 0.0, var: 0.25 }));
        let a = simulate_map_path(&spec, 10.0, 0.05, 5).unwrap();
        let b = simulate_map_path(&spec, 10.0, 0.05, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn excursion_increment_satisfies_wald_identity() {
        // state 1 has pure drift d; an excursion from state 0 lasts
        // Exp(1), so the mean excursion increment is d * 1
        let d = 0.8;
        let spec = two_state_spec([0.0, d]);
        let sampler = ExcursionSampler::new(&spec, 0, f64::INFINITY).unwrap();
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let mut streams = PathStreams::new(123, i as u64);
            let e = sampler.sample(&mut streams);
            sum += e.increment[0];
            sumsq += e.increment[0] * e.increment[0];
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - d).abs() < 3.0 * se, "mean {mean} vs {d}, se {se}");
    }
}

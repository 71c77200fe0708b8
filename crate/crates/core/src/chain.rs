//! Continuous-time Markov chains on a finite state space: specification,
//! stationary law, and exact event-driven simulation.

use crate::error::{Error, Result};
use crate::rng::PathStreams;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Law of the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLaw {
    State(usize),
    Probabilities(Vec<f64>),
}

/// Generator-matrix description of an irreducible chain.
///
/// The single-state chain is admitted as the degenerate generator `[[0]]`;
/// for `m >= 2` every diagonal entry must be strictly negative (no
/// absorbing states) and the directed graph of positive off-diagonal rates
/// must be strongly connected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub generator: Vec<Vec<f64>>,
    pub initial: InitialLaw,
}

impl ChainSpec {
    pub fn new(generator: Vec<Vec<f64>>, initial: InitialLaw) -> Result<Self> {
        let spec = ChainSpec { generator, initial };
        spec.validate()?;
        Ok(spec)
    }

    pub fn single_state() -> Self {
        ChainSpec { generator: vec![vec![0.0]], initial: InitialLaw::State(0) }
    }

    pub fn num_states(&self) -> usize {
        self.generator.len()
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.generator[i][j]
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.generator.len();
        if m == 0 {
            return Err(Error::spec("generator", "at least one state required"));
        }
        for (i, row) in self.generator.iter().enumerate() {
            if row.len() != m {
                return Err(Error::spec(
                    format!("generator[{i}]"),
                    format!("row has length {}, expected {m}", row.len()),
                ));
            }
            let sum: f64 = row.iter().sum();
            if sum.abs() > 1e-12 {
                return Err(Error::spec(
                    format!("generator[{i}]"),
                    format!("row sums to {sum:e}, must be 0 within 1e-12"),
                ));
            }
            for (j, &q) in row.iter().enumerate() {
                if !q.is_finite() {
                    return Err(Error::spec(format!("generator[{i}][{j}]"), "must be finite"));
                }
                if i != j && q < 0.0 {
                    return Err(Error::spec(
                        format!("generator[{i}][{j}]"),
                        "off-diagonal rates must be >= 0",
                    ));
                }
            }
            if m > 1 && row[i] >= 0.0 {
                return Err(Error::spec(
                    format!("generator[{i}][{i}]"),
                    "diagonal must be < 0 (no absorbing states)",
                ));
            }
        }
        if m > 1 && !self.strongly_connected() {
            return Err(Error::spec(
                "generator",
                "positive-rate graph must be strongly connected (irreducibility)",
            ));
        }
        match &self.initial {
            InitialLaw::State(j) => {
                if *j >= m {
                    return Err(Error::spec("initial", format!("state {j} out of range 0..{m}")));
                }
            }
            InitialLaw::Probabilities(p) => {
                if p.len() != m {
                    return Err(Error::spec("initial", "probability vector length mismatch"));
                }
                if p.iter().any(|&x| x < 0.0) {
                    return Err(Error::spec("initial", "probabilities must be >= 0"));
                }
                let s: f64 = p.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::spec(
                        "initial",
                        format!("probabilities sum to {s}, must be 1 within 1e-12"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn strongly_connected(&self) -> bool {
        let m = self.generator.len();
        let reach = |forward: bool| -> usize {
            let mut seen = vec![false; m];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(i) = stack.pop() {
                for j in 0..m {
                    let q = if forward { self.generator[i][j] } else { self.generator[j][i] };
                    if i != j && q > 0.0 && !seen[j] {
                        seen[j] = true;
                        count += 1;
                        stack.push(j);
                    }
                }
            }
            count
        };
        reach(true) == m && reach(false) == m
    }

    /// Draws the initial state.
    pub fn draw_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.initial {
            InitialLaw::State(j) => *j,
            InitialLaw::Probabilities(p) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (j, &w) in p.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return j;
                    }
                }
                p.len() - 1
            }
        }
    }
}

/// Solves pi Q = 0, sum(pi) = 1 by dense LU with partial pivoting.
///
/// Irreducibility of a finite chain guarantees a unique strictly positive
/// solution; a solve failure or a non-positive entry therefore rejects the
/// specification.
pub fn stationary_law(chain: &ChainSpec) -> Result<Vec<f64>> {
    chain.validate()?;
    let m = chain.num_states();
    if m == 1 {
        return Ok(vec![1.0]);
    }
    // Q^T pi = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = chain.generator[j][i];
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let lu = a.lu();
    let pi = lu
        .solve(&b)
        .ok_or_else(|| Error::spec("generator", "stationary system is singular"))?;
    // residual check on the full balance equations
    let mut residual: f64 = 0.0;
    for j in 0..m {
        let mut r = 0.0;
        for i in 0..m {
            r += pi[i] * chain.generator[i][j];
        }
        residual = residual.max(r.abs());
    }
    if residual > 1e-8 {
        return Err(Error::spec(
            "generator",
            format!("stationary residual {residual:e} beyond tolerance"),
        ));
    }
    if pi.iter().any(|&x| x <= 1e-12) {
        return Err(Error::spec("generator", "stationary law has non-positive entries"));
    }
    Ok(pi.iter().cloned().collect())
}

/// One realized chain trajectory: the initial state and the sequence of
/// jump epochs with the state entered at each epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPath {
    pub horizon: f64,
    pub initial: usize,
    /// (epoch, state entered), strictly increasing epochs in (0, horizon].
    pub jumps: Vec<(f64, usize)>,
}

impl ChainPath {
    pub fn state_at(&self, t: f64) -> usize {
        let mut s = self.initial;
        for &(epoch, state) in &self.jumps {
            if epoch <= t {
                s = state;
            } else {
                break;
            }
        }
        s
    }
}

/// Exact simulation: holding time in state j is Exp(-q_jj), the next state
/// is k != j with probability q_jk / (-q_jj).
pub fn simulate_chain(chain: &ChainSpec, horizon: f64, seed: u64) -> Result<ChainPath> {
    if !(horizon > 0.0) {
        return Err(Error::parameter("horizon", "must be > 0"));
    }
    chain.validate()?;
    let mut streams = PathStreams::new(seed, 0);
    let initial = chain.draw_initial(&mut streams.init);
    let jumps = chain_jump_epochs(chain, initial, horizon, &mut streams.chain);
    Ok(ChainPath { horizon, initial, jumps })
}

/// Jump epochs of the embedded construction; shared with the full path
/// simulator so both consume the chain stream identically.
pub(crate) fn chain_jump_epochs<R: Rng + ?Sized>(
    chain: &ChainSpec,
    initial: usize,
    horizon: f64,
    rng: &mut R,
) -> Vec<(f64, usize)> {
    let m = chain.num_states();
    let mut jumps = Vec::new();
    if m == 1 {
        return jumps;
    }
    let mut t = 0.0;
    let mut state = initial;
    loop {
        let rate = -chain.generator[state][state];
        let u: f64 = rng.gen::<f64>();
        let hold = -(1.0 - u).ln() / rate;
        t += hold;
        if t > horizon {
            break;
        }
        // embedded transition
        let v: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = state;
        for j in 0..m {
            if j == state {
                continue;
            }
            acc += chain.generator[state][j] / rate;
            if v < acc {
                next = j;
                break;
            }
        }
        if next == state {
            // numerical slack: assign the last positive-rate neighbour
            next = (0..m)
                .filter(|&j| j != state && chain.generator[state][j] > 0.0)
                .last()
                .unwrap_or(state);
        }
        jumps.push((t, next));
        state = next;
    }
    jumps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(q12: f64, q21: f64) -> ChainSpec {
        ChainSpec::new(
            vec![vec![-q12, q12], vec![q21, -q21]],
            InitialLaw::State(0),
        )
        .unwrap()
    }

    #[test]
    fn single_state_is_the_degenerate_generator() {
        let c = ChainSpec::single_state();
        assert_eq!(stationary_law(&c).unwrap(), vec![1.0]);
        // a "single state" with a nonzero row is rejected
        assert!(ChainSpec::new(vec![vec![-1.0]], InitialLaw::State(0)).is_err());
    }

    #[test]
    fn stationary_law_balances() {
        let pi = stationary_law(&two_state(1.0, 2.0)).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-12);

        let pi = stationary_law(&two_state(1.0, 1.0)).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_generators_are_rejected() {
        // row sum off
        assert!(ChainSpec::new(vec![vec![-1.0, 0.9], vec![1.0, -1.0]], InitialLaw::State(0))
            .is_err());
        // absorbing state
        assert!(ChainSpec::new(vec![vec![0.0, 0.0], vec![1.0, -1.0]], InitialLaw::State(0))
            .is_err());
        // disconnected blocks
        let q = vec![
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, -1.0, 1.0],
            vec![0.0, 0.0, 1.0, -1.0],
        ];
        assert!(ChainSpec::new(q, InitialLaw::State(0)).is_err());
        // bad initial vector
        assert!(ChainSpec::new(
            vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            InitialLaw::Probabilities(vec![0.6, 0.6]),
        )
        .is_err());
    }

    #[test]
    fn single_state_has_no_jumps() {
        let path = simulate_chain(&ChainSpec::single_state(), 100.0, 3).unwrap();
        assert!(path.jumps.is_empty());
        assert_eq!(path.state_at(50.0), 0);
    }

    #[test]
    fn holding_times_have_unit_mean() {
        let chain = two_state(1.0, 1.0);
        let path = simulate_chain(&chain, 10_000.0, 11).unwrap();
        let mut prev = 0.0;
        let mut holds = Vec::new();
        for &(t, _) in &path.jumps {
            holds.push(t - prev);
            prev = t;
        }
        let n = holds.len() as f64;
        let mean = holds.iter().sum::<f64>() / n;
        let se = 1.0 / n.sqrt(); // Exp(1) has unit sd
        assert!(
            (mean - 1.0).abs() < 3.0 * se,
            "mean holding {mean} outside 3 se = {}",
            3.0 * se
        );
    }

    #[test]
    fn epochs_are_reproducible() {
        let chain = two_state(1.3, 0.7);
        let a = simulate_chain(&chain, 50.0, 42).unwrap();
        let b = simulate_chain(&chain, 50.0, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_chain(&chain, 50.0, 43).unwrap();
        assert_ne!(a.jumps, c.jumps);
    }
}

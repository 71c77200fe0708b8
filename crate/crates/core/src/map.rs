//! Markov additive process specifications.
//!
//! A MAP `(X, J)` pairs a finite-state chain `J` with an additive component
//! `X` that behaves as a state-dependent Lévy process between chain jumps
//! and receives an extra transition jump whenever `J` moves. Lévy parts are
//! restricted to drift + Brownian + compound Poisson, which keeps the
//! simulation exact.

use crate::chain::{stationary_law, ChainSpec, InitialLaw};
use crate::dist::JumpLaw;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-state Lévy triplet with finite-activity jumps: drift vector,
/// Brownian covariance (per unit time) and a compound-Poisson jump part
/// `rate * law`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyComponentSpec {
    pub drift: Vec<f64>,
    /// Row-major d x d covariance of the Brownian part.
    pub cov: Vec<f64>,
    pub jump_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_law: Option<JumpLaw>,
}

impl LevyComponentSpec {
    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn cov_entry(&self, a: usize, b: usize) -> f64 {
        self.cov[a * self.dim() + b]
    }

    pub fn validate(&self, dim: usize, state: usize) -> Result<()> {
        let field = |name: &str| format!("states[{state}].{name}");
        if self.drift.len() != dim {
            return Err(Error::spec(field("drift"), format!("expected length {dim}")));
        }
        if self.cov.len() != dim * dim {
            return Err(Error::spec(field("cov"), format!("expected {dim}x{dim} entries")));
        }
        for a in 0..dim {
            for b in 0..dim {
                let c = self.cov_entry(a, b);
                if !c.is_finite() {
                    return Err(Error::spec(field("cov"), "entries must be finite"));
                }
                if (c - self.cov_entry(b, a)).abs() > 1e-12 {
                    return Err(Error::spec(field("cov"), "must be symmetric within 1e-12"));
                }
            }
            if self.cov_entry(a, a) < 0.0 {
                return Err(Error::spec(field("cov"), "diagonal must be >= 0"));
            }
        }
        if dim == 2 {
            let det = self.cov_entry(0, 0) * self.cov_entry(1, 1)
                - self.cov_entry(0, 1) * self.cov_entry(1, 0);
            if det < -1e-12 {
                return Err(Error::spec(field("cov"), "must be positive semidefinite"));
            }
        }
        if !(self.jump_rate.is_finite() && self.jump_rate >= 0.0) {
            return Err(Error::spec(field("jump_rate"), "must be finite and >= 0"));
        }
        match (&self.jump_law, self.jump_rate > 0.0) {
            (Some(law), _) => law.validate(dim).map_err(|e| match e {
                Error::Spec { field: f, message } => Error::Spec {
                    field: format!("states[{state}].jump_law.{f}"),
                    message,
                },
                other => other,
            })?,
            (None, true) => {
                return Err(Error::spec(field("jump_law"), "required when jump_rate > 0"))
            }
            (None, false) => {}
        }
        Ok(())
    }

    /// Lower-triangular Cholesky factor of the Brownian covariance.
    pub fn cholesky(&self) -> [f64; 4] {
        let d = self.dim();
        if d == 1 {
            return [self.cov[0].max(0.0).sqrt(), 0.0, 0.0, 0.0];
        }
        let (s11, s12, s22) = (self.cov_entry(0, 0), self.cov_entry(0, 1), self.cov_entry(1, 1));
        let l11 = s11.max(0.0).sqrt();
        let l21 = if l11 > 0.0 { s12 / l11 } else { 0.0 };
        let l22 = (s22 - l21 * l21).max(0.0).sqrt();
        [l11, 0.0, l21, l22]
    }
}

/// Jump laws attached to chain transitions; pairs without an entry get a
/// point mass at zero (no transition jump).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransitionJumpSpec {
    #[serde(default, with = "transition_laws_serde")]
    pub laws: BTreeMap<(usize, usize), JumpLaw>,
}

/// JSON cannot key maps by tuples, so the laws map round-trips through a
/// list of `{from, to, law}` records.
mod transition_laws_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        from: usize,
        to: usize,
        law: JumpLaw,
    }

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), JumpLaw>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|(&(from, to), law)| Entry { from, to, law: law.clone() })
            .collect();
        serde::Serialize::serialize(&entries, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BTreeMap<(usize, usize), JumpLaw>, D::Error> {
        let entries: Vec<Entry> = serde::Deserialize::deserialize(d)?;
        Ok(entries.into_iter().map(|e| ((e.from, e.to), e.law)).collect())
    }
}

impl TransitionJumpSpec {
    pub fn none() -> Self {
        TransitionJumpSpec::default()
    }

    pub fn with(mut self, from: usize, to: usize, law: JumpLaw) -> Self {
        self.laws.insert((from, to), law);
        self
    }

    pub fn law(&self, from: usize, to: usize) -> Option<&JumpLaw> {
        self.laws.get(&(from, to))
    }

    pub fn validate(&self, chain: &ChainSpec, dim: usize) -> Result<()> {
        for (&(i, j), law) in &self.laws {
            let field = format!("transition_jumps[({i},{j})]");
            if i == j {
                return Err(Error::spec(field, "transition jump requires i != j"));
            }
            if i >= chain.num_states() || j >= chain.num_states() {
                return Err(Error::spec(field, "state index out of range"));
            }
            if chain.rate(i, j) <= 0.0 {
                return Err(Error::spec(field, "no law may be declared for a zero-rate pair"));
            }
            law.validate(dim).map_err(|e| match e {
                Error::Spec { field: f, message } => {
                    Error::Spec { field: format!("{field}.{f}"), message }
                }
                other => other,
            })?;
        }
        Ok(())
    }
}

/// Full generative description of a MAP with one- or two-dimensional
/// additive component. The additive component always starts at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub chain: ChainSpec,
    pub dim: usize,
    pub per_state: Vec<LevyComponentSpec>,
    #[serde(default)]
    pub transition_jumps: TransitionJumpSpec,
}

impl MapSpec {
    pub fn new(
        chain: ChainSpec,
        dim: usize,
        per_state: Vec<LevyComponentSpec>,
        transition_jumps: TransitionJumpSpec,
    ) -> Result<Self> {
        let spec = MapSpec { chain, dim, per_state, transition_jumps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn num_states(&self) -> usize {
        self.chain.num_states()
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::spec("dim", "additive dimension must be 1 or 2"));
        }
        if self.per_state.len() != self.chain.num_states() {
            return Err(Error::spec(
                "per_state",
                format!(
                    "expected {} components, got {}",
                    self.chain.num_states(),
                    self.per_state.len()
                ),
            ));
        }
        for (j, c) in self.per_state.iter().enumerate() {
            c.validate(self.dim, j)?;
        }
        self.transition_jumps.validate(&self.chain, self.dim)
    }

    pub fn stationary_law(&self) -> Result<Vec<f64>> {
        stationary_law(&self.chain)
    }

    /// Same dynamics, different initial law for the chain.
    pub fn with_initial(&self, initial: InitialLaw) -> MapSpec {
        let mut out = self.clone();
        out.chain.initial = initial;
        out
    }

    /// Componentwise scaling `(x1, x2) -> (s1 x1, s2 x2)` in law: drifts
    /// and jump laws scale, the Brownian covariance picks up s_a s_b.
    pub fn scaled(&self, s: [f64; 2]) -> MapSpec {
        let mut out = self.clone();
        for comp in &mut out.per_state {
            for (k, d) in comp.drift.iter_mut().enumerate() {
                *d *= s[k];
            }
            let dim = comp.dim();
            for a in 0..dim {
                for b in 0..dim {
                    comp.cov[a * dim + b] *= s[a] * s[b];
                }
            }
            if let Some(law) = comp.jump_law.take() {
                comp.jump_law = Some(law.scaled(s[0], s[1]));
            }
        }
        let laws = std::mem::take(&mut out.transition_jumps.laws);
        for (k, law) in laws {
            out.transition_jumps.laws.insert(k, law.scaled(s[0], s[1]));
        }
        out
    }

    pub fn negated(&self) -> MapSpec {
        self.scaled([-1.0, -1.0])
    }

    /// Time-reversal dual: generator `q*_ij = (pi_j / pi_i) q_ji`, each
    /// switching Lévy process negated in law (drift flipped, covariance
    /// kept, jump law negated), transition law of `(i, j)` the negated law
    /// of `(j, i)`, and the chain started from its stationary law.
    pub fn dual(&self) -> Result<MapSpec> {
        let pi = self.stationary_law()?;
        let m = self.num_states();
        let mut generator = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                if i != j {
                    let q = pi[j] / pi[i] * self.chain.rate(j, i);
                    generator[i][j] = q;
                    row_sum += q;
                }
            }
            generator[i][i] = -row_sum;
        }
        let chain = ChainSpec::new(generator, InitialLaw::Probabilities(pi))?;
        let negated = self.negated();
        let mut transition_jumps = TransitionJumpSpec::none();
        for (&(i, j), law) in &self.transition_jumps.laws {
            // dual (j, i) jump is -Phi^{ij}
            transition_jumps.laws.insert((j, i), law.clone().scaled(-1.0, -1.0));
        }
        MapSpec::new(chain, self.dim, negated.per_state, transition_jumps)
    }

    /// For a bivariate driver `(xi, eta)`, the law of the associated SDE
    /// pair second component `L` (the first component is unchanged):
    /// within a state `L` keeps the Brownian part of `eta` and gains drift
    /// `-sigma_{xi,eta}`, and every joint jump `(x, y)` maps to
    /// `(x, e^{-x} y)`.
    pub fn eta_to_l(&self) -> Result<MapSpec> {
        if self.dim != 2 {
            return Err(Error::Structural("eta_to_l requires a bivariate specification".into()));
        }
        let mut out = self.clone();
        for comp in &mut out.per_state {
            comp.drift[1] -= comp.cov_entry(0, 1);
            if let Some(law) = comp.jump_law.take() {
                comp.jump_law = Some(match law {
                    JumpLaw::Pair(b) => {
                        JumpLaw::Pair(crate::dist::BivariateSpec::EtaToL { inner: Box::new(b) })
                    }
                    s @ JumpLaw::Scalar(_) => s,
                });
            }
        }
        let laws = std::mem::take(&mut out.transition_jumps.laws);
        for (k, law) in laws {
            let mapped = match law {
                JumpLaw::Pair(b) => {
                    JumpLaw::Pair(crate::dist::BivariateSpec::EtaToL { inner: Box::new(b) })
                }
                s @ JumpLaw::Scalar(_) => s,
            };
            out.transition_jumps.laws.insert(k, mapped);
        }
        Ok(out)
    }
}

/// Instantaneous covariance of the continuous martingale parts of a pair
/// of components, per state. Used to evaluate continuous quadratic
/// covariations analytically instead of from squared increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariationSpec {
    pub per_state_cov: Vec<f64>,
}

impl CovariationSpec {
    pub fn new(per_state_cov: Vec<f64>) -> Self {
        CovariationSpec { per_state_cov }
    }

    /// Cross covariance sigma_{x1,x2}(j) of a bivariate specification.
    pub fn from_map_spec(spec: &MapSpec) -> Result<Self> {
        if spec.dim != 2 {
            return Err(Error::Structural(
                "covariation spec requires a bivariate specification".into(),
            ));
        }
        Ok(CovariationSpec {
            per_state_cov: spec.per_state.iter().map(|c| c.cov_entry(0, 1)).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{BivariateSpec, DistributionSpec};

    fn two_state_chain(q12: f64, q21: f64) -> ChainSpec {
        ChainSpec::new(vec![vec![-q12, q12], vec![q21, -q21]], InitialLaw::State(0)).unwrap()
    }

    fn plain_component(drift: f64) -> LevyComponentSpec {
        LevyComponentSpec { drift: vec![drift], cov: vec![0.0], jump_rate: 0.0, jump_law: None }
    }

    #[test]
    fn dual_of_two_state_chain_keeps_generator() {
        // any irreducible two-state chain is reversible, so Q* = Q
        let spec = MapSpec::new(
            two_state_chain(1.3, 0.4),
            1,
            vec![plain_component(1.0), plain_component(-1.0)],
            TransitionJumpSpec::none(),
        )
        .unwrap();
        let dual = spec.dual().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((dual.chain.rate(i, j) - spec.chain.rate(i, j)).abs() < 1e-12);
            }
        }
        assert_eq!(dual.per_state[0].drift[0], -1.0);
    }

    #[test]
    fn dual_rates_follow_the_stationary_law() {
        let spec = MapSpec::new(
            two_state_chain(1.0, 2.0),
            1,
            vec![plain_component(0.0), plain_component(0.0)],
            TransitionJumpSpec::none(),
        )
        .unwrap();
        let dual = spec.dual().unwrap();
        // pi = (2/3, 1/3): q*_01 = (1/3)/(2/3) * 2 = 1, q*_10 = 2
        assert!((dual.chain.rate(0, 1) - 1.0).abs() < 1e-12);
        assert!((dual.chain.rate(1, 0) - 2.0).abs() < 1e-12);
        assert_eq!(dual.chain.initial, InitialLaw::Probabilities(stationary_law(&spec.chain).unwrap()));
    }

    #[test]
    fn dual_is_an_involution_on_laws() {
        let law = JumpLaw::Scalar(DistributionSpec::Exponential { rate: 2.0 });
        let spec = MapSpec::new(
            two_state_chain(1.0, 2.0),
            1,
            vec![
                LevyComponentSpec {
                    drift: vec![0.5],
                    cov: vec![0.2],
                    jump_rate: 1.0,
                    jump_law: Some(law.clone()),
                },
                plain_component(-0.5),
            ],
            TransitionJumpSpec::none().with(0, 1, JumpLaw::Scalar(DistributionSpec::point(0.3))),
        )
        .unwrap();
        let dd = spec.dual().unwrap().dual().unwrap();
        assert_eq!(dd.per_state[0].drift, spec.per_state[0].drift);
        assert_eq!(dd.per_state[0].cov, spec.per_state[0].cov);
        assert_eq!(dd.per_state[0].jump_law, spec.per_state[0].jump_law);
        assert_eq!(
            dd.transition_jumps.law(0, 1),
            spec.transition_jumps.law(0, 1),
        );
        for i in 0..2 {
            for j in 0..2 {
                assert!((dd.chain.rate(i, j) - spec.chain.rate(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transition_law_on_zero_rate_pair_is_rejected() {
        let chain = ChainSpec::new(
            vec![
                vec![-1.0, 1.0, 0.0],
                vec![1.0, -2.0, 1.0],
                vec![1.0, 0.0, -1.0],
            ],
            InitialLaw::State(0),
        )
        .unwrap();
        let err = MapSpec::new(
            chain,
            1,
            vec![plain_component(0.0), plain_component(0.0), plain_component(0.0)],
            TransitionJumpSpec::none().with(0, 2, JumpLaw::Scalar(DistributionSpec::point(1.0))),
        );
        assert!(err.is_err());
    }

    #[test]
    fn jump_rate_without_law_is_rejected() {
        let bad = MapSpec::new(
            two_state_chain(1.0, 1.0),
            1,
            vec![
                LevyComponentSpec { drift: vec![0.0], cov: vec![0.0], jump_rate: 1.0, jump_law: None },
                plain_component(0.0),
            ],
            TransitionJumpSpec::none(),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn scaled_flips_drift_and_laws() {
        let spec = MapSpec::new(
            two_state_chain(1.0, 1.0),
            2,
            vec![
                LevyComponentSpec {
                    drift: vec![1.0, -2.0],
                    cov: vec![0.04, 0.01, 0.01, 0.09],
                    jump_rate: 1.0,
                    jump_law: Some(JumpLaw::Pair(BivariateSpec::independent(
                        DistributionSpec::point(1.0),
                        DistributionSpec::point(2.0),
                    ))),
                },
                LevyComponentSpec {
                    drift: vec![0.0, 0.0],
                    cov: vec![0.0; 4],
                    jump_rate: 0.0,
                    jump_law: None,
                },
            ],
            TransitionJumpSpec::none(),
        )
        .unwrap();
        let neg = spec.scaled([-1.0, 1.0]);
        assert_eq!(neg.per_state[0].drift, vec![-1.0, -2.0]);
        // cross covariance flips sign with a single negated component
        assert!((neg.per_state[0].cov_entry(0, 1) + 0.01).abs() < 1e-15);
        assert!((neg.per_state[0].cov_entry(0, 0) - 0.04).abs() < 1e-15);
    }
}

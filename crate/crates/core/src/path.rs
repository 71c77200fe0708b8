//! Realized càdlàg trajectories on an event-anchored grid.
//!
//! Every chain-transition epoch and every compound-Poisson epoch is a grid
//! point, so jump times carry no discretization error; a uniform micro
//! step refines the grid between events and only affects the quadrature of
//! integrals against the continuous parts. Stored values follow the càdlàg
//! convention: `values[c][k]` is the post-jump value at `times[k]`, and the
//! left limit is recovered by subtracting the recorded jump.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkKind {
    /// Plain grid point (micro step or horizon).
    None,
    /// Compound-Poisson jump of the additive component.
    Levy,
    /// Chain transition (with its induced jump, possibly zero).
    Chain,
    /// Collapsed excursion of a conflated path.
    Excursion,
}

/// One realized trajectory of `((X_t), J_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub dim: usize,
    /// Strictly increasing grid, `times[0] = 0`.
    pub times: Vec<f64>,
    /// State on `[times[k], times[k+1])`.
    pub states: Vec<usize>,
    /// Post-jump values per component, `values[c][0] = 0`.
    pub values: Vec<Vec<f64>>,
    /// Jump applied at each grid point per component (0 where no jump).
    pub jumps: Vec<Vec<f64>>,
    pub marks: Vec<MarkKind>,
    /// Per-state Brownian covariance of the generating components, row
    /// major 2x2 with unused entries zero. Carried with the path so that
    /// continuous quadratic variations are evaluated analytically; for
    /// multiplicative transforms (stochastic exponentials) this remains
    /// the covariance of the *driving* additive component.
    pub diffusion_cov: Vec<[f64; 4]>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Left limit of component `c` at grid point `k`.
    pub fn pre_value(&self, c: usize, k: usize) -> f64 {
        self.values[c][k] - self.jumps[c][k]
    }

    /// Increment of the continuous part of component `c` over
    /// `(times[k], times[k+1])`, i.e. excluding the jump at `k+1`.
    pub fn cont_increment(&self, c: usize, k: usize) -> f64 {
        self.pre_value(c, k + 1) - self.values[c][k]
    }

    /// sigma_{a,b}(j) of the generating components in state `j`.
    pub fn sigma(&self, j: usize, a: usize, b: usize) -> f64 {
        self.diffusion_cov[j][a * 2 + b]
    }

    /// Running integral `∫_0^t sigma_{a,b}(J_s) ds` at every grid point;
    /// exact because the chain is piecewise constant on the grid.
    pub fn cumulative_cov(&self, a: usize, b: usize) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for k in 0..n - 1 {
            let dt = self.times[k + 1] - self.times[k];
            out[k + 1] = out[k] + self.sigma(self.states[k], a, b) * dt;
        }
        out
    }

    /// Extracts a one-dimensional component path sharing this grid.
    pub fn component(&self, c: usize) -> Result<SamplePath> {
        if c >= self.dim {
            return Err(Error::Structural(format!(
                "component {c} out of range for dimension {}",
                self.dim
            )));
        }
        let cov = self
            .diffusion_cov
            .iter()
            .map(|m| [m[c * 2 + c], 0.0, 0.0, 0.0])
            .collect();
        Ok(SamplePath {
            dim: 1,
            times: self.times.clone(),
            states: self.states.clone(),
            values: vec![self.values[c].clone()],
            jumps: vec![self.jumps[c].clone()],
            marks: self.marks.clone(),
            diffusion_cov: cov,
        })
    }

    /// Pairs two one-dimensional paths on a common grid into a bivariate
    /// path with the given per-state cross covariance.
    pub fn pair(x: &SamplePath, y: &SamplePath, cross_cov: &[f64]) -> Result<SamplePath> {
        x.check_same_grid(y)?;
        if x.dim != 1 || y.dim != 1 {
            return Err(Error::Structural("pair expects one-dimensional paths".into()));
        }
        let m = x.diffusion_cov.len();
        if cross_cov.len() != m {
            return Err(Error::Structural("cross covariance length mismatch".into()));
        }
        let cov = (0..m)
            .map(|j| {
                [
                    x.diffusion_cov[j][0],
                    cross_cov[j],
                    cross_cov[j],
                    y.diffusion_cov[j][0],
                ]
            })
            .collect();
        Ok(SamplePath {
            dim: 2,
            times: x.times.clone(),
            states: x.states.clone(),
            values: vec![x.values[0].clone(), y.values[0].clone()],
            jumps: vec![x.jumps[0].clone(), y.jumps[0].clone()],
            marks: x
                .marks
                .iter()
                .zip(&y.marks)
                .map(|(&a, &b)| if a == MarkKind::None { b } else { a })
                .collect(),
            diffusion_cov: cov,
        })
    }

    /// Clone of the grid skeleton with fresh values/jumps for a derived
    /// one-dimensional path.
    pub fn derived_scalar(&self, values: Vec<f64>, jumps: Vec<f64>, cov: Vec<[f64; 4]>) -> SamplePath {
        SamplePath {
            dim: 1,
            times: self.times.clone(),
            states: self.states.clone(),
            values: vec![values],
            jumps: vec![jumps],
            marks: self.marks.clone(),
            diffusion_cov: cov,
        }
    }

    pub fn check_same_grid(&self, other: &SamplePath) -> Result<()> {
        if self.times != other.times || self.states != other.states {
            return Err(Error::Structural(
                "paths must share the same grid and chain trajectory".into(),
            ));
        }
        Ok(())
    }

    pub fn require_dim(&self, dim: usize, what: &str) -> Result<()> {
        if self.dim != dim {
            return Err(Error::Structural(format!(
                "{what} expects a {dim}-dimensional path, got {}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Grid index of time `t`, which must lie on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let idx = self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
            .or_else(|ins| {
                // tolerate representation noise
                let tol = 1e-9 * t.abs().max(1.0);
                if ins < self.times.len() && (self.times[ins] - t).abs() <= tol {
                    Ok(ins)
                } else if ins > 0 && (self.times[ins - 1] - t).abs() <= tol {
                    Ok(ins - 1)
                } else {
                    Err(ins)
                }
            })
            .map_err(|_| Error::Structural(format!("time {t} is not a grid point")))?;
        Ok(idx)
    }

    /// Structural invariants: strictly increasing grid, zero start, state
    /// changes exactly at chain marks.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Structural("empty path".into()));
        }
        if self.times[0] != 0.0 {
            return Err(Error::Structural("grid must start at 0".into()));
        }
        for c in 0..self.dim {
            if self.values[c][0] != 0.0 {
                return Err(Error::Structural("additive component must start at 0".into()));
            }
        }
        for k in 1..n {
            if !(self.times[k] > self.times[k - 1]) {
                return Err(Error::Structural(format!(
                    "grid not strictly increasing at index {k}"
                )));
            }
            let state_changed = self.states[k] != self.states[k - 1];
            let chain_mark = self.marks[k] == MarkKind::Chain;
            if state_changed != chain_mark {
                return Err(Error::Structural(format!(
                    "state change and chain mark disagree at index {k}"
                )));
            }
        }
        Ok(())
    }

    /// Drops micro grid points, keeping every `factor`-th one plus all
    /// event points. The retained values are exact restrictions of the
    /// original trajectory, which is what a convergence study in the micro
    /// step needs.
    pub fn coarsen(&self, factor: usize) -> SamplePath {
        assert!(factor >= 1);
        let n = self.len();
        let mut keep = vec![false; n];
        keep[0] = true;
        keep[n - 1] = true;
        let mut run = 0usize;
        for k in 1..n {
            if self.marks[k] != MarkKind::None {
                keep[k] = true;
                run = 0;
            } else {
                run += 1;
                if run % factor == 0 {
                    keep[k] = true;
                }
            }
        }
        let pick =
            |v: &Vec<f64>| v.iter().zip(&keep).filter(|(_, &k)| k).map(|(x, _)| *x).collect();
        SamplePath {
            dim: self.dim,
            times: pick(&self.times),
            states: self
                .states
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(x, _)| *x)
                .collect(),
            values: self.values.iter().map(pick).collect(),
            jumps: self.jumps.iter().map(pick).collect(),
            marks: self
                .marks
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(x, _)| *x)
                .collect(),
            diffusion_cov: self.diffusion_cov.clone(),
        }
    }

    /// CSV rows `time,state,x1[,x2],mark,jump1[,jump2]`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        if self.dim == 1 {
            writeln!(w, "time,state,x1,mark,jump1")?;
        } else {
            writeln!(w, "time,state,x1,x2,mark,jump1,jump2")?;
        }
        for k in 0..self.len() {
            let mark = match self.marks[k] {
                MarkKind::None => "none",
                MarkKind::Levy => "levy_jump",
                MarkKind::Chain => "chain_jump",
                MarkKind::Excursion => "excursion_jump",
            };
            if self.dim == 1 {
                writeln!(
                    w,
                    "{},{},{},{mark},{}",
                    self.times[k], self.states[k], self.values[0][k], self.jumps[0][k]
                )?;
            } else {
                writeln!(
                    w,
                    "{},{},{},{},{mark},{},{}",
                    self.times[k],
                    self.states[k],
                    self.values[0][k],
                    self.values[1][k],
                    self.jumps[0][k],
                    self.jumps[1][k]
                )?;
            }
        }
        Ok(())
    }
}

/// Running left-point Riemann-Stieltjes integral `∫_(0,t] f_{s-} dg_s` on a
/// common grid. Jump contributions enter exactly as `f(pre-jump) * Δg`;
/// only the continuous segments carry O(h) quadrature error.
///
/// `f_post[k]`/`f_jump[k]` describe the integrand path, `g_post`/`g_jump`
/// the integrator.
pub fn integrate_left(
    f_post: &[f64],
    f_jump: &[f64],
    g_post: &[f64],
    g_jump: &[f64],
) -> Vec<f64> {
    let n = f_post.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for k in 0..n - 1 {
        let g_pre_next = g_post[k + 1] - g_jump[k + 1];
        acc += f_post[k] * (g_pre_next - g_post[k]);
        let f_pre_next = f_post[k + 1] - f_jump[k + 1];
        acc += f_pre_next * g_jump[k + 1];
        out[k + 1] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-built two-point deterministic path used by grid-level tests.
    pub(crate) fn line_path(horizon: f64, n: usize, slope: f64) -> SamplePath {
        let times: Vec<f64> = (0..n).map(|k| horizon * k as f64 / (n - 1) as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| slope * t).collect();
        SamplePath {
            dim: 1,
            states: vec![0; n],
            jumps: vec![vec![0.0; n]],
            marks: vec![MarkKind::None; n],
            diffusion_cov: vec![[0.0; 4]],
            values: vec![values],
            times,
        }
    }

    #[test]
    fn left_point_integral_is_exact_on_jumps() {
        // f = 1, g has a single jump of size 2 at the middle point
        let f_post = vec![1.0, 1.0, 1.0];
        let f_jump = vec![0.0, 0.0, 0.0];
        let g_post = vec![0.0, 2.0, 2.0];
        let g_jump = vec![0.0, 2.0, 0.0];
        let i = integrate_left(&f_post, &f_jump, &g_post, &g_jump);
        assert_eq!(i, vec![0.0, 2.0, 2.0]);
    }

    #[test]
    fn integrand_uses_left_limits_at_joint_jumps() {
        // f jumps from 1 to 3 at the same instant g jumps by 2: the
        // contribution must be f_pre * Δg = 1 * 2
        let f_post = vec![1.0, 3.0];
        let f_jump = vec![0.0, 2.0];
        let g_post = vec![0.0, 2.0];
        let g_jump = vec![0.0, 2.0];
        let i = integrate_left(&f_post, &f_jump, &g_post, &g_jump);
        assert_eq!(i[1], 2.0);
    }

    #[test]
    fn riemann_part_converges_first_order() {
        // ∫_0^1 t dt = 1/2 with left points: error h/2
        for &n in &[11usize, 21, 41] {
            let p = line_path(1.0, n, 1.0);
            let i = integrate_left(&p.values[0], &p.jumps[0], &p.values[0], &p.jumps[0]);
            let h = 1.0 / (n - 1) as f64;
            assert!((i[n - 1] - 0.5 + h / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coarsen_keeps_events_and_endpoints() {
        let mut p = line_path(1.0, 9, 1.0);
        p.marks[3] = MarkKind::Levy;
        p.jumps[0][3] = 0.5;
        let c = p.coarsen(4);
        assert_eq!(c.times[0], 0.0);
        assert!((c.horizon() - 1.0).abs() < 1e-15);
        assert!(c.marks.contains(&MarkKind::Levy));
        assert!(c.len() < p.len());
    }

    #[test]
    fn index_lookup_tolerates_representation_noise() {
        let p = line_path(1.0, 11, 1.0);
        assert_eq!(p.index_of(0.3 + 1e-13).unwrap(), 3);
        assert!(p.index_of(0.35).is_err());
    }
}

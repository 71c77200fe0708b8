//! Pathwise stochastic calculus on event-anchored grids.
//!
//! All transforms here are algebraically exact on jumps (jump epochs are
//! grid points) and evaluate continuous quadratic (co)variations
//! analytically from the per-state Brownian covariances carried by the
//! path, never from squared increments. The only discretization error left
//! is the O(h) left-point quadrature against Brownian segments.

use crate::error::{Error, Result};
use crate::map::CovariationSpec;
use crate::path::SamplePath;

fn check_no_minus_one_jumps(u: &SamplePath) -> Result<()> {
    if u.jumps[0].iter().any(|&d| d == -1.0) {
        return Err(Error::Domain("driver has a jump of size -1".into()));
    }
    Ok(())
}

/// Doléans-Dade exponential Z = E(U):
/// `Z_t = exp(U_t - [U^c,U^c]_t / 2) * prod_{s<=t} (1 + ΔU_s) e^{-ΔU_s}`,
/// with `[U^c,U^c]_t = ∫ sigma_U^2(J_s) ds` evaluated exactly.
///
/// A jump of exactly -1 sends the exponential to zero permanently; jumps
/// below -1 flip its sign, as the product formula dictates.
pub fn stochastic_exponential(u: &SamplePath) -> Result<SamplePath> {
    u.require_dim(1, "stochastic_exponential")?;
    let n = u.len();
    let cqv = u.cumulative_cov(0, 0);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut log_correction = 0.0; // running sum of ln|1+ΔU| - ΔU
    let mut negative = false;
    let mut dead = false;
    values[0] = 1.0;
    for k in 1..n {
        let du = u.jumps[0][k];
        let pre = if dead {
            0.0
        } else {
            let magnitude = (u.pre_value(0, k) - 0.5 * cqv[k] + log_correction).exp();
            if negative {
                -magnitude
            } else {
                magnitude
            }
        };
        if du != 0.0 {
            let factor = 1.0 + du;
            if factor == 0.0 {
                dead = true;
            } else {
                log_correction += factor.abs().ln() - du;
                if factor < 0.0 {
                    negative = !negative;
                }
            }
        }
        let post = if dead {
            0.0
        } else {
            let magnitude = (u.values[0][k] - 0.5 * cqv[k] + log_correction).exp();
            if negative {
                -magnitude
            } else {
                magnitude
            }
        };
        values[k] = post;
        jumps[k] = post - pre;
    }
    let mut out = u.derived_scalar(values, jumps, u.diffusion_cov.clone());
    out.values[0][0] = 1.0; // Z_0 = 1, not an additive component
    Ok(out)
}

/// First-order Euler integration of dZ = Z_- dU, Z_0 = 1, on the path's
/// grid. Continuous increments use the explicit Euler update; jump
/// increments are applied exactly as `Z_pre * ΔU`.
pub fn stochastic_exponential_euler(u: &SamplePath) -> Result<Vec<f64>> {
    u.require_dim(1, "stochastic_exponential_euler")?;
    let n = u.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for k in 0..n - 1 {
        let pre = z[k] * (1.0 + u.cont_increment(0, k));
        z[k + 1] = pre * (1.0 + u.jumps[0][k + 1]);
    }
    Ok(z)
}

/// Stochastic logarithm `U_t = ∫_(0,t] dZ_s / Z_{s-}`, the inverse of the
/// stochastic exponential, computed as a left-point sum with exact jump
/// terms. Fails if the input touches zero anywhere on the grid.
pub fn stochastic_logarithm(z: &SamplePath) -> Result<SamplePath> {
    z.require_dim(1, "stochastic_logarithm")?;
    let n = z.len();
    for k in 0..n {
        if z.values[0][k] == 0.0 || z.pre_value(0, k) == 0.0 {
            return Err(Error::Domain(format!(
                "stochastic logarithm undefined: path hits 0 at grid index {k}"
            )));
        }
    }
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    for k in 0..n - 1 {
        let pre_next = z.pre_value(0, k + 1);
        let cont = (pre_next - z.values[0][k]) / z.values[0][k];
        let jump = z.jumps[0][k + 1] / pre_next;
        values[k + 1] = values[k] + cont + jump;
        jumps[k + 1] = jump;
    }
    Ok(z.derived_scalar(values, jumps, z.diffusion_cov.clone()))
}

/// Quadratic covariation
/// `[X,Y]_t = ∫ sigma_{X,Y}(J_s) ds + sum_{s<=t} ΔX_s ΔY_s`.
pub fn quadratic_covariation(
    x: &SamplePath,
    y: &SamplePath,
    cov: &CovariationSpec,
) -> Result<SamplePath> {
    x.require_dim(1, "quadratic_covariation")?;
    y.require_dim(1, "quadratic_covariation")?;
    x.check_same_grid(y)?;
    let m = x.diffusion_cov.len();
    if cov.per_state_cov.len() != m {
        return Err(Error::Structural("covariation spec has wrong number of states".into()));
    }
    let n = x.len();
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    for k in 0..n - 1 {
        let dt = x.times[k + 1] - x.times[k];
        let cont = cov.per_state_cov[x.states[k]] * dt;
        let jump = x.jumps[0][k + 1] * y.jumps[0][k + 1];
        values[k + 1] = values[k] + cont + jump;
        jumps[k + 1] = jump;
    }
    Ok(x.derived_scalar(values, jumps, vec![[0.0; 4]; m]))
}

/// Additive representation of a multiplicative path: `Z = (-1)^K e^{-Y}`
/// with `Y` real-valued and `K` counting the sign flips.
pub struct MmpParts {
    pub y: SamplePath,
    /// Integer-valued counting path of jumps below -1.
    pub k: SamplePath,
    /// `(-1)^K e^{-Y}`, which coincides with the stochastic exponential of
    /// the input driver.
    pub z: SamplePath,
}

/// Splits the stochastic exponential of `U` into its log-magnitude and
/// sign-flip parts:
/// `Y_t = -U_t + ∫ sigma_U^2(J_s) ds / 2 + sum (ΔU_s - ln|1+ΔU_s|)`,
/// `K_t = #{s <= t : ΔU_s < -1}`.
pub fn map_to_mmp(u: &SamplePath) -> Result<MmpParts> {
    u.require_dim(1, "map_to_mmp")?;
    check_no_minus_one_jumps(u)?;
    let n = u.len();
    let cqv = u.cumulative_cov(0, 0);
    let mut y_values = vec![0.0; n];
    let mut y_jumps = vec![0.0; n];
    let mut k_values = vec![0.0; n];
    let mut k_jumps = vec![0.0; n];
    let mut correction = 0.0; // running sum of ΔU - ln|1+ΔU|
    let mut flips = 0.0;
    for k in 1..n {
        let du = u.jumps[0][k];
        if du != 0.0 {
            correction += du - (1.0 + du).abs().ln();
            if du < -1.0 {
                flips += 1.0;
                k_jumps[k] = 1.0;
            }
            y_jumps[k] = -(1.0 + du).abs().ln();
        }
        y_values[k] = -u.values[0][k] + 0.5 * cqv[k] + correction;
        k_values[k] = flips;
    }
    let y = u.derived_scalar(y_values, y_jumps, u.diffusion_cov.clone());
    let k_path = u.derived_scalar(k_values, k_jumps, vec![[0.0; 4]; u.diffusion_cov.len()]);
    let mut z_values = vec![0.0; n];
    let mut z_jumps = vec![0.0; n];
    z_values[0] = 1.0;
    for i in 1..n {
        let sign = if (k_path.values[0][i] as i64) % 2 == 0 { 1.0 } else { -1.0 };
        let sign_pre = if ((k_path.values[0][i] - k_path.jumps[0][i]) as i64) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        z_values[i] = sign * (-y.values[0][i]).exp();
        z_jumps[i] = z_values[i] - sign_pre * (-y.pre_value(0, i)).exp();
    }
    let mut z = u.derived_scalar(z_values, z_jumps, u.diffusion_cov.clone());
    z.values[0][0] = 1.0;
    Ok(MmpParts { y, k: k_path, z })
}

/// Recovers the additive driver of a multiplicative path: with
/// `Ybar = -ln|Z|` and `Kbar` counting negative multiplicative increments,
/// `U_t = -Ybar_t + [Ybar^c,Ybar^c]_t / 2
///        + sum (ΔYbar_s - 1 + (-1)^{ΔKbar_s} e^{-ΔYbar_s})`,
/// so that E(U) = Z and ΔU != -1.
pub fn mmp_to_map(z: &SamplePath) -> Result<SamplePath> {
    z.require_dim(1, "mmp_to_map")?;
    let n = z.len();
    for k in 0..n {
        if z.values[0][k] == 0.0 || z.pre_value(0, k) == 0.0 {
            return Err(Error::Domain(format!("multiplicative path hits 0 at grid index {k}")));
        }
    }
    // [Ybar^c, Ybar^c] equals the continuous quadratic variation of the
    // additive driver, carried with the path.
    let cqv = z.cumulative_cov(0, 0);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut correction = 0.0;
    for k in 1..n {
        let ratio = z.values[0][k] / z.pre_value(0, k);
        if ratio != 1.0 {
            let dybar = -ratio.abs().ln();
            let sign = if ratio < 0.0 { -1.0 } else { 1.0 };
            let du = sign * (-dybar).exp() - 1.0; // = ratio - 1
            correction += dybar - 1.0 + sign * (-dybar).exp();
            jumps[k] = du;
        }
        let ybar = -z.values[0][k].abs().ln();
        values[k] = -ybar + 0.5 * cqv[k] + correction;
    }
    Ok(z.derived_scalar(values, jumps, z.diffusion_cov.clone()))
}

/// Log-scale driver `xi = -ln E(U)` for drivers with ΔU > -1:
/// `xi_t = -U_t + ∫ sigma_U^2(J_s) ds / 2 + sum (ΔU_s - ln(1+ΔU_s))`.
pub fn xi_from_u(u: &SamplePath) -> Result<SamplePath> {
    u.require_dim(1, "xi_from_u")?;
    if u.jumps[0].iter().any(|&d| d <= -1.0) {
        return Err(Error::Domain(
            "xi_from_u requires ΔU > -1 (the exponential must stay positive)".into(),
        ));
    }
    let n = u.len();
    let cqv = u.cumulative_cov(0, 0);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut correction = 0.0;
    for k in 1..n {
        let du = u.jumps[0][k];
        if du != 0.0 {
            correction += du - (1.0 + du).ln();
            jumps[k] = -(1.0 + du).ln();
        }
        values[k] = -u.values[0][k] + 0.5 * cqv[k] + correction;
    }
    Ok(u.derived_scalar(values, jumps, u.diffusion_cov.clone()))
}

/// Inverse of [`xi_from_u`]:
/// `U_t = -xi_t + ∫ sigma_xi^2(J_s) ds / 2 + sum (Δxi_s + e^{-Δxi_s} - 1)`,
/// which always satisfies ΔU > -1 and `E(U) = e^{-xi}`.
pub fn u_from_xi(xi: &SamplePath) -> Result<SamplePath> {
    xi.require_dim(1, "u_from_xi")?;
    let n = xi.len();
    let cqv = xi.cumulative_cov(0, 0);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut correction = 0.0;
    for k in 1..n {
        let dxi = xi.jumps[0][k];
        if dxi != 0.0 {
            correction += dxi + (-dxi).exp() - 1.0;
            jumps[k] = (-dxi).exp() - 1.0;
        }
        values[k] = -xi.values[0][k] + 0.5 * cqv[k] + correction;
    }
    Ok(xi.derived_scalar(values, jumps, xi.diffusion_cov.clone()))
}

/// Second SDE-driver component built from a `(xi, eta)` path:
/// `L_t = eta_t - ∫ sigma_{xi,eta}(J_s) ds + sum (e^{-Δxi_s} - 1) Δeta_s`.
pub fn l_from_eta(xieta: &SamplePath) -> Result<SamplePath> {
    xieta.require_dim(2, "l_from_eta")?;
    let n = xieta.len();
    let cross = xieta.cumulative_cov(0, 1);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut correction = 0.0;
    for k in 1..n {
        let dxi = xieta.jumps[0][k];
        let deta = xieta.jumps[1][k];
        if dxi != 0.0 && deta != 0.0 {
            correction += ((-dxi).exp() - 1.0) * deta;
        }
        jumps[k] = (-dxi).exp() * deta;
        values[k] = xieta.values[1][k] - cross[k] + correction;
    }
    let mut out = xieta.component(1)?;
    out.values[0] = values;
    out.jumps[0] = jumps;
    Ok(out)
}

/// Bivariate SDE driver `(U, L)` associated with a `(xi, eta)` path; the
/// cross covariance flips sign because `U^c = -xi^c` while `L^c = eta^c`.
pub fn ul_from_xieta(xieta: &SamplePath) -> Result<SamplePath> {
    xieta.require_dim(2, "ul_from_xieta")?;
    let u = u_from_xi(&xieta.component(0)?)?;
    let l = l_from_eta(xieta)?;
    let cross: Vec<f64> = xieta.diffusion_cov.iter().map(|m| -m[1]).collect();
    SamplePath::pair(&u, &l, &cross)
}

/// Inverse of [`l_from_eta`] given the `(U, L)` pair:
/// `eta_t = L_t - ∫ sigma_{U,L}(J_s) ds - sum ΔU_s ΔL_s / (1+ΔU_s)`,
/// i.e. `eta = L - [U, eta]` unfolded (the bracket uses
/// `sigma_{U,eta} = sigma_{U,L}` and `Δeta = ΔL/(1+ΔU)`).
pub fn eta_from_l(ul: &SamplePath) -> Result<SamplePath> {
    ul.require_dim(2, "eta_from_l")?;
    check_no_minus_one_jumps(ul)?;
    let n = ul.len();
    let cross = ul.cumulative_cov(0, 1);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut correction = 0.0;
    for k in 1..n {
        let du = ul.jumps[0][k];
        let dl = ul.jumps[1][k];
        if du != 0.0 && dl != 0.0 {
            correction -= du * dl / (1.0 + du);
        }
        jumps[k] = dl / (1.0 + du);
        values[k] = ul.values[1][k] - cross[k] + correction;
    }
    let mut out = ul.component(1)?;
    out.values[0] = values;
    out.jumps[0] = jumps;
    Ok(out)
}

/// Bivariate `(xi, eta)` pair recovered from a `(U, L)` driver path.
pub fn xieta_from_ul(ul: &SamplePath) -> Result<SamplePath> {
    ul.require_dim(2, "xieta_from_ul")?;
    let xi = xi_from_u(&ul.component(0)?)?;
    let eta = eta_from_l(ul)?;
    let cross: Vec<f64> = ul.diffusion_cov.iter().map(|m| -m[1]).collect();
    SamplePath::pair(&xi, &eta, &cross)
}

/// Driver of the reciprocal exponential, `H = Log(E(U)^{-1})`:
/// `H_t = -U_t + ∫ sigma_U^2(J_s) ds + sum (ΔU_s - ΔU_s/(1+ΔU_s))`,
/// so that `E(H) = E(U)^{-1}`. Note the full (not halved) variance term.
pub fn h_path(u: &SamplePath) -> Result<SamplePath> {
    u.require_dim(1, "h_path")?;
    check_no_minus_one_jumps(u)?;
    let n = u.len();
    let cqv = u.cumulative_cov(0, 0);
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    let mut correction = 0.0;
    for k in 1..n {
        let du = u.jumps[0][k];
        if du != 0.0 {
            correction += du - du / (1.0 + du);
            jumps[k] = -du / (1.0 + du);
        }
        values[k] = -u.values[0][k] + cqv[k] + correction;
    }
    Ok(u.derived_scalar(values, jumps, u.diffusion_cov.clone()))
}

/// Pointwise exponential `e^{-x}` of a scalar path, with its jumps.
pub fn exp_neg(x: &SamplePath) -> Result<SamplePath> {
    x.require_dim(1, "exp_neg")?;
    let n = x.len();
    let mut values = vec![0.0; n];
    let mut jumps = vec![0.0; n];
    for k in 0..n {
        values[k] = (-x.values[0][k]).exp();
        if x.jumps[0][k] != 0.0 {
            jumps[k] = values[k] - (-x.pre_value(0, k)).exp();
        }
    }
    Ok(x.derived_scalar(values, jumps, x.diffusion_cov.clone()))
}

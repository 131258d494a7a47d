//! Transmit-power minimization under per-user SINR targets by partially
//! proximal ADMM.
//!
//! With `Y = U†GW`, the QoS constraints become the second-order cones
//! `Y_kk ≥ √(Γ_k(Σ_{j≠k}|Y_kj|² + σ²))` on the rows of `Y`. The augmented
//! Lagrangian
//!
//! `‖W‖² + ⟨λ, r⟩ + (ρ_λ/2)‖r‖² + ⟨μ, Y − U†GW⟩ + (ρ_μ/2)‖Y − U†GW‖²`,
//!
//! with `r = (I − iZ₀B)U − (I + iZ₀B)H`, is minimized block by block in the
//! order `Y → W → B → U`, followed by the updates of `λ` and `μ`.

use std::time::Instant;

use nalgebra::{Complex, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::Scenario;
use crate::error::{param, Error, Result};
use crate::linalg::{hermitian_part, inner, shifted_cayley_factor, solve_hpd};
use crate::report::{IterationRecord, Status};
use crate::riscore::{b_to_theta, cross_gains, sinr_and_rate, sinr_and_rate_theta, solve_b_subproblem, Scattering, Susceptance};
use crate::scalar::{creal, lit, to_f64, CMat, Real};
use crate::scaling::Scaling;
use crate::sumrate::{b_subproblem_data, bilinear_residual, check, exact_u, rel_change, scaled_matched_filter, RhoSchedule, RunReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerMinParams<T: Real> {
    /// Penalty on the bilinear constraint.
    pub rho_lambda: T,
    /// Penalty on `Y = U†GW`.
    pub rho_mu: T,
    /// Proximal weight on the susceptance.
    pub xi: T,
    pub max_iters: usize,
    /// Tolerance on both relative primal residuals.
    pub tol_residual: T,
    pub tol_change: T,
    /// Relative SINR slack allowed by the final certificate.
    pub tol_qos: T,
    /// Scales both penalties together when the residuals stall.
    pub adapt_rho: Option<RhoSchedule>,
    /// Record Lagrangian descent and multiplier-identity diagnostics.
    pub diagnostics: bool,
}

impl<T: Real> Default for PowerMinParams<T> {
    fn default() -> Self {
        let rho_lambda = lit::<T>(50.0);
        Self {
            rho_lambda,
            rho_mu: lit(5.0),
            xi: lit::<T>(1e-3) * rho_lambda,
            max_iters: 5000,
            tol_residual: lit(1e-5),
            tol_change: lit(1e-5),
            tol_qos: lit(1e-4),
            adapt_rho: Some(RhoSchedule { factor: 2.0, window: 200, min_decrease: 0.01, cap: 1e3 }),
            diagnostics: false,
        }
    }
}

impl<T: Real> PowerMinParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.rho_lambda, "rho_lambda"),
            (self.rho_mu, "rho_mu"),
            (self.xi, "xi"),
            (self.tol_residual, "tol_residual"),
            (self.tol_change, "tol_change"),
            (self.tol_qos, "tol_qos"),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(param(name, "must be positive and finite"));
            }
        }
        if self.rho_lambda < self.rho_mu {
            return Err(param("rho_lambda", "must be at least rho_mu"));
        }
        if self.max_iters == 0 {
            return Err(param("max_iters", "must be at least 1"));
        }
        if let Some(s) = &self.adapt_rho {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMinState<T: Real> {
    /// `K × K` auxiliary copy of `U†GW`; row `k` belongs to user `k`.
    pub yk: CMat<T>,
    pub w: CMat<T>,
    pub b: Susceptance<T>,
    pub u: CMat<T>,
    pub lambda: CMat<T>,
    /// `K × K` multiplier of `Y = U†GW`.
    pub mu: CMat<T>,
}

impl<T: Real> PowerMinState<T> {
    /// `U⁰` solves the constraint exactly for `B⁰`, `W⁰ = G†U⁰/‖G†U⁰‖_F`
    /// scaled to `w_norm`, `Y⁰` is the projection of `U⁰†GW⁰`.
    pub fn initial(s: &Scenario<T>, b0: Option<Susceptance<T>>, w_norm: T) -> Result<Self> {
        let b = b0.unwrap_or_else(|| Susceptance::zeros(s.m()));
        if !b.conforms_to(&s.mask) {
            return Err(param("init", "initial susceptance violates the architecture mask"));
        }
        let u = exact_u(&b, s)?;
        let w = scaled_matched_filter(s, &u, w_norm);
        let k = s.k();
        let mut st = Self {
            yk: CMat::zeros(k, k),
            w,
            b,
            u,
            lambda: CMat::zeros(s.m(), k),
            mu: CMat::zeros(k, k),
        };
        st.yk = update_y_pm(&st, s, T::one())?;
        Ok(st)
    }
}

/// Which branch of the multiplier `η` the projection took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QosCase {
    /// Already feasible, `η = 0`.
    Inside,
    /// `a_kk > 0`, `η ∈ (0, 1)`.
    Shrink,
    /// `a_kk = 0`, `η = 1`.
    Pivot,
    /// `a_kk < 0`, `η ∈ (1, ∞)`.
    Flip,
}

#[derive(Debug, Clone)]
pub struct QosProjection<T: Real> {
    pub row: DVector<Complex<T>>,
    pub eta: T,
    pub case: QosCase,
}

fn off_energy<T: Real>(a: &DVector<Complex<T>>, k: usize) -> T {
    a.iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .fold(T::zero(), |acc, (_, z)| acc + z.norm_sqr())
}

/// Euclidean projection of row `a` (diagonal entry at index `k`) onto
/// `{r : r_k real, r_k ≥ √(Γ(Σ_{j≠k}|r_j|² + σ²))}`.
///
/// The solution is `r_k = a_k/(1−η)`, `r_j = a_j/(1+Γη)`; `η` is the root of
/// `a_k²/(1−η)² − ΓS/(1+Γη)² − Γσ²` in the interval fixed by the sign of `a_k`,
/// found by bisection.
pub fn project_qos_row<T: Real>(a: &DVector<Complex<T>>, k: usize, gamma: T, sigma2: T) -> Result<QosProjection<T>> {
    if k >= a.len() {
        return Err(Error::Shape(format!("diagonal index {k} out of range for row of length {}", a.len())));
    }
    if !(gamma > T::zero() && gamma.is_finite()) {
        return Err(param("gamma", "must be positive and finite"));
    }
    if !(sigma2 > T::zero() && sigma2.is_finite()) {
        return Err(param("sigma2", "must be positive and finite"));
    }
    let akk = a[k].re;
    let s = off_energy(a, k);
    if akk >= (gamma * (s + sigma2)).sqrt() {
        let mut row = a.clone();
        row[k] = creal(akk);
        return Ok(QosProjection { row, eta: T::zero(), case: QosCase::Inside });
    }

    let one = T::one();
    let h = |eta: T| {
        let d = one + gamma * eta;
        akk * akk / ((one - eta) * (one - eta)) - gamma * s / (d * d) - gamma * sigma2
    };
    let bisect = |mut lo: T, mut hi: T, lo_feasible: bool| {
        for _ in 0..2000 {
            let mid = (lo + hi) * lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            let feasible_mid = h(mid) >= T::zero();
            if feasible_mid == lo_feasible {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo_feasible {
            lo
        } else {
            hi
        }
    };

    let (eta, case) = if akk > T::zero() {
        (bisect(T::zero(), one, false), QosCase::Shrink)
    } else if akk == T::zero() {
        (one, QosCase::Pivot)
    } else {
        let mut hi = lit::<T>(2.0);
        let mut tries = 0;
        while h(hi) >= T::zero() {
            hi = one + (hi - one) * lit(2.0);
            tries += 1;
            if tries > 2000 || !hi.is_finite() {
                return Err(Error::Internal(format!(
                    "QoS projection: no bracket for a_kk = {akk}, S = {s}, gamma = {gamma}, sigma2 = {sigma2}"
                )));
            }
        }
        (bisect(one, hi, true), QosCase::Flip)
    };

    let shrink = creal(one / (one + gamma * eta));
    let mut row = a * shrink;
    // The constraint is active; place the diagonal exactly on the cone.
    row[k] = creal((gamma * (off_energy(&row, k) + sigma2)).sqrt());
    Ok(QosProjection { row, eta, case })
}

/// Largest residual of the projection's KKT system, relative to
/// `1 + ‖a‖ + √(Γσ²)`: stationarity in the diagonal and off-diagonal
/// entries, primal feasibility, complementarity and `η ≥ 0`.
pub fn qos_kkt_residual<T: Real>(a: &DVector<Complex<T>>, k: usize, gamma: T, sigma2: T, p: &QosProjection<T>) -> T {
    let scale = T::one() + a.norm() + (gamma * sigma2).sqrt();
    let r = &p.row;
    let eta = p.eta;
    let mut worst = (r[k].im).abs();
    worst = worst.max(((T::one() - eta) * r[k].re - a[k].re).abs());
    for j in 0..a.len() {
        if j != k {
            worst = worst.max((r[j] * creal(T::one() + gamma * eta) - a[j]).norm_sqr().sqrt());
        }
    }
    let cone = (gamma * (off_energy(r, k) + sigma2)).sqrt();
    worst = worst.max((cone - r[k].re).max(T::zero()));
    worst = worst.max(eta * (r[k].re - cone).abs());
    worst = worst.max((-eta).max(T::zero()));
    worst / scale
}

/// `Y = Π_𝒴(U†GW − μ/ρ_μ)`, row by row.
pub fn update_y_pm<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>, rho_mu: T) -> Result<CMat<T>> {
    let target = cross_gains(&state.u, &state.w, &s.g)? - &state.mu * creal(T::one() / rho_mu);
    let k = s.k();
    let mut y = CMat::zeros(k, k);
    for row in 0..k {
        let a = DVector::from_iterator(k, target.row(row).iter().cloned());
        let p = project_qos_row(&a, row, s.gamma[row], s.sigma2)?;
        y.set_row(row, &p.row.transpose());
    }
    Ok(y)
}

/// `(2I + ρ_μ G†UU†G) W = G†U(μ + ρ_μ Y)`
pub fn update_w_pm<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>, params: &PowerMinParams<T>) -> Result<CMat<T>> {
    let gu = s.g.adjoint() * &state.u;
    let n = s.n();
    let sys = CMat::<T>::identity(n, n) * creal(lit(2.0)) + (&gu * gu.adjoint()) * creal(params.rho_mu);
    let rhs = &gu * (&state.mu + &state.yk * creal(params.rho_mu));
    solve_hpd(hermitian_part(&sys), &rhs, "W-update")
}

/// Same masked proximal least squares as the sum-rate susceptance update,
/// with `λ/ρ_λ` in the target and `ξ_eff = ξ/ρ_λ`.
pub fn update_b_pm<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>, params: &PowerMinParams<T>) -> Result<Susceptance<T>> {
    let (mmat, gmat) = b_subproblem_data(&state.u, &s.h, &state.lambda, params.rho_lambda, s.z0);
    solve_b_subproblem(&mmat, &gmat, params.xi / params.rho_lambda, &state.b, &s.mask)
}

/// `[ρ_λ(I + Z₀²B²) + ρ_μ GWW†G†] U
///   = −(I + iZ₀B)λ + ρ_λ(I + iZ₀B)²H + GWμ† + ρ_μ GWY†`
pub fn update_u_pm<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>, params: &PowerMinParams<T>) -> Result<CMat<T>> {
    let pd = shifted_cayley_factor(state.b.matrix(), s.z0, T::one());
    let gw = &s.g * &state.w;
    let sys = (&pd * pd.adjoint()) * creal(params.rho_lambda) + (&gw * gw.adjoint()) * creal(params.rho_mu);
    let rhs = &pd * (&pd * &s.h * creal(params.rho_lambda) - &state.lambda)
        + &gw * (state.mu.adjoint() + state.yk.adjoint() * creal(params.rho_mu));
    solve_hpd(hermitian_part(&sys), &rhs, "U-update")
}

/// `λ ← λ + ρ_λ r`, `μ ← μ + ρ_μ(Y − U†GW)`.
pub fn update_duals<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>, params: &PowerMinParams<T>) -> Result<(CMat<T>, CMat<T>)> {
    let r = bilinear_residual(&state.b, &state.u, &s.h, s.z0);
    let ry = &state.yk - cross_gains(&state.u, &state.w, &s.g)?;
    Ok((
        &state.lambda + r * creal(params.rho_lambda),
        &state.mu + ry * creal(params.rho_mu),
    ))
}

/// Augmented Lagrangian (minimized by the primal blocks).
pub fn lagrangian_pm<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>, params: &PowerMinParams<T>) -> Result<T> {
    let r = bilinear_residual(&state.b, &state.u, &s.h, s.z0);
    let ry = &state.yk - cross_gains(&state.u, &state.w, &s.g)?;
    let half = lit::<T>(0.5);
    Ok(state.w.norm_squared()
        + inner(&state.lambda, &r)
        + params.rho_lambda * half * r.norm_squared()
        + inner(&state.mu, &ry)
        + params.rho_mu * half * ry.norm_squared())
}

/// Relative error of `(I + iZ₀B)λ = GWμ†`, which holds after every sweep.
pub fn multiplier_relation_error<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>) -> T {
    let pd = shifted_cayley_factor(state.b.matrix(), s.z0, T::one());
    let lhs = &pd * &state.lambda;
    let rhs = &s.g * &state.w * state.mu.adjoint();
    let scale = lhs.norm().max(rhs.norm());
    let err = (&lhs - &rhs).norm();
    if scale > T::zero() {
        err / scale
    } else {
        err
    }
}

/// Smallest singular value of `G†U`.
pub fn min_singular_gu<T: Real>(g: &CMat<T>, u: &CMat<T>) -> T {
    let gu = g.adjoint() * u;
    gu.singular_values().iter().fold(T::max_value().unwrap_or_else(T::one), |a, &v| a.min(v))
}

/// Interference-free power that meets every target when each element's
/// contribution adds coherently: `Σ_k Γ_kσ² / (Σ_i |h_ki|‖g_i‖)²`, with
/// `g_i` the `i`-th row of `G`.
pub fn reference_power<T: Real>(s: &Scenario<T>) -> T {
    let row_norms: Vec<T> = (0..s.m()).map(|i| s.g.row(i).norm()).collect();
    let mut total = T::zero();
    for k in 0..s.k() {
        let gain = (0..s.m()).fold(T::zero(), |a, i| a + s.h[(i, k)].norm_sqr().sqrt() * row_norms[i]);
        total += s.gamma[k] * s.sigma2 / (gain * gain);
    }
    if total > T::zero() && total.is_finite() {
        total
    } else {
        T::one()
    }
}

/// Final solution of a power-min run, in SI units.
#[derive(Debug, Clone)]
pub struct PowerMinOutcome<T: Real> {
    pub b: Susceptance<T>,
    pub theta: Scattering<T>,
    pub w: CMat<T>,
    /// `‖W‖²_F` in watts.
    pub power: T,
    /// SINRs recomputed through the final `Θ`.
    pub sinr: Vec<T>,
    /// `min_k SINR_k / Γ_k`.
    pub qos_margin: T,
    pub residual_rel: T,
    pub residual_y_rel: T,
}

pub type PowerMinReport<T> = RunReport<PowerMinState<T>, PowerMinOutcome<T>>;

fn to_si<T: Real>(st: &PowerMinState<T>, sc: &Scaling<T>) -> PowerMinState<T> {
    let e = sc.h * sc.g * sc.w;
    PowerMinState {
        yk: &st.yk * creal(e),
        w: &st.w * creal(sc.w),
        b: st.b.clone(),
        u: &st.u * creal(sc.h),
        lambda: &st.lambda * creal(sc.w * sc.w / sc.h),
        mu: &st.mu * creal(sc.w * sc.w / e),
    }
}

/// Runs the sweep `Y → W → B → U → λ → μ` and certifies the final point
/// against the SINR targets.
pub fn solve_powermin<T: Real>(
    scenario: &Scenario<T>,
    params: &PowerMinParams<T>,
    init: Option<Susceptance<T>>,
) -> Result<PowerMinReport<T>> {
    params.validate()?;
    if scenario.gamma.iter().any(|g| !(*g > T::zero() && g.is_finite())) {
        return Err(param("gamma", "SINR targets must be positive and finite"));
    }
    let start = Instant::now();
    // Pick s_w so that the normalized noise power is one.
    let base = Scaling::for_scenario(scenario, T::one());
    let sw = scenario.sigma2.sqrt() / (base.h * base.g);
    let scaling = Scaling { w: sw, ..base };
    let s = scaling.apply(scenario);
    // Minimizing ‖W‖²/p_ref with penalties ρ is the same as minimizing ‖W‖²
    // with penalties ρ·p_ref, so the user-facing penalties are relative to the
    // scale of the optimal power.
    let p_ref = reference_power(&s);
    let mut p = PowerMinParams {
        rho_lambda: params.rho_lambda * p_ref,
        rho_mu: params.rho_mu * p_ref,
        xi: params.xi * p_ref,
        ..params.clone()
    };
    let rho0 = p.rho_lambda;
    let mut st = PowerMinState::initial(&s, init, T::one() / sw)?;
    let h_norm = s.h.norm().max(T::default_epsilon());

    let mut history = Vec::new();
    let mut status = Status::MaxIterations;
    let mut residual_rel = T::zero();
    let mut residual_y_rel = T::zero();
    for it in 0..params.max_iters {
        let mut viol = T::zero();
        let mut track = |before: Option<T>, st: &PowerMinState<T>, p: &PowerMinParams<T>| -> Result<Option<T>> {
            if !p.diagnostics {
                return Ok(None);
            }
            let after = lagrangian_pm(st, &s, p)?;
            if let Some(b) = before {
                viol = viol.max((after - b) / (T::one() + b.abs()));
            }
            Ok(Some(after))
        };
        let mut l = track(None, &st, &p)?;

        let y = update_y_pm(&st, &s, p.rho_mu)?;
        check(&y, "Y", it)?;
        let dy = rel_change(y.norm(), (&y - &st.yk).norm());
        st.yk = y;
        l = track(l, &st, &p)?;

        let w = update_w_pm(&st, &s, &p)?;
        check(&w, "W", it)?;
        let dw = rel_change(w.norm(), (&w - &st.w).norm());
        st.w = w;
        l = track(l, &st, &p)?;

        let b = update_b_pm(&st, &s, &p)?;
        if !b.is_finite() {
            return Err(Error::NonFinite { block: "B", iter: it });
        }
        let db = rel_change(b.matrix().norm() * s.z0, (b.matrix() - st.b.matrix()).norm() * s.z0);
        st.b = b;
        l = track(l, &st, &p)?;

        let u = update_u_pm(&st, &s, &p)?;
        check(&u, "U", it)?;
        let du = rel_change(u.norm(), (&u - &st.u).norm());
        st.u = u;
        track(l, &st, &p)?;

        let (lambda, mu) = update_duals(&st, &s, &p)?;
        check(&lambda, "lambda", it)?;
        check(&mu, "mu", it)?;
        let dl = rel_change(lambda.norm(), (&lambda - &st.lambda).norm())
            .max(rel_change(mu.norm(), (&mu - &st.mu).norm()));
        st.lambda = lambda;
        st.mu = mu;

        let r = bilinear_residual(&st.b, &st.u, &s.h, s.z0).norm();
        residual_rel = r / h_norm;
        let ry = (&st.yk - cross_gains(&st.u, &st.w, &s.g)?).norm();
        residual_y_rel = ry / st.yk.norm().max(T::one());
        let max_change = [dy, dw, db, du].into_iter().fold(T::zero(), |a, v| a.max(v));
        let power_si = st.w.norm_squared() * sw * sw;
        history.push(IterationRecord {
            iter: it + 1,
            surrogate: to_f64(power_si),
            objective: to_f64(power_si),
            residual: to_f64(r),
            residual_rel: to_f64(residual_rel),
            residual_y_rel: to_f64(residual_y_rel),
            max_change: to_f64(max_change),
            multiplier_change: to_f64(dl),
            rho: to_f64(p.rho_lambda / p_ref),
            elapsed: start.elapsed().as_secs_f64(),
            norm_w: to_f64(st.w.norm() * sw),
            norm_u: to_f64(st.u.norm() * scaling.h),
            norm_lambda: to_f64(st.lambda.norm()),
            norm_mu: to_f64(st.mu.norm()),
            min_singular_gu: to_f64(min_singular_gu(&s.g, &st.u)),
            lagrangian_violation: if params.diagnostics { to_f64(viol) } else { f64::NAN },
            multiplier_identity: if params.diagnostics {
                to_f64(multiplier_relation_error(&st, &s))
            } else {
                f64::NAN
            },
        });

        if residual_rel < params.tol_residual && residual_y_rel < params.tol_residual && max_change < params.tol_change {
            status = Status::Converged;
            break;
        }
        if let Some(sched) = &params.adapt_rho {
            let n = history.len();
            let stall = |h: &IterationRecord| h.residual_rel.max(h.residual_y_rel);
            let now = residual_rel.max(residual_y_rel);
            let past = stall(&history[n.saturating_sub(1 + sched.window)]);
            if now >= params.tol_residual && sched.stalled(n, to_f64(now), past) {
                let factor = (lit::<T>(sched.factor)).min(rho0 * lit(sched.cap) / p.rho_lambda);
                p.rho_lambda *= factor;
                p.rho_mu *= factor;
                p.xi *= factor;
            }
        }
    }

    let si = to_si(&st, &scaling);
    let theta = b_to_theta(&si.b, scenario.z0)?;
    let q = sinr_and_rate_theta(theta.matrix(), &scenario.h, &si.w, &scenario.g, scenario.sigma2)?;
    let qos_margin = q
        .sinr
        .iter()
        .zip(&scenario.gamma)
        .fold(T::max_value().unwrap_or_else(T::one), |a, (&v, &g)| a.min(v / g));
    if qos_margin < T::one() - params.tol_qos {
        status = Status::InfeasibleSolution;
    }
    let outcome = PowerMinOutcome {
        b: si.b.clone(),
        theta,
        w: si.w.clone(),
        power: si.w.norm_squared(),
        sinr: q.sinr,
        qos_margin,
        residual_rel,
        residual_y_rel,
    };
    Ok(RunReport {
        status,
        iterations: history.len(),
        history,
        state: si,
        outcome,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// SINRs of the iterate `(U, W)` without reconstructing `Θ`.
pub fn iterate_sinr<T: Real>(state: &PowerMinState<T>, s: &Scenario<T>) -> Result<Vec<T>> {
    Ok(sinr_and_rate(&state.u, &state.w, &s.g, s.sigma2)?.sinr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[(f64, f64)]) -> DVector<Complex<f64>> {
        DVector::from_iterator(v.len(), v.iter().map(|&(re, im)| Complex::new(re, im)))
    }

    #[test]
    fn feasible_row_unchanged() {
        let a = row(&[(5.0, 0.0), (0.3, -0.2), (0.1, 0.4)]);
        let p = project_qos_row(&a, 0, 2.0, 0.5).unwrap();
        assert_eq!(p.case, QosCase::Inside);
        assert_eq!(p.row, a);
    }

    #[test]
    fn zero_diagonal_closed_form() {
        let a = row(&[(0.6, 0.8), (0.0, 0.0), (-1.0, 0.5)]);
        let (gamma, sigma2) = (1.5, 0.2);
        let p = project_qos_row(&a, 1, gamma, sigma2).unwrap();
        assert_eq!(p.case, QosCase::Pivot);
        let s: f64 = 1.0 + 1.25;
        let want = (gamma * s / ((1.0 + gamma) * (1.0 + gamma)) + gamma * sigma2).sqrt();
        assert!((p.row[1].re - want).abs() < 1e-14);
        assert!((p.row[0] - a[0] / (1.0 + gamma)).norm() < 1e-14);
    }

    #[test]
    fn negative_diagonal_takes_flip_branch() {
        let a = row(&[(0.2, 0.1), (0.5, 0.0), (-0.7, 0.0)]);
        let p = project_qos_row(&a, 2, 1.6, 0.3).unwrap();
        assert_eq!(p.case, QosCase::Flip);
        assert!(p.eta > 1.0);
        assert!(qos_kkt_residual(&a, 2, 1.6, 0.3, &p) < 1e-12);
    }

    #[test]
    fn bad_inputs_rejected() {
        let a = row(&[(1.0, 0.0)]);
        assert!(project_qos_row(&a, 1, 1.0, 1.0).is_err());
        assert!(project_qos_row(&a, 0, 0.0, 1.0).is_err());
        assert!(project_qos_row(&a, 0, 1.0, -1.0).is_err());
    }

    #[test]
    fn params_ordering_enforced() {
        let p = PowerMinParams::<f64> { rho_lambda: 1.0, rho_mu: 2.0, ..Default::default() };
        assert!(p.validate().is_err());
        assert!(PowerMinParams::<f64>::default().validate().is_ok());
    }
}

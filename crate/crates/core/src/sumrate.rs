//! Sum-rate maximization by partially proximal ADMM.
//!
//! The scattering matrix is eliminated through `u_k = Θ†h_k`, which turns
//! the Cayley relation into the bilinear constraint
//! `(I − iZ₀B)U = (I + iZ₀B)H`. The log-SINR objective is replaced by its
//! fractional-programming surrogate `R̃(y, γ, W, U)`, and one sweep updates
//! `y → γ → W → B → U → λ`, with proximal terms on `W` (weight `τ`) and `B`
//! (weight `ξ`).
//!
//! All update functions take the scenario they are given at face value. The
//! driver [`solve_sumrate`] runs them on a normalized copy (see
//! [`crate::scaling`]) and maps the result back to SI units.

use std::time::Instant;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::Scenario;
use crate::error::{param, Error, Result};
use crate::linalg::{all_finite, complexify, hermitian_part, inner, shifted_cayley_factor, solve_hpd};
use crate::report::{IterationRecord, Status};
use crate::riscore::{
    b_to_theta, cross_gains, sinr_and_rate, sinr_and_rate_theta, solve_b_subproblem, Scattering,
    Susceptance,
};
use crate::scalar::{creal, lit, to_f64, CMat, Real};
use crate::scaling::Scaling;

/// Multiplicative penalty schedule: when the relative residual has not
/// dropped by `min_decrease` over `window` iterations, multiply `ρ` by
/// `factor`, never exceeding `cap × ρ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoSchedule {
    pub factor: f64,
    pub window: usize,
    pub min_decrease: f64,
    pub cap: f64,
}

impl RhoSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.factor > 1.0) || self.window == 0 || !(self.cap >= 1.0) {
            return Err(param("adapt_rho", "need factor > 1, window ≥ 1, cap ≥ 1"));
        }
        Ok(())
    }

    /// Whether the penalty should grow after `n` recorded sweeps, given the
    /// stall measure `now` and the value `window` sweeps earlier.
    pub(crate) fn stalled(&self, n: usize, now: f64, past: f64) -> bool {
        n % self.window == 0 && n > self.window && now > past * (1.0 - self.min_decrease)
    }
}

impl Default for RhoSchedule {
    fn default() -> Self {
        Self {
            factor: 1.5,
            window: 100,
            min_decrease: 0.01,
            cap: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SumRateParams<T: Real> {
    /// Penalty `ρ` on the bilinear constraint.
    pub rho: T,
    /// Proximal weight `τ` on the beamformer.
    pub tau: T,
    /// Proximal weight `ξ` on the susceptance.
    pub xi: T,
    pub max_iters: usize,
    /// Relative primal residual tolerance, `‖r‖_F / ‖H‖_F`.
    pub tol_residual: T,
    /// Largest relative block change between successive sweeps.
    pub tol_change: T,
    pub adapt_rho: Option<RhoSchedule>,
    /// Evaluate the Lagrangian after every block and the multiplier
    /// identity after every sweep. Roughly doubles the cost of a sweep.
    pub diagnostics: bool,
}

impl<T: Real> Default for SumRateParams<T> {
    fn default() -> Self {
        let rho = lit::<T>(1.0);
        Self {
            rho,
            tau: lit(1e-3),
            xi: lit::<T>(1e-3) * rho,
            max_iters: 3000,
            tol_residual: lit(1e-5),
            tol_change: lit(1e-6),
            adapt_rho: None,
            diagnostics: false,
        }
    }
}

impl<T: Real> SumRateParams<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T, name: &'static str| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(param(name, "must be positive and finite"))
            }
        };
        pos(self.rho, "rho")?;
        pos(self.tau, "tau")?;
        pos(self.xi, "xi")?;
        pos(self.tol_residual, "tol_residual")?;
        pos(self.tol_change, "tol_change")?;
        if self.max_iters == 0 {
            return Err(param("max_iters", "must be at least 1"));
        }
        if let Some(s) = &self.adapt_rho {
            s.validate()?;
        }
        Ok(())
    }
}

/// Primal blocks and multiplier of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SumRateState<T: Real> {
    pub y: DVector<Complex<T>>,
    pub gamma: DVector<T>,
    /// `N × K` beamformer.
    pub w: CMat<T>,
    pub b: Susceptance<T>,
    /// `M × K`, column `k` is `u_k`.
    pub u: CMat<T>,
    /// `M × K` multiplier of the bilinear constraint.
    pub lambda: CMat<T>,
}

impl<T: Real> SumRateState<T> {
    /// Feasible starting point: `U⁰ = (I − iZ₀B⁰)⁻¹(I + iZ₀B⁰)H`,
    /// `W⁰ = √P_T · G†U⁰ / ‖G†U⁰‖_F`, zero multiplier.
    pub fn initial(s: &Scenario<T>, b0: Option<Susceptance<T>>) -> Result<Self> {
        let b = b0.unwrap_or_else(|| Susceptance::zeros(s.m()));
        if !b.conforms_to(&s.mask) {
            return Err(param("init", "initial susceptance violates the architecture mask"));
        }
        let u = exact_u(&b, s)?;
        let w = scaled_matched_filter(s, &u, s.p_t.sqrt());
        Ok(Self {
            y: DVector::zeros(s.k()),
            gamma: DVector::zeros(s.k()),
            w,
            b,
            lambda: CMat::zeros(s.m(), s.k()),
            u,
        })
    }
}

/// `G†U` scaled to Frobenius norm `norm`; zero if `G†U` vanishes.
pub(crate) fn scaled_matched_filter<T: Real>(s: &Scenario<T>, u: &CMat<T>, norm: T) -> CMat<T> {
    let gu = s.g.adjoint() * u;
    let n = gu.norm();
    if n > T::zero() {
        gu * creal(norm / n)
    } else {
        gu
    }
}

/// Exact solution of the bilinear constraint for a fixed `B`: `U = Θ†H`.
pub fn exact_u<T: Real>(b: &Susceptance<T>, s: &Scenario<T>) -> Result<CMat<T>> {
    let lhs = shifted_cayley_factor(b.matrix(), s.z0, -T::one());
    let rhs = shifted_cayley_factor(b.matrix(), s.z0, T::one()) * &s.h;
    lhs.lu().solve(&rhs).ok_or(Error::Singular("I − iZ₀B"))
}

/// `(I − iZ₀B)U − (I + iZ₀B)H = (U − H) − iZ₀B(U + H)`.
pub fn bilinear_residual<T: Real>(b: &Susceptance<T>, u: &CMat<T>, h: &CMat<T>, z0: T) -> CMat<T> {
    let bz = complexify(b.matrix()) * Complex::new(T::zero(), z0);
    (u - h) - bz * (u + h)
}

/// `y_k = u_k†Gw_k / (Σ_j |u_k†Gw_j|² + σ²)`
pub fn update_y<T: Real>(state: &SumRateState<T>, s: &Scenario<T>) -> Result<DVector<Complex<T>>> {
    let e = cross_gains(&state.u, &state.w, &s.g)?;
    Ok(DVector::from_iterator(
        e.nrows(),
        (0..e.nrows()).map(|k| {
            let denom = e.row(k).iter().fold(s.sigma2, |acc, z| acc + z.norm_sqr());
            e[(k, k)] / creal(denom)
        }),
    ))
}

/// `γ_k = |u_k†Gw_k|² / (Σ_{j≠k} |u_k†Gw_j|² + σ²)`
pub fn update_gamma<T: Real>(state: &SumRateState<T>, s: &Scenario<T>) -> Result<DVector<T>> {
    let q = sinr_and_rate(&state.u, &state.w, &s.g, s.sigma2)?;
    Ok(DVector::from_vec(q.sinr))
}

/// Result of the beamformer update.
#[derive(Debug, Clone)]
pub struct WUpdate<T: Real> {
    pub w: CMat<T>,
    /// Power-constraint multiplier `η*`.
    pub eta: T,
}

/// Proximal beamformer update: the QCQP
/// `min Σ_k (w_k†Qw_k − 2⟨c_k, w_k⟩) + (τ/2)‖W − Wᵗ‖²` s.t. `‖W‖²_F ≤ P_T`,
/// solved through the eigendecomposition of `Q` and a bisection on the
/// power multiplier.
pub fn update_w<T: Real>(state: &SumRateState<T>, s: &Scenario<T>, params: &SumRateParams<T>) -> Result<WUpdate<T>> {
    let gu = s.g.adjoint() * &state.u; // N × K
    let n = s.n();
    let k = s.k();
    let mut q = CMat::<T>::zeros(n, n);
    let mut rhs = CMat::<T>::zeros(n, k);
    let half_tau = params.tau * lit(0.5);
    for j in 0..k {
        let scale = (T::one() + state.gamma[j]) * state.y[j].norm_sqr();
        let col = gu.column(j);
        q += (&col * col.adjoint()) * creal(scale);
        let c = &col * (state.y[j] * creal(T::one() + state.gamma[j]));
        rhs.set_column(j, &(c + state.w.column(j) * creal(half_tau)));
    }
    let eig = hermitian_part(&q).symmetric_eigen();
    let phi = eig.eigenvectors.adjoint() * &rhs;
    let row_energy: Vec<T> = (0..n)
        .map(|i| phi.row(i).iter().fold(T::zero(), |a, z| a + z.norm_sqr()))
        .collect();
    // Clamp tiny negative eigenvalues from rounding; Q is PSD.
    let d: Vec<T> = eig.eigenvalues.iter().map(|&v| v.max(T::zero()) + half_tau).collect();
    let power = |eta: T| {
        row_energy
            .iter()
            .zip(&d)
            .fold(T::zero(), |acc, (&e, &dn)| acc + e / ((dn + eta) * (dn + eta)))
    };

    let eta = if power(T::zero()) <= s.p_t {
        T::zero()
    } else {
        let mut lo = T::zero();
        let mut hi = rhs.norm() / s.p_t.sqrt();
        if !(power(hi) <= s.p_t) {
            return Err(Error::Internal(format!(
                "power bisection bracket failed: P(η_max) = {} > P_T = {}",
                power(hi),
                s.p_t
            )));
        }
        let tol = lit::<T>(1e-12) * s.p_t;
        for _ in 0..200 {
            let mid = (lo + hi) * lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            let p = power(mid);
            if p > s.p_t {
                lo = mid;
            } else {
                hi = mid;
                if s.p_t - p <= tol {
                    break;
                }
            }
        }
        hi
    };
    let scaled = DMatrix::from_fn(n, k, |i, j| phi[(i, j)] / creal(d[i] + eta));
    Ok(WUpdate {
        w: &eig.eigenvectors * scaled,
        eta,
    })
}

/// Real-space data `(M, Γ)` of the susceptance subproblem:
/// `M = [Re(iZ₀(U+H)), Im(iZ₀(U+H))]`, `Γ = [Re(U−H+λ/ρ), Im(U−H+λ/ρ)]`.
pub fn b_subproblem_data<T: Real>(
    u: &CMat<T>,
    h: &CMat<T>,
    lambda: &CMat<T>,
    rho: T,
    z0: T,
) -> (DMatrix<T>, DMatrix<T>) {
    let (m, k) = u.shape();
    let lhs = (u + h) * Complex::new(T::zero(), z0);
    let target = (u - h) + lambda * creal(T::one() / rho);
    let split = |a: &CMat<T>| DMatrix::from_fn(m, 2 * k, |i, c| if c < k { a[(i, c)].re } else { a[(i, c - k)].im });
    (split(&lhs), split(&target))
}

/// Susceptance update: masked proximal least squares with `ξ_eff = ξ/ρ`.
pub fn update_b<T: Real>(state: &SumRateState<T>, s: &Scenario<T>, params: &SumRateParams<T>) -> Result<Susceptance<T>> {
    let (mmat, gmat) = b_subproblem_data(&state.u, &s.h, &state.lambda, params.rho, s.z0);
    solve_b_subproblem(&mmat, &gmat, params.xi / params.rho, &state.b, &s.mask)
}

/// Closed-form `U` update, one Hermitian solve per user:
/// `[(1+γ_k)|y_k|² GWW†G† + (ρ/2)(I + Z₀²B²)] u_k
///   = (1+γ_k) ȳ_k G w_k − ½(I + iZ₀B)λ_k + (ρ/2)(I + iZ₀B)² h_k`.
pub fn update_u<T: Real>(state: &SumRateState<T>, s: &Scenario<T>, params: &SumRateParams<T>) -> Result<CMat<T>> {
    let m = s.m();
    let k = s.k();
    let pd = shifted_cayley_factor(state.b.matrix(), s.z0, T::one()); // I + iZ₀B
    let pp = &pd * pd.adjoint(); // I + Z₀²B²
    let gw = &s.g * &state.w;
    let gram = &gw * gw.adjoint();
    let half = lit::<T>(0.5);
    let rhs_common = &pd * (&pd * &s.h) * creal(half * params.rho) - &pd * &state.lambda * creal(half);
    let mut u = CMat::<T>::zeros(m, k);
    for j in 0..k {
        let a = (T::one() + state.gamma[j]) * state.y[j].norm_sqr();
        let sys = hermitian_part(&(&gram * creal(a) + &pp * creal(half * params.rho)));
        let rhs = gw.column(j) * (state.y[j].conj() * creal(T::one() + state.gamma[j])) + rhs_common.column(j);
        let sol = solve_hpd(sys, &CMat::from_column_slice(m, 1, rhs.as_slice()), "U-update")?;
        u.set_column(j, &sol.column(0));
    }
    Ok(u)
}

/// `λ ← λ + ρ((I − iZ₀B)U − (I + iZ₀B)H)`
pub fn update_lambda<T: Real>(state: &SumRateState<T>, s: &Scenario<T>, params: &SumRateParams<T>) -> CMat<T> {
    let r = bilinear_residual(&state.b, &state.u, &s.h, s.z0);
    &state.lambda + r * creal(params.rho)
}

/// Fractional-programming surrogate
/// `R̃ = Σ_k log(1+γ_k) − γ_k + (1+γ_k)(2Re(ȳ_k u_k†Gw_k) − |y_k|²(Σ_j|u_k†Gw_j|² + σ²))`.
pub fn surrogate_value<T: Real>(state: &SumRateState<T>, s: &Scenario<T>) -> Result<T> {
    let e = cross_gains(&state.u, &state.w, &s.g)?;
    let mut total = T::zero();
    for k in 0..e.nrows() {
        let g = state.gamma[k];
        let y = state.y[k];
        let denom = e.row(k).iter().fold(s.sigma2, |acc, z| acc + z.norm_sqr());
        let quad = lit::<T>(2.0) * (y.conj() * e[(k, k)]).re - y.norm_sqr() * denom;
        total += (T::one() + g).ln() - g + (T::one() + g) * quad;
    }
    Ok(total)
}

/// Augmented Lagrangian `R̃ − ⟨λ, r⟩ − (ρ/2)‖r‖²_F` (maximized by the primal blocks).
pub fn lagrangian<T: Real>(state: &SumRateState<T>, s: &Scenario<T>, rho: T) -> Result<T> {
    let r = bilinear_residual(&state.b, &state.u, &s.h, s.z0);
    Ok(surrogate_value(state, s)? - inner(&state.lambda, &r) - rho * lit(0.5) * r.norm_squared())
}

/// `∇_U R̃`, column `k` equal to `2(1+γ_k)(ȳ_k G w_k − |y_k|² GWW†G† u_k)`.
pub fn surrogate_gradient_u<T: Real>(state: &SumRateState<T>, s: &Scenario<T>) -> CMat<T> {
    let gw = &s.g * &state.w;
    let gram_u = &gw * (gw.adjoint() * &state.u);
    let mut grad = CMat::<T>::zeros(s.m(), s.k());
    for k in 0..s.k() {
        let two = lit::<T>(2.0) * (T::one() + state.gamma[k]);
        let col = gw.column(k) * state.y[k].conj() - gram_u.column(k) * creal(state.y[k].norm_sqr());
        grad.set_column(k, &(col * creal(two)));
    }
    grad
}

/// Relative error of `λ = (I + iZ₀B)⁻¹ ∇_U R̃`, which holds after every sweep.
pub fn multiplier_identity_error<T: Real>(state: &SumRateState<T>, s: &Scenario<T>) -> Result<T> {
    let grad = surrogate_gradient_u(state, s);
    let pd = shifted_cayley_factor(state.b.matrix(), s.z0, T::one());
    let pred = pd.lu().solve(&grad).ok_or(Error::Singular("I + iZ₀B"))?;
    let scale = state.lambda.norm().max(pred.norm());
    let err = (&state.lambda - pred).norm();
    Ok(if scale > T::zero() { err / scale } else { err })
}

/// Final solution of a sum-rate run, in SI units.
#[derive(Debug, Clone)]
pub struct SumRateOutcome<T: Real> {
    pub b: Susceptance<T>,
    pub theta: Scattering<T>,
    pub w: CMat<T>,
    /// Sum-rate (nats) evaluated with `h_k†ΘG` and the final `Θ`.
    pub rate_exact: T,
    /// Sum-rate with `U = (I − iZ₀B)⁻¹(I + iZ₀B)H`.
    pub rate_u: T,
    /// Sum-rate at the ADMM iterate `U`, which satisfies the constraint only
    /// up to the final residual.
    pub rate_iterate: T,
    /// `R̃` at the final state.
    pub surrogate: T,
    pub sinr: Vec<T>,
    pub power: T,
    pub residual_rel: T,
}

/// Output of [`solve_sumrate`].
#[derive(Debug, Clone)]
pub struct RunReport<S, O> {
    pub status: Status,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    /// Last state in SI units.
    pub state: S,
    pub outcome: O,
    pub elapsed: f64,
}

pub type SumRateReport<T> = RunReport<SumRateState<T>, SumRateOutcome<T>>;

pub(crate) fn rel_change<T: Real>(new: T, diff: T) -> T {
    diff / new.max(T::one())
}

pub(crate) fn check<T: Real>(a: &CMat<T>, block: &'static str, iter: usize) -> Result<()> {
    if all_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite { block, iter })
    }
}

fn to_si<T: Real>(st: &SumRateState<T>, sc: &Scaling<T>) -> SumRateState<T> {
    let yscale = T::one() / (sc.h * sc.g * sc.w);
    SumRateState {
        y: &st.y * creal(yscale),
        gamma: st.gamma.clone(),
        w: &st.w * creal(sc.w),
        b: st.b.clone(),
        u: &st.u * creal(sc.h),
        lambda: &st.lambda * creal(T::one() / sc.h),
    }
}

/// Runs the pp-ADMM sweep `y → γ → W → B → U → λ` until the relative
/// residual and block changes fall below tolerance or `max_iters` is hit.
pub fn solve_sumrate<T: Real>(
    scenario: &Scenario<T>,
    params: &SumRateParams<T>,
    init: Option<Susceptance<T>>,
) -> Result<SumRateReport<T>> {
    params.validate()?;
    let start = Instant::now();
    let scaling = Scaling::for_scenario(scenario, scenario.p_t.sqrt());
    let s = scaling.apply(scenario);
    let mut st = SumRateState::initial(&s, init)?;
    let mut p = params.clone();
    let rho0 = params.rho;
    let h_norm = s.h.norm().max(T::default_epsilon());

    let mut history = Vec::new();
    let mut status = Status::MaxIterations;
    let mut residual_rel = T::zero();
    for it in 0..params.max_iters {
        let mut viol = T::zero();
        let mut track = |before: Option<T>, st: &SumRateState<T>, p: &SumRateParams<T>| -> Result<Option<T>> {
            if !p.diagnostics {
                return Ok(None);
            }
            let after = lagrangian(st, &s, p.rho)?;
            if let Some(b) = before {
                viol = viol.max((b - after) / (T::one() + b.abs()));
            }
            Ok(Some(after))
        };
        let mut l = track(None, &st, &p)?;

        let y = update_y(&st, &s)?;
        let dy = (&y - &st.y).norm();
        st.y = y;
        l = track(l, &st, &p)?;

        let gamma = update_gamma(&st, &s)?;
        let dg = rel_change(gamma.norm(), (&gamma - &st.gamma).norm());
        st.gamma = gamma;
        l = track(l, &st, &p)?;

        let w = update_w(&st, &s, &p)?.w;
        check(&w, "W", it)?;
        let dw = rel_change(w.norm(), (&w - &st.w).norm());
        st.w = w;
        l = track(l, &st, &p)?;

        let b = update_b(&st, &s, &p)?;
        if !b.is_finite() {
            return Err(Error::NonFinite { block: "B", iter: it });
        }
        let db = rel_change(
            b.matrix().norm() * s.z0,
            (b.matrix() - st.b.matrix()).norm() * s.z0,
        );
        st.b = b;
        l = track(l, &st, &p)?;

        let u = update_u(&st, &s, &p)?;
        check(&u, "U", it)?;
        let du = rel_change(u.norm(), (&u - &st.u).norm());
        st.u = u;
        track(l, &st, &p)?;

        let lambda = update_lambda(&st, &s, &p);
        check(&lambda, "lambda", it)?;
        let dl = rel_change(lambda.norm(), (&lambda - &st.lambda).norm());
        st.lambda = lambda;

        let r = bilinear_residual(&st.b, &st.u, &s.h, s.z0).norm();
        residual_rel = r / h_norm;
        let dy_rel = rel_change(st.y.norm(), dy);
        let max_change = [dy_rel, dg, dw, db, du].into_iter().fold(T::zero(), |a, v| a.max(v));
        let objective = sinr_and_rate(&st.u, &st.w, &s.g, s.sigma2)?.rate;
        let identity = if p.diagnostics {
            to_f64(multiplier_identity_error(&st, &s)?)
        } else {
            f64::NAN
        };
        history.push(IterationRecord {
            iter: it + 1,
            surrogate: to_f64(surrogate_value(&st, &s)?),
            objective: to_f64(objective),
            residual: to_f64(r),
            residual_rel: to_f64(residual_rel),
            max_change: to_f64(max_change),
            multiplier_change: to_f64(dl),
            rho: to_f64(p.rho),
            elapsed: start.elapsed().as_secs_f64(),
            norm_w: to_f64(st.w.norm() * scaling.w),
            norm_u: to_f64(st.u.norm() * scaling.h),
            norm_lambda: to_f64(st.lambda.norm() / scaling.h),
            lagrangian_violation: if p.diagnostics { to_f64(viol) } else { f64::NAN },
            multiplier_identity: identity,
            ..Default::default()
        });

        if residual_rel < params.tol_residual && max_change < params.tol_change {
            status = Status::Converged;
            break;
        }
        if let Some(sched) = &params.adapt_rho {
            let n = history.len();
            let past = history[n.saturating_sub(1 + sched.window)].residual_rel;
            if residual_rel >= params.tol_residual && sched.stalled(n, to_f64(residual_rel), past) {
                p.rho = (p.rho * lit(sched.factor)).min(rho0 * lit(sched.cap));
            }
        }
    }

    let si = to_si(&st, &scaling);
    let theta = b_to_theta(&si.b, scenario.z0)?;
    let u_exact = exact_u(&si.b, scenario)?;
    let rate_u = sinr_and_rate(&u_exact, &si.w, &scenario.g, scenario.sigma2)?;
    let exact = sinr_and_rate_theta(theta.matrix(), &scenario.h, &si.w, &scenario.g, scenario.sigma2)?;
    let rate_iterate = sinr_and_rate(&si.u, &si.w, &scenario.g, scenario.sigma2)?.rate;
    let outcome = SumRateOutcome {
        b: si.b.clone(),
        theta,
        w: si.w.clone(),
        rate_exact: exact.rate,
        rate_u: rate_u.rate,
        rate_iterate,
        surrogate: surrogate_value(&si, scenario)?,
        sinr: exact.sinr,
        power: si.w.norm_squared(),
        residual_rel,
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

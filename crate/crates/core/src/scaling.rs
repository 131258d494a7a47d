//! Unit normalization applied before the ADMM iterations.
//!
//! Channels are in the 1e−2…1e−4 range and noise at 1e−11 W, so penalty
//! parameters written in SI units would mean very different things from one
//! geometry to the next. The solvers therefore run on an equivalent instance
//! with `H' = H/s_h`, `G' = G/s_g`, `W' = W/s_w` and `σ'² = σ²/(s_h s_g s_w)²`,
//! which leaves every SINR, the susceptance and the scattering matrix
//! unchanged.

use nalgebra::Complex;

use crate::channel::Scenario;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct Scaling<T: Real> {
    pub h: T,
    pub g: T,
    pub w: T,
}

impl<T: Real> Scaling<T> {
    pub fn identity() -> Self {
        Self { h: T::one(), g: T::one(), w: T::one() }
    }

    /// `s_h`, `s_g` are the RMS entry magnitudes of `H` and `G`; `s_w` is
    /// supplied by the caller.
    pub fn for_scenario(s: &Scenario<T>, w: T) -> Self {
        let rms = |a: &crate::scalar::CMat<T>| a.norm() / lit::<T>(a.len() as f64).sqrt();
        let h = rms(&s.h);
        let g = rms(&s.g);
        Self {
            h: if h > T::zero() { h } else { T::one() },
            g: if g > T::zero() { g } else { T::one() },
            w,
        }
    }

    /// Equivalent instance in normalized units.
    pub fn apply(&self, s: &Scenario<T>) -> Scenario<T> {
        let gain = self.h * self.g * self.w;
        Scenario {
            g: &s.g * Complex::new(T::one() / self.g, T::zero()),
            h: &s.h * Complex::new(T::one() / self.h, T::zero()),
            p_t: s.p_t / (self.w * self.w),
            sigma2: s.sigma2 / (gain * gain),
            gamma: s.gamma.clone(),
            z0: s.z0,
            mask: s.mask.clone(),
        }
    }
}

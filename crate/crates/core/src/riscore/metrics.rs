//! Per-user SINR and sum-rate evaluation.

use crate::error::{param, Error, Result};
use crate::scalar::{CMat, Real};

/// Per-user SINRs and the sum-rate (nats).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkQuality<T> {
    pub sinr: Vec<T>,
    pub rate: T,
}

/// Cross-gain matrix `E` with `E[k][j] = u_k† G w_j`.
pub fn cross_gains<T: Real>(u: &CMat<T>, w: &CMat<T>, g: &CMat<T>) -> Result<CMat<T>> {
    if u.nrows() != g.nrows() || g.ncols() != w.nrows() || u.ncols() != w.ncols() {
        return Err(Error::Shape(format!(
            "U is {:?}, W is {:?}, G is {:?}",
            u.shape(),
            w.shape(),
            g.shape()
        )));
    }
    Ok(u.adjoint() * (g * w))
}

/// SINRs from a cross-gain matrix.
pub fn sinr_from_gains<T: Real>(e: &CMat<T>, sigma2: T) -> Vec<T> {
    (0..e.nrows())
        .map(|k| {
            let signal = e[(k, k)].norm_sqr();
            let interference = (0..e.ncols())
                .filter(|&j| j != k)
                .fold(T::zero(), |acc, j| acc + e[(k, j)].norm_sqr());
            signal / (interference + sigma2)
        })
        .collect()
}

/// Evaluates SINR and sum-rate with effective reflected channels `U`
/// (columns `u_k`, so the link gain is `u_k† G w_j`).
pub fn sinr_and_rate<T: Real>(u: &CMat<T>, w: &CMat<T>, g: &CMat<T>, sigma2: T) -> Result<LinkQuality<T>> {
    if !(sigma2 > T::zero()) {
        return Err(param("sigma2", "noise power must be positive"));
    }
    let e = cross_gains(u, w, g)?;
    let sinr = sinr_from_gains(&e, sigma2);
    let rate = sinr.iter().fold(T::zero(), |acc, &s| acc + (T::one() + s).ln());
    Ok(LinkQuality { sinr, rate })
}

/// Same evaluation written directly in terms of the scattering matrix:
/// gain `h_k† Θ G w_j`.
pub fn sinr_and_rate_theta<T: Real>(
    theta: &CMat<T>,
    h: &CMat<T>,
    w: &CMat<T>,
    g: &CMat<T>,
    sigma2: T,
) -> Result<LinkQuality<T>> {
    if !(sigma2 > T::zero()) {
        return Err(param("sigma2", "noise power must be positive"));
    }
    if theta.nrows() != h.nrows() || theta.ncols() != g.nrows() || g.ncols() != w.nrows() {
        return Err(Error::Shape("inconsistent Θ/H/G/W dimensions".into()));
    }
    let e = h.adjoint() * theta * g * w;
    let sinr = sinr_from_gains(&e, sigma2);
    let rate = sinr.iter().fold(T::zero(), |acc, &s| acc + (T::one() + s).ln());
    Ok(LinkQuality { sinr, rate })
}

//! Small dense helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{creal, lit, CMat, Real};

/// Real inner product `Re tr(a† b)`.
pub fn inner<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + (x.conj() * y).re)
}

/// Lifts a real matrix to a complex one.
pub fn complexify<T: Real>(m: &DMatrix<T>) -> CMat<T> {
    m.map(creal)
}

/// `I + s·i·z0·B` for a real `B`.
pub fn shifted_cayley_factor<T: Real>(b: &DMatrix<T>, z0: T, s: T) -> CMat<T> {
    let n = b.nrows();
    CMat::from_fn(n, n, |i, j| {
        let re = if i == j { T::one() } else { T::zero() };
        Complex::new(re, s * z0 * b[(i, j)])
    })
}

/// Solves `S X = R` for Hermitian positive definite `S`, falling back to LU
/// when the Cholesky factorization breaks down numerically.
pub fn solve_hpd<T: Real>(s: CMat<T>, r: &CMat<T>, what: &'static str) -> Result<CMat<T>> {
    match s.clone().cholesky() {
        Some(ch) => Ok(ch.solve(r)),
        None => s.lu().solve(r).ok_or(Error::Singular(what)),
    }
}

/// Real symmetric positive definite solve with the same fallback.
pub fn solve_spd<T: Real>(s: DMatrix<T>, r: &DVector<T>, what: &'static str) -> Result<DVector<T>> {
    match s.clone().cholesky() {
        Some(ch) => Ok(ch.solve(r)),
        None => s.lu().solve(r).ok_or(Error::Singular(what)),
    }
}

/// Symmetrizes a square matrix in place: `(A + A^H) / 2`.
pub fn hermitian_part<T: Real>(a: &CMat<T>) -> CMat<T> {
    (a + a.adjoint()) * creal(lit::<T>(0.5))
}

pub fn all_finite<T: Real>(a: &CMat<T>) -> bool {
    a.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

//! Susceptance and scattering matrices and the Cayley map between them.

use nalgebra::{DMatrix, DVector};

use super::architecture::{ArchitectureMask, IndexSets};
use crate::error::{Error, Result};
use crate::linalg::shifted_cayley_factor;
use crate::scalar::{lit, CMat, Real};

/// Real symmetric susceptance matrix (siemens); the admittance is `i·B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Susceptance<T: Real> {
    b: DMatrix<T>,
}

impl<T: Real> Susceptance<T> {
    /// Wraps `b`, rejecting non-square or non-symmetric input.
    pub fn new(b: DMatrix<T>) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::Shape(format!("susceptance must be square, got {:?}", b.shape())));
        }
        let n = b.nrows();
        for i in 0..n {
            for j in 0..i {
                if b[(i, j)] != b[(j, i)] {
                    return Err(Error::Shape(format!("susceptance not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { b })
    }

    pub fn zeros(m: usize) -> Self {
        Self { b: DMatrix::zeros(m, m) }
    }

    /// Unpacks a free-parameter vector into the symmetric matrix.
    pub fn from_packed(x: &DVector<T>, sets: &IndexSets) -> Result<Self> {
        if x.len() != sets.total() {
            return Err(Error::Shape(format!(
                "packed vector has {} entries, expected {}",
                x.len(),
                sets.total()
            )));
        }
        let m = sets.sets().len();
        let mut b = DMatrix::zeros(m, m);
        for (p, (i, j)) in sets.pairs().enumerate() {
            b[(i, j)] = x[p];
            b[(j, i)] = x[p];
        }
        Ok(Self { b })
    }

    /// Packs the upper-triangular allowed entries row by row.
    pub fn pack(&self, sets: &IndexSets) -> DVector<T> {
        DVector::from_iterator(sets.total(), sets.pairs().map(|(i, j)| self.b[(i, j)]))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.b
    }

    pub fn m(&self) -> usize {
        self.b.nrows()
    }

    /// True when every forbidden entry is exactly zero.
    pub fn conforms_to(&self, mask: &ArchitectureMask) -> bool {
        let m = self.m();
        m == mask.m()
            && (0..m).all(|i| (0..m).all(|j| mask.allowed(i, j) || self.b[(i, j)] == T::zero()))
    }

    pub fn is_finite(&self) -> bool {
        self.b.iter().all(|v| v.is_finite())
    }
}

/// Complex scattering matrix of the impedance network.
#[derive(Debug, Clone, PartialEq)]
pub struct Scattering<T: Real> {
    theta: CMat<T>,
}

impl<T: Real> Scattering<T> {
    pub fn new(theta: CMat<T>) -> Result<Self> {
        if !theta.is_square() {
            return Err(Error::Shape(format!("scattering must be square, got {:?}", theta.shape())));
        }
        Ok(Self { theta })
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.theta
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.theta
    }

    /// `‖Θ†Θ − I‖_F`
    pub fn unitarity_error(&self) -> T {
        let n = self.theta.nrows();
        (self.theta.adjoint() * &self.theta - CMat::<T>::identity(n, n)).norm()
    }

    /// `‖Θ − Θᵀ‖_F`
    pub fn symmetry_error(&self) -> T {
        (&self.theta - self.theta.transpose()).norm()
    }
}

/// `Θ = (I + iZ₀B)⁻¹ (I − iZ₀B)`, computed as a linear solve.
pub fn b_to_theta<T: Real>(b: &Susceptance<T>, z0: T) -> Result<Scattering<T>> {
    let plus = shifted_cayley_factor(b.matrix(), z0, T::one());
    let minus = shifted_cayley_factor(b.matrix(), z0, -T::one());
    let theta = plus.lu().solve(&minus).ok_or(Error::Singular("Cayley map"))?;
    let residual = (shifted_cayley_factor(b.matrix(), z0, T::one()) * &theta - &minus).norm();
    let scale = T::one() + minus.norm();
    if !(residual <= lit::<T>(1e3) * T::default_epsilon() * scale * lit(b.m() as f64)) {
        return Err(Error::Singular("Cayley map (ill-conditioned solve)"));
    }
    Ok(Scattering { theta })
}

/// Inverse Cayley map: `iZ₀B = (I + Θ)⁻¹ (I − Θ)`.
///
/// Fails when `I + Θ` is singular, i.e. when `Θ` has an eigenvalue at −1
/// (the infinite-susceptance limit).
pub fn theta_to_b<T: Real>(theta: &Scattering<T>, z0: T) -> Result<Susceptance<T>> {
    let t = theta.matrix();
    let n = t.nrows();
    let eye = CMat::<T>::identity(n, n);
    let plus = &eye + t;
    let minus = &eye - t;
    let y = plus
        .lu()
        .solve(&minus)
        .ok_or(Error::Singular("inverse Cayley map: I + Θ"))?;
    if !y.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::Singular("inverse Cayley map: I + Θ"));
    }
    // y = iZ₀B  ⇒  B = Im(y) / Z₀; symmetrize to remove rounding asymmetry.
    let half = lit::<T>(0.5);
    let b = DMatrix::from_fn(n, n, |i, j| half * (y[(i, j)].im + y[(j, i)].im) / z0);
    Ok(Susceptance { b })
}

/// `(I + iZ₀B)⁻¹` explicitly; only used for diagnostics such as the spectral bound.
pub fn resolvent<T: Real>(b: &Susceptance<T>, z0: T) -> Result<CMat<T>> {
    let n = b.m();
    shifted_cayley_factor(b.matrix(), z0, T::one())
        .lu()
        .solve(&CMat::<T>::identity(n, n))
        .ok_or(Error::Singular("resolvent"))
}

/// Spectral norm of a complex matrix via its singular values.
pub fn spectral_norm<T: Real>(a: &CMat<T>) -> T {
    a.clone()
        .singular_values()
        .iter()
        .fold(T::zero(), |acc, &s| if s > acc { s } else { acc })
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_susceptance_maps_to_identity() {
        let theta = b_to_theta(&Susceptance::<f64>::zeros(5), 50.0).unwrap();
        assert!((theta.matrix() - CMat::<f64>::identity(5, 5)).norm() < 1e-15);
    }

    #[test]
    fn scalar_cayley_map() {
        let z0 = 50.0;
        let b = Susceptance::new(DMatrix::from_element(1, 1, 1.0 / z0)).unwrap();
        let theta = b_to_theta(&b, z0).unwrap();
        // (1 - i) / (1 + i) = -i
        assert_relative_eq!(theta.matrix()[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(theta.matrix()[(0, 0)].im, -1.0, epsilon = 1e-15);

        let back = theta_to_b(&theta, z0).unwrap();
        assert_relative_eq!(back.matrix()[(0, 0)], 1.0 / z0, epsilon = 1e-15);
    }

    #[test]
    fn identity_scattering_is_zero_susceptance() {
        let theta = Scattering::new(CMat::<f64>::identity(3, 3)).unwrap();
        let b = theta_to_b(&theta, 50.0).unwrap();
        assert!(b.matrix().norm() < 1e-15);
    }

    #[test]
    fn minus_identity_is_not_invertible() {
        let theta = Scattering::new(-CMat::<f64>::identity(2, 2)).unwrap();
        assert!(theta_to_b(&theta, 50.0).is_err());
    }

    #[test]
    fn rejects_asymmetric() {
        let mut b = DMatrix::<f64>::zeros(2, 2);
        b[(0, 1)] = 1.0;
        assert!(Susceptance::new(b).is_err());
    }
}

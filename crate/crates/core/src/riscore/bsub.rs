//! Masked, proximal least-squares update of the susceptance matrix.
//!
//! Solves
//!
//! ```text
//! min_x  ‖A x − b‖² + ξ ‖x − xᵗ‖²
//! ```
//!
//! where `x` packs the free entries of a symmetric, mask-conforming `B`
//! (see [`IndexSets`]), `b = vec(Γᵀ)` stacks the rows of `Γ`, and `A` is the
//! linear map with `A x = vec((B M)ᵀ)`, so that `‖A x − b‖² = ‖B M − Γ‖²_F`.
//! The stationarity condition is `(AᵀA + ξI) x = Aᵀb + ξ xᵗ`.
//!
//! Callers coming from an augmented Lagrangian with penalty `ρ` and a
//! proximal weight `ξ` on `B` pass `ξ/ρ` here.
//!
//! `A` is never materialized in the solver: parameter `(i, j)` contributes
//! the row `a_j` of `M` to output block `i` and, when `i ≠ j`, the row `a_i`
//! to output block `j`. Both Gram matrices are assembled from `M Mᵀ` and
//! the row outer products.

use nalgebra::{DMatrix, DVector};

use super::architecture::{index_sets, ArchitectureMask, IndexSets};
use super::cayley::Susceptance;
use crate::error::{param, Error, Result};
use crate::linalg::solve_spd;
use crate::scalar::Real;

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BSolvePath {
    /// Pick the smaller system: parameter space when it has fewer unknowns
    /// than `A` has rows, row space otherwise.
    Auto,
    /// Factor the `P × P` matrix `AᵀA + ξI`.
    Parameter,
    /// Factor the `2MK × 2MK` matrix `AAᵀ + ξI`.
    RowSpace,
}

/// Structured design matrix `A` for a given `M` and mask.
#[derive(Debug, Clone)]
pub struct DesignMatrix<'a, T: Real> {
    rows: &'a DMatrix<T>,
    pairs: Vec<(usize, usize)>,
}

impl<'a, T: Real> DesignMatrix<'a, T> {
    pub fn new(mmat: &'a DMatrix<T>, sets: &IndexSets) -> Self {
        Self {
            rows: mmat,
            pairs: sets.pairs().collect(),
        }
    }

    /// `2MK`
    pub fn nrows(&self) -> usize {
        self.rows.nrows() * self.rows.ncols()
    }

    /// `Σ|𝒮ᵢ|`
    pub fn ncols(&self) -> usize {
        self.pairs.len()
    }

    fn width(&self) -> usize {
        self.rows.ncols()
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        let w = self.width();
        let mut out = DVector::zeros(self.nrows());
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let v = x[p];
            for c in 0..w {
                out[i * w + c] += v * self.rows[(j, c)];
            }
            if i != j {
                for c in 0..w {
                    out[j * w + c] += v * self.rows[(i, c)];
                }
            }
        }
        out
    }

    pub fn apply_transpose(&self, v: &DVector<T>) -> DVector<T> {
        let w = self.width();
        DVector::from_iterator(
            self.ncols(),
            self.pairs.iter().map(|&(i, j)| {
                let mut s = T::zero();
                for c in 0..w {
                    s += self.rows[(j, c)] * v[i * w + c];
                }
                if i != j {
                    for c in 0..w {
                        s += self.rows[(i, c)] * v[j * w + c];
                    }
                }
                s
            }),
        )
    }

    /// `AᵀA`
    pub fn gram(&self) -> DMatrix<T> {
        let c = self.rows * self.rows.transpose();
        let n = self.ncols();
        let mut g = DMatrix::zeros(n, n);
        // (block row, row of M placed there)
        let blocks = |(i, j): (usize, usize)| -> [(usize, usize); 2] {
            [(i, j), if i != j { (j, i) } else { (usize::MAX, usize::MAX) }]
        };
        for p in 0..n {
            let bp = blocks(self.pairs[p]);
            for q in p..n {
                let bq = blocks(self.pairs[q]);
                let mut s = T::zero();
                for &(r, a) in bp.iter().filter(|b| b.0 != usize::MAX) {
                    for &(r2, a2) in bq.iter().filter(|b| b.0 != usize::MAX) {
                        if r == r2 {
                            s += c[(a, a2)];
                        }
                    }
                }
                g[(p, q)] = s;
                g[(q, p)] = s;
            }
        }
        g
    }

    /// `AAᵀ`
    pub fn outer_gram(&self) -> DMatrix<T> {
        let w = self.width();
        let n = self.nrows();
        let mut g = DMatrix::zeros(n, n);
        let add_outer = |g: &mut DMatrix<T>, br: usize, ra: usize, bc: usize, rb: usize| {
            for c1 in 0..w {
                let x = self.rows[(ra, c1)];
                for c2 in 0..w {
                    g[(br * w + c1, bc * w + c2)] += x * self.rows[(rb, c2)];
                }
            }
        };
        for &(i, j) in &self.pairs {
            add_outer(&mut g, i, j, i, j);
            if i != j {
                add_outer(&mut g, j, i, j, i);
                add_outer(&mut g, i, j, j, i);
                add_outer(&mut g, j, i, i, j);
            }
        }
        g
    }

    /// Dense copy of `A`, for diagnostics and tests.
    pub fn to_dense(&self) -> DMatrix<T> {
        let w = self.width();
        let mut a = DMatrix::zeros(self.nrows(), self.ncols());
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for c in 0..w {
                a[(i * w + c, p)] = self.rows[(j, c)];
            }
            if i != j {
                for c in 0..w {
                    a[(j * w + c, p)] = self.rows[(i, c)];
                }
            }
        }
        a
    }
}

/// `vec(Γᵀ)`: rows of `Γ` stacked.
pub fn stack_rows<T: Real>(gmat: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(gmat.len(), gmat.transpose().iter().copied())
}

/// Minimizes `‖B M − Γ‖²_F + ξ ‖x − xᵗ‖²` over symmetric `B` conforming to
/// `mask`, choosing the cheaper closed form.
pub fn solve_b_subproblem<T: Real>(
    mmat: &DMatrix<T>,
    gmat: &DMatrix<T>,
    xi: T,
    b_prev: &Susceptance<T>,
    mask: &ArchitectureMask,
) -> Result<Susceptance<T>> {
    solve_b_subproblem_with(mmat, gmat, xi, b_prev, mask, BSolvePath::Auto)
}

pub fn solve_b_subproblem_with<T: Real>(
    mmat: &DMatrix<T>,
    gmat: &DMatrix<T>,
    xi: T,
    b_prev: &Susceptance<T>,
    mask: &ArchitectureMask,
    path: BSolvePath,
) -> Result<Susceptance<T>> {
    if !(xi > T::zero()) {
        return Err(param("xi", "proximal weight must be positive"));
    }
    let m = mask.m();
    if mmat.nrows() != m || gmat.shape() != mmat.shape() || b_prev.m() != m {
        return Err(Error::Shape(format!(
            "M is {:?}, Γ is {:?}, Bᵗ has {} rows, mask has {m} elements",
            mmat.shape(),
            gmat.shape(),
            b_prev.m()
        )));
    }
    if !b_prev.conforms_to(mask) {
        return Err(Error::Shape("previous susceptance violates the mask".into()));
    }
    let sets = index_sets(mask);
    let a = DesignMatrix::new(mmat, &sets);
    let rhs = stack_rows(gmat);
    let x_prev = b_prev.pack(&sets);

    let path = match path {
        BSolvePath::Auto if a.ncols() < a.nrows() => BSolvePath::Parameter,
        BSolvePath::Auto => BSolvePath::RowSpace,
        p => p,
    };
    let x = match path {
        BSolvePath::Parameter => {
            let mut lhs = a.gram();
            for d in 0..lhs.nrows() {
                lhs[(d, d)] += xi;
            }
            let r = a.apply_transpose(&rhs) + &x_prev * xi;
            solve_spd(lhs, &r, "B-subproblem (parameter space)")?
        }
        // (1/ξ)(I − Aᵀ(AAᵀ+ξI)⁻¹A)(Aᵀb + ξxᵗ) rearranged to
        // xᵗ + Aᵀ(AAᵀ+ξI)⁻¹(b − Axᵗ), which avoids dividing a difference of
        // nearly equal vectors by a small ξ.
        _ => {
            let mut lhs = a.outer_gram();
            for d in 0..lhs.nrows() {
                lhs[(d, d)] += xi;
            }
            let r = &rhs - a.apply(&x_prev);
            let z = solve_spd(lhs, &r, "B-subproblem (row space)")?;
            x_prev + a.apply_transpose(&z)
        }
    };
    Susceptance::from_packed(&x, &sets)
}

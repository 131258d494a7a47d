//! Reference implementations used by the integration tests. They share no
//! code with the solvers beyond the public types.
#![allow(dead_code)]

use bdris::riscore::{ArchitectureMask, MaskKind, Susceptance};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn cnormal(rng: &mut ChaCha20Rng) -> C64 {
    C64::new(normal(rng), normal(rng)) / 2f64.sqrt()
}

pub fn cmat(rng: &mut ChaCha20Rng, r: usize, c: usize) -> DMatrix<C64> {
    DMatrix::from_fn(r, c, |_, _| cnormal(rng))
}

pub fn rmat(rng: &mut ChaCha20Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| normal(rng))
}

/// Mask of the given family; groups use size 4 from `m = 8` on, otherwise
/// 2 (or 1 when `m` is odd).
pub fn mask_for(kind: MaskKind, m: usize) -> ArchitectureMask {
    match kind {
        MaskKind::Single => ArchitectureMask::single(m),
        MaskKind::Fully => ArchitectureMask::fully(m),
        MaskKind::Group => ArchitectureMask::group(m, if m >= 8 && m % 4 == 0 { 4 } else if m % 2 == 0 { 2 } else { 1 }),
        MaskKind::TreeTridiagonal => ArchitectureMask::tree_tridiagonal(m),
        MaskKind::Custom => panic!("no random custom masks"),
    }
    .unwrap()
}

pub const KINDS: [MaskKind; 4] = [MaskKind::Single, MaskKind::Group, MaskKind::TreeTridiagonal, MaskKind::Fully];

/// Symmetric susceptance on the mask with `Z₀B` entries of standard
/// deviation `scale`.
pub fn random_susceptance(rng: &mut ChaCha20Rng, mask: &ArchitectureMask, z0: f64, scale: f64) -> Susceptance<f64> {
    let m = mask.m();
    let mut b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            if mask.allowed(i, j) {
                let v = normal(rng) * scale / z0;
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
    }
    Susceptance::new(b).unwrap()
}

/// Upper-triangle positions allowed by the mask, row by row.
pub fn free_positions(mask: &ArchitectureMask) -> Vec<(usize, usize)> {
    let m = mask.m();
    (0..m)
        .flat_map(|i| (i..m).map(move |j| (i, j)))
        .filter(|&(i, j)| mask.allowed(i, j))
        .collect()
}

/// Dense oracle for `min ‖BM − Γ‖²_F + ξ Σ_p (x_p − xᵗ_p)²` over masked
/// symmetric `B`: one basis matrix per free position, explicit design matrix,
/// normal equations solved by a full-pivot LU.
pub fn dense_b_oracle(
    mmat: &DMatrix<f64>,
    gmat: &DMatrix<f64>,
    xi: f64,
    prev: &DMatrix<f64>,
    mask: &ArchitectureMask,
) -> DMatrix<f64> {
    let m = mask.m();
    let pos = free_positions(mask);
    let cols: Vec<DVector<f64>> = pos
        .iter()
        .map(|&(i, j)| {
            let mut e = DMatrix::zeros(m, m);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            let prod = e * mmat;
            DVector::from_column_slice(prod.as_slice())
        })
        .collect();
    let a = DMatrix::from_columns(&cols);
    let b = DVector::from_column_slice(gmat.as_slice());
    let x_prev = DVector::from_iterator(pos.len(), pos.iter().map(|&(i, j)| prev[(i, j)]));
    let lhs = a.transpose() * &a + DMatrix::identity(pos.len(), pos.len()) * xi;
    let rhs = a.transpose() * b + x_prev * xi;
    let x = lhs.full_piv_lu().solve(&rhs).expect("regularized system is nonsingular");
    let mut out = DMatrix::zeros(m, m);
    for (p, &(i, j)) in pos.iter().enumerate() {
        out[(i, j)] = x[p];
        out[(j, i)] = x[p];
    }
    out
}

/// Projection onto `{r : r_k real, r_k ≥ √(Γ(Σ_{j≠k}|r_j|² + σ²))}` by
/// golden-section search over the diagonal value `t`. For fixed `t` the best
/// off-diagonal part is the projection of `a_off` onto the ball of radius
/// `√(t²/Γ − σ²)`, and the resulting squared distance is convex in `t`.
pub fn qos_oracle(a: &DVector<C64>, k: usize, gamma: f64, sigma2: f64) -> DVector<C64> {
    let akk = a[k].re;
    let off: f64 = a.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
    let t_min = (gamma * sigma2).sqrt();
    let radius = |t: f64| ((t * t / gamma - sigma2).max(0.0)).sqrt();
    let dist2 = |t: f64| {
        let excess = (off - radius(t)).max(0.0);
        (t - akk).powi(2) + excess * excess
    };
    let mut lo = t_min;
    // The projection is no farther from `a` than (√(Γ(‖a_off‖²+σ²)), a_off).
    let mut hi = (gamma * (off * off + sigma2)).sqrt() + 2.0 * akk.abs() + 1.0;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..400 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if dist2(x1) <= dist2(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let t = 0.5 * (lo + hi);
    let r = radius(t);
    let shrink = if off > r { r / off } else { 1.0 };
    let mut out = a.map(|z| z * shrink);
    out[k] = C64::new(t, 0.0);
    out
}

/// Whether `r` lies in the QoS set up to `tol`.
pub fn qos_feasible(r: &DVector<C64>, k: usize, gamma: f64, sigma2: f64, tol: f64) -> bool {
    let off: f64 = r.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, z)| z.norm_sqr()).sum();
    r[k].im.abs() <= tol && r[k].re + tol >= (gamma * (off + sigma2)).sqrt()
}

/// Random point of the QoS set.
pub fn qos_sample(rng: &mut ChaCha20Rng, len: usize, k: usize, gamma: f64, sigma2: f64, scale: f64) -> DVector<C64> {
    let mut r = DVector::from_fn(len, |_, _| cnormal(rng) * scale);
    let off: f64 = r.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, z)| z.norm_sqr()).sum();
    let floor = (gamma * (off + sigma2)).sqrt();
    r[k] = C64::new(floor + rng.random::<f64>() * scale, 0.0);
    r
}

/// Row landing in projection case `case` (0 inside, 1 shrink, 2 pivot,
/// 3 flip) by choice of the diagonal's real part.
pub fn row_for_case(rng: &mut ChaCha20Rng, len: usize, k: usize, gamma: f64, sigma2: f64, case: usize) -> DVector<C64> {
    let mut a = DVector::from_fn(len, |_, _| cnormal(rng) * 2.0);
    let off: f64 = a.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, z)| z.norm_sqr()).sum();
    let floor = (gamma * (off + sigma2)).sqrt();
    a[k] = match case {
        0 => C64::new(floor * (1.0 + rng.random::<f64>()), 0.0),
        1 => C64::new(floor * rng.random_range(0.01..0.99), rng.random::<f64>()),
        2 => C64::new(0.0, rng.random::<f64>()),
        _ => C64::new(-floor * rng.random_range(0.01..3.0), rng.random::<f64>()),
    };
    a
}

/// Central finite-difference directional derivative of `f` at `x` along `d`.
pub fn directional<F: Fn(&DMatrix<C64>) -> f64>(f: F, x: &DMatrix<C64>, d: &DMatrix<C64>, h: f64) -> f64 {
    (f(&(x + d * C64::new(h, 0.0))) - f(&(x - d * C64::new(h, 0.0)))) / (2.0 * h)
}

//! Seeded generation of the simulation scenario: geometry, path loss and
//! Rician small-scale fading.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`), so a given seed yields
//! the same channels on every platform. The line-of-sight component is the
//! all-ones matrix; the scattered component has i.i.d. `CN(0, 1)` entries.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::riscore::{make_architecture, ArchitectureMask, MaskKind};
use crate::scalar::{lit, CMat, Real};

/// Identifier of the generator used for every random draw, recorded in
/// provenance files.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng (rand_chacha 0.9), CN(0,1) via rand_distr::StandardNormal/sqrt(2)";

/// Scenario description, serialized as JSON with these exact field names.
/// Missing fields take their default values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// BS antennas
    pub n: usize,
    /// users
    pub k: usize,
    /// surface elements
    pub m: usize,
    pub mask_kind: MaskKind,
    pub group_size: Option<usize>,
    /// BS–surface distance (m)
    pub d_bi: f64,
    /// surface–user distance (m)
    pub d_iu: f64,
    pub zeta0_db: f64,
    pub alpha: f64,
    pub kappa_db: f64,
    pub sigma2_dbm: f64,
    /// reference impedance (Ω)
    pub z0: f64,
    /// transmit power budget for sum-rate maximization (dBm)
    pub p_t_dbm: f64,
    /// per-user SINR thresholds for power minimization (dB)
    pub gamma_db: Vec<f64>,
    pub seed: u64,
    /// Reserved: a direct BS–user link. Only `false` is supported.
    pub direct_link: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 4,
            k: 4,
            m: 32,
            mask_kind: MaskKind::Fully,
            group_size: None,
            d_bi: 50.0,
            d_iu: 2.5,
            zeta0_db: -30.0,
            alpha: 2.2,
            kappa_db: 2.0,
            sigma2_dbm: -80.0,
            z0: 50.0,
            p_t_dbm: 30.0,
            gamma_db: vec![2.0; 4],
            seed: 0,
            direct_link: false,
        }
    }
}

impl ScenarioConfig {
    /// Sets the same threshold for every user.
    pub fn with_uniform_gamma_db(mut self, gamma_db: f64) -> Self {
        self.gamma_db = vec![gamma_db; self.k];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.m == 0 {
            return Err(param("n/k/m", "dimensions must be at least 1"));
        }
        if !(self.d_bi > 0.0) || !(self.d_iu > 0.0) {
            return Err(param("d_bi/d_iu", "distances must be positive"));
        }
        if self.gamma_db.len() != self.k {
            return Err(param(
                "gamma_db",
                format!("expected {} thresholds, got {}", self.k, self.gamma_db.len()),
            ));
        }
        let finite = [
            self.zeta0_db,
            self.alpha,
            self.kappa_db,
            self.sigma2_dbm,
            self.z0,
            self.p_t_dbm,
        ];
        if finite.iter().chain(&self.gamma_db).any(|v| !v.is_finite()) {
            return Err(param("scenario", "all numeric fields must be finite"));
        }
        if !(self.z0 > 0.0) {
            return Err(param("z0", "reference impedance must be positive"));
        }
        if self.direct_link {
            return Err(param("direct_link", "direct BS-user channels are not modeled"));
        }
        self.mask()?;
        Ok(())
    }

    pub fn mask(&self) -> Result<ArchitectureMask> {
        make_architecture(self.mask_kind, self.m, self.group_size)
    }
}

/// Channels and system constants for one problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T: Real> {
    /// BS → surface, `M × N`
    pub g: CMat<T>,
    /// surface → users, `M × K` (column `k` is `h_k`)
    pub h: CMat<T>,
    /// transmit power budget (W)
    pub p_t: T,
    /// noise power (W)
    pub sigma2: T,
    /// linear SINR thresholds
    pub gamma: Vec<T>,
    /// reference impedance (Ω)
    pub z0: T,
    pub mask: ArchitectureMask,
}

impl<T: Real> Scenario<T> {
    pub fn new(
        g: CMat<T>,
        h: CMat<T>,
        p_t: T,
        sigma2: T,
        gamma: Vec<T>,
        z0: T,
        mask: ArchitectureMask,
    ) -> Result<Self> {
        let (m, k) = h.shape();
        if g.nrows() != m || mask.m() != m || gamma.len() != k {
            return Err(Error::Shape(format!(
                "G is {:?}, H is {:?}, mask has {} elements, {} thresholds",
                g.shape(),
                h.shape(),
                mask.m(),
                gamma.len()
            )));
        }
        if !(p_t > T::zero()) || !(sigma2 > T::zero()) || !(z0 > T::zero()) {
            return Err(param("scenario", "power, noise and impedance must be positive"));
        }
        if gamma.iter().any(|g| !(*g > T::zero())) {
            return Err(param("gamma", "thresholds must be positive"));
        }
        let finite = |a: &CMat<T>| a.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if !finite(&g) || !finite(&h) {
            return Err(param("channels", "entries must be finite"));
        }
        Ok(Self { g, h, p_t, sigma2, gamma, z0, mask })
    }

    pub fn n(&self) -> usize {
        self.g.ncols()
    }

    pub fn k(&self) -> usize {
        self.h.ncols()
    }

    pub fn m(&self) -> usize {
        self.h.nrows()
    }

    /// Same instance with a different architecture.
    pub fn with_mask(&self, mask: ArchitectureMask) -> Result<Self> {
        if mask.m() != self.m() {
            return Err(Error::Shape("mask size differs from element count".into()));
        }
        Ok(Self { mask, ..self.clone() })
    }

    /// Converts every quantity to another scalar type.
    pub fn cast<U: Real>(&self) -> Scenario<U> {
        let c = |x: T| lit::<U>(crate::scalar::to_f64(x));
        let cm = |a: &CMat<T>| a.map(|z| Complex::new(c(z.re), c(z.im)));
        Scenario {
            g: cm(&self.g),
            h: cm(&self.h),
            p_t: c(self.p_t),
            sigma2: c(self.sigma2),
            gamma: self.gamma.iter().map(|&g| c(g)).collect(),
            z0: c(self.z0),
            mask: self.mask.clone(),
        }
    }
}

/// Large-scale gain `10^(ζ₀/10) · d^(−α)`.
pub fn pathloss(d: f64, zeta0_db: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(param("d", "distance must be positive"));
    }
    Ok(db_to_linear(zeta0_db) * d.powf(-alpha))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm → W
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// W → dBm
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

fn rician_from_rng(rng: &mut ChaCha20Rng, rows: usize, cols: usize, kappa_db: f64) -> CMat<f64> {
    let kappa = db_to_linear(kappa_db);
    let los = (kappa / (1.0 + kappa)).sqrt();
    let nlos = (1.0 / (1.0 + kappa)).sqrt();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major draw order, matching nalgebra storage.
    let data: Vec<Complex<f64>> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(los + nlos * scale * re, nlos * scale * im)
        })
        .collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Rician fading matrix with unit average power per entry.
pub fn gen_rician(rows: usize, cols: usize, kappa_db: f64, seed: u64) -> CMat<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rician_from_rng(&mut rng, rows, cols, kappa_db)
}

/// Builds the channels and constants for `cfg`. One ChaCha20 stream seeded
/// with `cfg.seed` draws `G` first, then `H` column by column.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<Scenario<f64>> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let g_gain = pathloss(cfg.d_bi, cfg.zeta0_db, cfg.alpha)?.sqrt();
    let h_gain = pathloss(cfg.d_iu, cfg.zeta0_db, cfg.alpha)?.sqrt();
    let g = rician_from_rng(&mut rng, cfg.m, cfg.n, cfg.kappa_db) * Complex::new(g_gain, 0.0);
    let h = rician_from_rng(&mut rng, cfg.m, cfg.k, cfg.kappa_db) * Complex::new(h_gain, 0.0);
    Scenario::new(
        g,
        h,
        dbm_to_watts(cfg.p_t_dbm),
        dbm_to_watts(cfg.sigma2_dbm),
        cfg.gamma_db.iter().map(|&g| db_to_linear(g)).collect(),
        cfg.z0,
        cfg.mask()?,
    )
}

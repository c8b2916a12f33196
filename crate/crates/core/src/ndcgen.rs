//! Synthetic normally-distributed-cluster (NDC) binary data.
//!
//! Procedure, all draws from one ChaCha8 stream seeded by `seed`:
//!
//! 1. Draw a direction `u` uniformly on the unit sphere in `R^d`.
//! 2. Draw `2 * cluster_count` centers from `N(0, I)`. The threshold `t` is
//!    the median of the center projections `c'u`; centers above it belong to
//!    the positive side and are shifted by `+separation/2 * u`, the others by
//!    `-separation/2 * u`.
//! 3. Each sample picks a cluster uniformly and is drawn from
//!    `N(center, I)`. Its label is `+1` if `x'u >= t`, else `-1`.
//! 4. If the positive share falls outside `[40%, 60%]`, steps 2-3 are
//!    repeated with fresh centers, up to 100 times; after that `t` is moved
//!    to the median sample projection, which balances the classes exactly.
//! 5. `round(noise_fraction * n)` distinct samples have their label flipped.
//!
//! The class map is always `["1", "-1"]`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Result, TwinSvmError};

const BALANCE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct NdcConfig {
    pub n: usize,
    pub d: usize,
    /// Clusters per class.
    pub cluster_count: usize,
    /// Distance the two groups of centers are pushed apart along `u`.
    pub separation: f64,
    /// Share of labels flipped, in `[0, 0.5)`.
    pub noise_fraction: f64,
    pub seed: u64,
}

impl NdcConfig {
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        NdcConfig {
            n,
            d,
            cluster_count: 10,
            separation: 2.0,
            noise_fraction: 0.05,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.d < 1 || self.cluster_count < 1 {
            return Err(TwinSvmError::validation(format!(
                "NDC needs n >= 2, d >= 1 and at least one cluster, got n={}, d={}, clusters={}",
                self.n, self.d, self.cluster_count
            )));
        }
        if !(0.0..0.5).contains(&self.noise_fraction) {
            return Err(TwinSvmError::validation(format!(
                "noise fraction must lie in [0, 0.5), got {}",
                self.noise_fraction
            )));
        }
        if !self.separation.is_finite() || self.separation < 0.0 {
            return Err(TwinSvmError::validation("separation must be finite and non-negative"));
        }
        Ok(())
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

pub fn generate(cfg: &NdcConfig) -> Result<Dataset> {
    cfg.validate()?;
    let (n, d) = (cfg.n, cfg.d);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut u = gaussian_vector(&mut rng, d);
    while u.norm() == 0.0 {
        u = gaussian_vector(&mut rng, d);
    }
    u /= u.norm();

    let mut samples = DMatrix::zeros(n, d);
    let mut projections = vec![0.0; n];
    let mut threshold = 0.0;
    let mut balanced = false;

    for _ in 0..BALANCE_ATTEMPTS {
        let centers: Vec<DVector<f64>> = (0..2 * cfg.cluster_count)
            .map(|_| gaussian_vector(&mut rng, d))
            .collect();
        let center_proj: Vec<f64> = centers.iter().map(|c| c.dot(&u)).collect();
        threshold = median(&center_proj);
        let shifted: Vec<DVector<f64>> = centers
            .iter()
            .zip(&center_proj)
            .map(|(c, &p)| {
                let side = if p >= threshold { 0.5 } else { -0.5 };
                c + &u * (side * cfg.separation)
            })
            .collect();

        for (i, projection) in projections.iter_mut().enumerate() {
            let k = rng.random_range(0..shifted.len());
            let x = &shifted[k] + gaussian_vector(&mut rng, d);
            *projection = x.dot(&u);
            samples.row_mut(i).copy_from(&x.transpose());
        }
        let positive = projections.iter().filter(|&&p| p >= threshold).count();
        let share = positive as f64 / n as f64;
        if (0.4..=0.6).contains(&share) {
            balanced = true;
            break;
        }
    }
    if !balanced {
        threshold = median(&projections);
    }

    let mut labels: Vec<usize> = projections
        .iter()
        .map(|&p| usize::from(p < threshold))
        .collect();
    let flips = (cfg.noise_fraction * n as f64).round() as usize;
    for i in rand::seq::index::sample(&mut rng, n, flips) {
        labels[i] = 1 - labels[i];
    }
    Dataset::new(samples, labels, vec!["1".into(), "-1".into()])
}

//! Deterministic shifted-Gaussian task generator for desk-scale
//! experiments: two Gaussian classes in the plane form the source domain,
//! and the target domain is the same pair of classes rotated about the
//! origin and translated, so the marginal and the class-conditional
//! distributions both shift.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data_io::{FeatureMatrix, LabelVector, TaskPair};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Samples per class per domain.
    pub per_class: usize,
    /// Distance between the two source class centers.
    pub class_separation: f64,
    /// Isotropic Gaussian noise around each center.
    pub noise_sigma: f64,
    /// Rotation of the target domain about the origin, degrees.
    pub rotation_deg: f64,
    /// Translation of the target domain.
    pub shift: [f64; 2],
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            per_class: 100,
            class_separation: 3.0,
            noise_sigma: 0.6,
            rotation_deg: 30.0,
            shift: [0.8, 0.8],
        }
    }
}

/// Generates the task with ground-truth target labels attached (used for
/// evaluation only).
pub fn generate(config: &SyntheticConfig) -> Result<TaskPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise_sigma.max(f64::MIN_POSITIVE))
        .expect("positive sigma");
    let half = config.class_separation / 2.0;
    let centers = [[-half, 0.0], [half, 0.0]];
    let theta = config.rotation_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let rotate = |p: [f64; 2]| [cos * p[0] - sin * p[1], sin * p[0] + cos * p[1]];

    let per_class = config.per_class;
    let n_per_domain = 2 * per_class;
    let mut draw_domain = |transform: &dyn Fn([f64; 2]) -> [f64; 2]| {
        let mut x = DMatrix::zeros(n_per_domain, 2);
        let mut y = Vec::with_capacity(n_per_domain);
        for (class, center) in centers.iter().enumerate() {
            let moved = transform(*center);
            for s in 0..per_class {
                let row = class * per_class + s;
                x[(row, 0)] = moved[0] + noise.sample(&mut rng);
                x[(row, 1)] = moved[1] + noise.sample(&mut rng);
                y.push(class);
            }
        }
        (x, y)
    };

    let identity = |p: [f64; 2]| p;
    let (source_x, source_y) = draw_domain(&identity);
    let target_transform = |p: [f64; 2]| {
        let r = rotate(p);
        [r[0] + config.shift[0], r[1] + config.shift[1]]
    };
    let (target_x, target_y) = draw_domain(&target_transform);

    TaskPair::new(
        FeatureMatrix::new(source_x)?,
        LabelVector::from_zero_based(source_y, 2)?,
        FeatureMatrix::new(target_x)?,
        Some(LabelVector::from_zero_based(target_y, 2)?),
    )
}

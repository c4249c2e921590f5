use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitScheme {
    /// Uniform on `±sqrt(6 / (fan_in + fan_out))`, variance `2 / (fan_in + fan_out)`.
    Xavier,
    /// Uniform on `±sqrt(6 / fan_in)`, variance `2 / fan_in`; for layers feeding a ReLU.
    He,
}

/// A `rows x cols` matrix with `fan_in = rows`, `fan_out = cols`.
pub fn init_params<R: Rng + ?Sized>(rows: usize, cols: usize, scheme: InitScheme, rng: &mut R) -> Tensor {
    let bound = match scheme {
        InitScheme::Xavier => (6.0 / (rows + cols) as f64).sqrt(),
        InitScheme::He => (6.0 / rows.max(1) as f64).sqrt(),
    };
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
    Tensor { rows, cols, data }
}

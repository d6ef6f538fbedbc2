//! Reference curves: Gaussian-input capacity and the equally spaced,
//! equiprobable constellation.

use crate::error::{Error, Result};
use crate::numerics::{mutual_information, AwgnChannel, FinitePmf, QuadratureScheme};
use crate::scalar::Real;

/// `0.5 log2(1 + snr)`.
pub fn shannon_capacity_bits<T: Real>(snr_linear: T) -> T {
    T::lit(0.5) * snr_linear.ln_1p() / T::LN_2()
}

/// `cardinality` equiprobable points centered at 0 with spacing
/// `sqrt(12 E / (N^2 - 1))`, so the second moment equals `power_limit`.
pub fn equilattice<T: Real>(cardinality: usize, power_limit: T) -> Result<FinitePmf<T>, T> {
    if cardinality < 2 {
        return Err(Error::InvalidArgument(format!(
            "equilattice needs at least 2 points, got {cardinality}"
        )));
    }
    if !(power_limit > T::zero()) || !power_limit.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "power limit must be positive, got {power_limit:?}"
        )));
    }
    let n = T::from_usize(cardinality).unwrap();
    let spacing = (T::lit(12.0) * power_limit / (n * n - T::one())).sqrt();
    let center = (n - T::one()) / T::lit(2.0);
    let locations = (0..cardinality)
        .map(|k| (T::from_usize(k).unwrap() - center) * spacing)
        .collect();
    FinitePmf::uniform(locations)
}

/// Mutual information of [`equilattice`] over `ch`.
pub fn equilattice_rate<T: Real>(
    cardinality: usize,
    ch: &AwgnChannel<T>,
    power_limit: T,
    q: &QuadratureScheme<T>,
) -> Result<T, T> {
    mutual_information(&equilattice(cardinality, power_limit)?, ch, q)
}

//! Gaussian densities, output mixtures, relative entropy, mutual
//! information and distribution moments.

mod info;
mod pmf;
mod quadrature;

pub use info::{
    divergences, mutual_information, output_density, peak_snr_db, relative_entropy_at, true_snr_db,
    AwgnChannel, Likelihood, OutputProfile,
};
pub(crate) use pmf::check_locations;
pub use pmf::FinitePmf;
pub use quadrature::{QuadratureGrid, QuadratureScheme, PANEL_ORDER};

use crate::scalar::Real;

pub fn pmf_power<T: Real>(pmf: &FinitePmf<T>) -> T {
    pmf.power()
}

pub fn pmf_entropy<T: Real>(pmf: &FinitePmf<T>) -> T {
    pmf.entropy()
}

pub fn pmf_mean<T: Real>(pmf: &FinitePmf<T>) -> T {
    pmf.mean()
}

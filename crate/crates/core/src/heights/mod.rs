//! Height coordinates on spheres: the height law, zonal bases, maximal
//! correlation, transversality and the suspension contraction experiment.

pub mod battery;
pub mod law;
pub mod poly;
pub mod quadrature;
pub mod suspension;
pub mod transfer;
pub mod transversality;
pub mod zonal;

pub use law::{height_density, HeightLaw};
pub use poly::{MultiPointFunction, SpherePoly};
pub use transfer::{
    gegenbauer_scalar, max_correlation, transfer_matrix_monte_carlo, transfer_matrix_quadrature, TransferMatrix,
};
pub use zonal::{build_zonal_basis, ZonalBasis};
pub use battery::{zonal_battery, zonal_factor, TestFunction};
pub use suspension::{
    choose_k, delta_limit, fiber_mixing_estimate, suspension_contraction_experiment, FiberMixingReport, OperatorRatio,
    SuspensionReport,
};
pub use transversality::{transversality_check, TransversalityReport};

//! Fisher information, detection statistics and Cramér–Rao bounds.

mod bounds;
mod closed_form;
mod derivative;
mod measurement;
mod model;
mod qfi;

pub use bounds::{crb_chain, BoundChain, CHAIN_TOL};
pub use closed_form::{
    amplitude_squeezed_balanced_variance, lossless_closed_form_qfi, lossy_displacement_product_form,
    lossy_displacement_qfi, qfi_closed_form_birefringence, vacuum_covariance_term, ClosedFormQfi, QfiReport,
};
pub use derivative::{central_difference, default_step, DerivativeMethod, ParamDerivative};
pub use measurement::{
    balanced_detection_exact_variance, balanced_detection_stats, dichroism_beta,
    dichroism_concentration_variance, dichroism_precision_ratio, dichroism_stats,
    dichroism_variance_over_beta, optimal_waveplate_angle, ratio_propagated_variance, DichroismStats,
    MeasurementStats, BRIGHT_LIMIT_FACTOR,
};
pub use model::{analytic_derivatives_birefringence, BirefringenceModel, DichroismModel};
pub use qfi::{displacement_term, qfi_pure_gaussian, qfi_two_mode_gaussian, PURITY_REGULARIZATION};

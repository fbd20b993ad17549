//! Densities, kernels, drifts and bounds in closed form or by quadrature.

pub mod bm;
pub mod kernels;
pub mod pos_bridge;
pub mod table;

pub use bm::{
    density_d_bm, drift_bm_after, drift_bm_before, drift_bm_before_from_parts, f1_mixture, f_mix,
    fdot_mix, j, j_pair, jdot, mixture, mixture_by_lambda_quadrature, FdotSign, JEvaluator,
    MixtureTracker, MixtureValue,
};
pub use kernels::{
    arcsine_cdf, bessel3_cdf, endpoint_given_t0_cdf, excursion_marginal_cdf, fp_density,
    heat_kernel, integral_lemma_lhs, joint_density_r_theta, joint_density_r_theta_factorized, q00,
    q0y, q_kernel, split_cdf_neg, split_cdf_pos, split_density_neg, split_density_pos,
};
pub use pos_bridge::{
    bound_constant, bound_envelope, d2f, d2f_one_sided_at_level, drift_pos_bridge, f, f1,
    f1_by_split_integral, f2, DriftState,
};
pub use crate::numerics::special::incomplete_gamma_tail;

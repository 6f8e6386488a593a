//! Calogero–Sutherland side and its strong-coupling confluence to the Toda chain.

mod cfunc;
mod dual;
mod limits;
mod series;

pub use cfunc::{
    c_function_limit_error, cs_c_function, cs_eigen_residual, cs_whittaker_eval, cs_whittaker_normalized, gamma_factor,
    gamma_factor_direct, ln_gamma_factor, scaled_cs_c_function,
};
pub use dual::{
    cs_coeff_u, cs_coeff_v, cs_dde_residual, e_ell, scaled_cs_coeff_u, scaled_cs_coeff_v, scaled_cs_dde, scaled_e_ell,
};
pub use limits::{confluence_error, normalization_delta, weight_limits, ConfluencePoint, WeightLimit};
pub use series::{
    coupling_schedule, cs_phi_eval, cs_phi_translated, cs_potential, empirical_tail, CouplingTriple, CsSeriesValue,
    CsTable,
};

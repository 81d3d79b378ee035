//! Pair copulas, C-vines and general R-vines.

mod cvine;
mod fit;
mod pair;
mod rvine;
mod tau;

pub use cvine::{
    abs_tau_matrix, fit_cvine, fit_cvine_with, inverse_rosenblatt, rosenblatt, select_cvine_order, CvineFit, CvineModel,
};
pub use fit::{fit_pair, fit_pair_with, PairFit, MIN_PAIR_OBS, T_NU_GRID};
pub use pair::{
    base_tau, h_function, inv_h, kendall_tau_model, pair_cdf, pair_pdf, Family, PairCopula, Rotation, U_EPS,
};
pub use rvine::{dvine_order, dvine_structure, fit_dvine, fit_rvine_structure, RvineEdge, RvineSpec};
pub use tau::{kendall_tau_empirical, tau_to_param};

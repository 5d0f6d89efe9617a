//! Brute-force checks of the closed-form theory: classical trajectory
//! sampling, exact small-ensemble twisting and a non-perturbative
//! eigenvalue route to the dispersive coefficients.

mod eigen;
mod oat;
mod trajectory;

pub use eigen::{
    dispersive_eigen_oracle, eigen_convergence, ConvergencePoint, ConvergenceReport,
    DispersiveShift, MIN_SPIN_WEIGHT,
};
pub use oat::{
    joint_z_sampler_from_oat, oat_aligned_state, oat_moments, oat_state, OatMoments, OatState,
    OatZSampler, OAT_MAX_SPINS,
};
pub use trajectory::{
    classical_decay_oracle, desk_scale_chi, empirical_two_time_corr, integrated_z_path,
    mc_variance_curve, JointZSampler, McCurve, OracleReport, RecordReports, TrajectoryConfig,
};

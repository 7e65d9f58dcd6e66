//! Exact seasonal autocovariances of causal periodic ARMA (PARMA) models.
//!
//! The start-up autocovariances `gamma_h^(v)`, `0 <= h <= p`, of every season
//! solve one block-structured linear system `Phi gamma = zeta` of size
//! `S(p+1)`; higher lags follow from the model's difference equation. The
//! [`oracles`] module provides MA(infinity) and Monte Carlo cross-checks.
//!
//! ```
//! use parma::{autocovariances, ParmaModel};
//!
//! // y_t = phi^(v) y_{t-1} + e_t with two seasons
//! let model = ParmaModel::new(2, vec![vec![0.5], vec![0.8]], vec![], vec![1.0, 1.0]).unwrap();
//! let acf = autocovariances(&model, 3).unwrap();
//! assert!((acf.get(1, 0) - 1.25 / 0.84).abs() < 1e-12);
//! assert_eq!(acf.at(2, -1).unwrap(), acf.get(1, 1));
//! ```

pub mod cli;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod psi;
pub mod yule_walker;

pub use error::{ParmaError, Result};
pub use model::{
    check_causality, companion_matrix, season_wrap, validate_model, CausalityReport, ModelSpec,
    ParmaModel,
};
pub use oracles::{
    acf_ma_infinity, sample_periodic_acov, simulate, verify_residuals, SimulatedSeries,
};
pub use psi::{compute_psi, PsiTable};
pub use yule_walker::{
    assemble_system, autocov_at, autocovariances, capital_phi_block, extend_autocovariances,
    phi_block, solve_startup, AutocovTable, YuleWalkerSystem,
};

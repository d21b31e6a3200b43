//! Dual perturbation expansions for driven few-level quantum systems.
//!
//! The crate builds both faces of time-dependent perturbation theory for
//! small (N <= 8) quantum systems on a uniform time grid:
//!
//! * the weak-coupling time-ordered series of the propagator, and
//! * its strong-coupling dual, the adiabatic expansion: instantaneous
//!   eigenstates with dynamical and geometric phases at leading order, plus
//!   ordered corrections generated by the off-diagonal coupling of the
//!   moving frame.
//!
//! Exact closed-form propagators for the catalog models (Jaynes-Cummings
//! block, Schwinger rotating spin, driven two-level system) and a
//! unitarity-preserving exponential-midpoint integrator serve as oracles.
//! Diagnostics quantify when either series is trustworthy: the textbook
//! adiabaticity condition, envelope fits that detect secular (unbounded in
//! time) terms order by order, and the two resummations that remove them.
//!
//! Modules:
//! * [`numerics`] — complex matrices, closed-form 2x2 exponentials,
//!   Hermitian eigensolvers, cumulative Simpson quadrature.
//! * [`models`] — the Hamiltonian catalog behind one evaluation interface.
//! * [`spectral`] — instantaneous eigensystems, gauge continuation,
//!   geometric and dynamical phases.
//! * [`expansion`] — the two series engines and their per-order paths.
//! * [`oracle`] — exact and numerical ground-truth propagators.
//! * [`diagnostics`] — validity conditions, secular detection, resummation.

pub mod diagnostics;
pub mod error;
pub mod expansion;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod spectral;

pub use error::{Error, Result};
pub use expansion::{
    adiabatic_u0, correction_hamiltonian, correction_hamiltonian_frozen, dual_dyson_expand,
    dual_dyson_expand_checked, dyson_expand, dyson_expand_checked, partial_sum, SeriesKind,
    SeriesPropagator,
};
pub use diagnostics::{
    adiabaticity_lhs, first_order_secularity_schwinger, growth_is_material, jacobi_anger_coeffs,
    resum_comparison, resum_jc_shift, resummed_jc_order2, secular_slope, validity_report,
    DiagnosticsReport, ResumComparison, SchwingerSecularity, SlopeFit, Verdict,
};
pub use models::{
    eval_hamiltonian, make_driven_tls, make_generic_sampled, make_jaynes_cummings,
    make_schwinger_spin, HamiltonianModel, ModelKind, Picture,
};
pub use numerics::{
    cumulative_quadrature, cumulative_quadrature_real, mat_exp_su2, unitarity_defect, CMat,
    TimeGrid,
};
pub use oracle::{
    auto_oracle_kind, exact_jc_propagator, exact_schwinger_propagator, numeric_propagate,
    oracle_path, resummed_driven_tls_propagator, OracleKind,
};
pub use spectral::{
    dynamical_phase, frame_path, gauge_continue, geometric_phase_rates, instantaneous_eigensystem,
    FramePath, SpectralFrame,
};

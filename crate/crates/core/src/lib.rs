//! Non-staggered central schemes for systems of nonlocal balance laws
//! `∂ₜρᵏ + ∂ₓF_k(ρᵏ, R) = S_k(ρ⃗, R)` in one space dimension, where `R` is a
//! convolution of the solution with compactly supported kernels.
//!
//! ```
//! use nonlocal_nt::harness::{convergence_study, run_simulation, Experiment, ReferenceCache};
//! use nonlocal_nt::models::ModelKind;
//! use nonlocal_nt::schemes::SchemeId;
//!
//! let mut exp = Experiment::new(ModelKind::Arrhenius, "arrhenius-smooth", [-1.0, 1.0], 0.15);
//! exp.levels = vec![0, 1];
//! exp.reference_level = 4;
//!
//! let run = run_simulation(&exp, SchemeId::NtV2, 1)?;
//! assert_eq!(run.state.cells(), 80);
//!
//! let report = convergence_study(&exp, &ReferenceCache::disabled())?;
//! assert!(report.rates(SchemeId::NtV1)[0] > 1.5);
//! # Ok::<(), nonlocal_nt::Error>(())
//! ```

pub mod conv;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod kernels;
pub mod limiters;
pub mod models;
pub mod schemes;
pub mod state;
pub mod time;

pub use error::{Error, Result};

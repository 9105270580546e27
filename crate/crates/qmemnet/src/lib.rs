//! Passive linear quantum networks as complex state-space models, with
//! synthesis of the input pulse shapes that achieve perfect transfer of a
//! single-photon or coherent field state into a decoherence-free memory
//! subsystem, and simulation of the full writing/storage/reading procedure.
//!
//! The library is organized around a small set of pure, immutable types:
//!
//! - [`linsys::PassiveLinearSystem`]: the pair (Ω, C) with drift
//!   A = −iΩ − C†C/2, plus spectral and structural analysis (Hurwitz test,
//!   controllable subspace, decoherence-free decomposition, transfer
//!   function, transmission zeros).
//! - [`pulses::PulseFamily`] / [`pulses::InputSignal`]: the matched writing
//!   family ν(t) = −e^{−A♯(t−t₁)}C⊤Θ(t₁−t), the reading family
//!   ν̃(t) = e^{A⊤(t−t₂)}C⊤Θ(t−t₂), and scalar inputs composed from them.
//! - [`iosim::Trajectory`]: fixed-step RK4 integration of the classical
//!   input–output dynamics η̇ = Aη − C†ξ, ξ̃ = Cη + ξ, with per-step energy
//!   bookkeeping.
//! - [`stats`]: photon correlation matrix ⟨N⟩₁₁ and coherent mean/covariance
//!   evolution during writing, with a Lyapunov-integral closed form as an
//!   independent oracle.
//! - [`protocol::StageSchedule`]: piecewise-constant write/store/read
//!   orchestration, stored-coefficient extraction, retrieval fidelity, and
//!   the early-switch experiment.
//! - [`presets`]: builders for the single-mode cavity, the four-node
//!   atomic-ensemble network, and the active parametric-oscillator case.
//! - [`darkstate`]: photon-counting intensity checks certifying that the
//!   rising-exponential input keeps the conditioned state dark.
//!
//! All operations are pure functions of immutable inputs; concurrent batch
//! use is safe without synchronization.

pub mod darkstate;
pub mod error;
pub mod iosim;
pub mod linalg;
pub mod linsys;
pub mod presets;
pub mod protocol;
pub mod pulses;
pub mod stats;
pub mod table;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

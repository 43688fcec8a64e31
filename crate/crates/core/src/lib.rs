//! Shot-noise heating and parametric feedback cooling of an optically
//! levitated, prolate ellipsoidal nanoparticle.
//!
//! The crate is layered bottom-up:
//!
//! * [`material`] and [`optics`] turn particle and beam parameters into
//!   polarizabilities, inertia and focal quantities,
//! * [`rates`] evaluates the closed-form heating rates, trap frequencies and
//!   comparison ratios ([`rates::characterize`] builds one full record),
//! * [`analytics`] holds the cycle-averaged cooling solution,
//! * [`dynamics`] integrates stochastic trajectories with feedback and
//!   measurement noise, and averages ensembles of them,
//! * [`cli`] is the configuration, command and output layer used by the
//!   `shotnoise` binary.

pub mod analytics;
pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod material;
pub mod optics;
pub mod rates;

pub use error::{Error, Result};
pub use material::{Ellipsoid, EulerAngles, Material, PolarizabilityTensor};
pub use optics::{Beam, FocusParameters};
pub use rates::{characterize, Dof, TrapCharacterization};

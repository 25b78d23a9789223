//! Velocity-space toolkit for the linearized hard-sphere collision operator.
//!
//! The crate discretizes fluctuations `f` around the global Maxwellian on a
//! cubic velocity grid, assembles the linearized collision operator
//! `L = nu - K` and the bilinear form `Gamma` from their defining collision
//! integrals, solves `L^{-1}` on the orthogonal complement of the collision
//! invariants, and extracts the viscosity and heat-conductivity constants
//! that drive the hydrodynamic limit.
//!
//! Everything is generic over the scalar type through [`Real`]; `f64`
//! aliases are exported at the root.

pub mod error;
pub mod real;

pub mod oracle;
pub mod quad1d;

pub mod grid;
pub mod interp;
pub mod projector;
pub mod sphere;
pub mod symmetry;

pub mod burnett;
pub mod collision;
pub mod gap;
pub mod solve;

pub use collision::{
    invariant_moments, CollisionOperator, CollisionParams, GammaBatch, Template, TemplateFamily,
    TensorTag,
};
pub use burnett::{
    build_burnett, build_super_burnett, solve_inverses, transport_coefficients,
    verify_gamma_bridge, verify_isotropy, verify_super_burnett, BridgeReport, BurnettTensors,
    IsotropyReport, SuperBurnettReport, SuperBurnettTensors, TransportCoefficients,
};
pub use error::{CoreError, Result};
pub use gap::{estimate_spectral_gap, ResolutionTag, SpectralGapEstimate};
pub use solve::{solve_linv, MACRO_REL_TOL, SOLVE_REL_TOL};
pub use grid::{
    build_velocity_grid, inner, maxwellian, norm, sqrt_maxwellian, weighted_sup_norm, MacroTriple,
    VelocityFunction, VelocityGrid,
};
pub use projector::{project_p, Projector};
pub use real::Real;

/// `f64` velocity grid.
pub type VelocityGrid64 = VelocityGrid<f64>;
/// `f64` grid function.
pub type VelocityFunction64 = VelocityFunction<f64>;
/// `f64` macroscopic coefficients.
pub type MacroTriple64 = MacroTriple<f64>;

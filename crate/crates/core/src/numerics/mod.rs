//! Shared numeric kernel: quadrature, ODE integration, root bracketing and
//! seeded Monte-Carlo. Everything downstream is built on these.

pub mod interp;
pub mod montecarlo;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub use interp::HermiteTable;
pub use montecarlo::{mean_until, Moments, MonteCarloEstimate, SampleStream};
pub use ode::{solve_ivp, OdeSpec, StopReason, Trajectory};
pub use quadrature::{
    integrate_1d, integrate_biradial, integrate_radial_rn, integrate_rect, Estimate,
    QuadratureSpec, Rule,
};
pub use roots::{find_root_bracketed, Root};

//! Solutions of the elliptic Euler-Poisson-Darboux equation E(1/2,1/2), their
//! critical points, and the integrable hierarchies generated by them.

pub mod cli;
pub mod complexfield;
pub mod critical;
pub mod darios;
pub mod density;
pub mod epd;
pub mod error;
pub mod hamiltonian;
pub mod hydro;
pub mod params;
pub mod report;

pub use complexfield::{CPoint, Contour, ContourKind, QuadOptions};
pub use error::{EpdError, Result};

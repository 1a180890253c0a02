//! Symbolic and numeric tools for ansatz reductions of the nonlinear
//! diffusion equation `u_t = (H(x)/u)_xx + F` and for Lie-Bäcklund
//! symmetries of third-order ODEs.

pub mod catalog;
pub mod expr;
pub mod invariance;
pub mod jet;
pub mod numerics;
pub mod pdecheck;
pub mod reduction;

pub use expr::{parse, Binding, Expr};

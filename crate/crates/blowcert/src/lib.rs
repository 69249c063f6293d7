//! Rigorous enclosures of finite-time blow-up for autonomous polynomial ODEs
//! that are asymptotically quasi-homogeneous at infinity.
//!
//! The pipeline: compactify phase space so infinity becomes a finite horizon,
//! desingularize the frozen time scale, integrate the compactified flow with
//! validated interval methods, certify a Lyapunov domain around the target
//! horizon equilibrium, and convert the certified convergence into a two-sided
//! bound on the blow-up time `t_max`.
//!
//! Every numerical claim is an interval enclosure: if a run reports
//! `t_max ∈ [a, b]`, the exact blow-up time of the exact solution lies in
//! `[a, b]`.

pub mod blowup;
pub mod certificate;
pub mod compact;
pub mod field;
pub mod integrate;
pub mod interval;
pub mod lyapunov;
pub mod problems;

pub use interval::{Interval, IntervalMatrix, IntervalVector};

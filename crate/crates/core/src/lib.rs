//! Resolvents of monotone equilibrium problems on hyperbolic space.
//!
//! Hyperbolic space H^n is realized as the upper sheet of the hyperboloid
//! `<x, x> = -1` in Minkowski space. On top of the exact geometry this crate
//! provides closed convex regions, bifunctions `f: K x K -> R`, solvers for the
//! cosh-penalized resolvent
//!
//! ```text
//! L_f x = { z in K : f(z, y) + cosh d(x, y) - cosh d(x, z) >= 0 for all y in K }
//! ```
//!
//! a proximal point driver `x_{k+1} = L_{λ_k f} x_k`, and a seeded property
//! harness that checks the geometric and resolvent inequalities numerically.

pub mod bifunction;
pub mod error;
pub mod geometry;
pub mod harness;
mod model;
pub mod ppa;
pub mod region;
pub mod resolvent;

pub use bifunction::{Bifunction, BifunctionSpec, Clause, Combine, ConditionReport, Objective, Term, TermKind};
pub use error::{Error, Result};
pub use geometry::{GeodesicSegment, HPoint, TangentVec};

pub use region::{ConvexRegion, PointGrid};
pub use ppa::{IterTrace, LambdaSchedule, TraceStatus};
pub use resolvent::{ResolventOutcome, SolverKind, SolverOptions};


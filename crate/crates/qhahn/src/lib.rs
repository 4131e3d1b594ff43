//! Gap probabilities of the q-Hahn orthogonal polynomial ensemble.
//!
//! Three independent routes to `D_k(s)`, the probability that all `k`
//! particles sit strictly below lattice index `s`:
//!
//! * [`ensemble`]: Fredholm determinants of the Christoffel-Darboux kernel
//!   (plus brute-force enumeration for tiny cases);
//! * [`painleve`]: a multiplicative recurrence of discrete Painleve type,
//!   seeded by closed forms at `s = k, k+1`;
//! * [`connection`]: tau-function ratios along a chain of modified 2x2
//!   q-difference connections.
//!
//! [`scaling`] and [`airy`] cover the edge asymptotics towards the
//! Tracy-Widom law; [`cli`] is the command-line front end.

pub mod airy;
pub mod cli;
pub mod connection;
pub mod ensemble;
pub mod error;
pub mod painleve;
pub mod poly;
pub mod precision;
pub mod scaling;
pub mod selftest;

pub use error::{Error, Result};
pub use precision::{Ctx, Real};

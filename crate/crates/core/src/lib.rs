//! Rotational velocity of an Ackermann-steering vehicle from event-camera
//! feature trails.
//!
//! Each trail of events from one tracked corner yields a polynomial
//! rank-minimization problem in the single unknown `omega`; trails are fused
//! by histogram voting. The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use eventack_core::geometry::{project_bearing, relative_pose, AckermannParams, WorldPoint2D};
//! use eventack_core::solver::{solve_omega, BearingSample, ExpansionOrder, SolverConfig};
//!
//! let motion = AckermannParams::new(0.3, 0.3);
//! let landmark = WorldPoint2D::new(0.5, 4.0);
//! let samples: Vec<_> = (0..30)
//!     .map(|i| {
//!         let t = 0.25 * i as f64 / 29.0;
//!         let x = project_bearing(&landmark, &relative_pose(&motion, t)).unwrap();
//!         BearingSample::new(x, t)
//!     })
//!     .collect();
//! let est = solve_omega(&samples, ExpansionOrder::S7C6, 0.3, &SolverConfig::default()).unwrap();
//! assert!((est.omega - 0.3).abs() < 1e-4);
//! ```
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod geometry;
pub mod poly;
pub mod robust;
pub mod solver;

pub use geometry::{AckermannParams, PlanarPose, WorldPoint2D};
pub use poly::{Polynomial, RootSet};
pub use robust::{histogram_vote, VoteConfig, VoteResult};
pub use solver::{solve_omega, BearingSample, ExpansionOrder, OmegaEstimate, SolverConfig};

//! Numerical tools for rank-g Schottky groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`moebius`]: Möbius maps, upper half-space geometry, the Poisson kernel
//!   and the cross ratio.
//! * [`groups`]: Schottky groups from circle pairings or from multipliers and
//!   fixed points, the classical (disjoint circles) check and the JSON file
//!   format.
//! * [`words`]: reduced words in the free group, basis shifts, Nielsen moves
//!   and double-coset representatives.
//! * [`measures`]: truncated Poincaré series, dimension brackets, discrete
//!   Patterson–Sullivan sector measures, the mean norm and dimension bounds.
//! * [`periods`]: the Schottky period matrix with a tail certificate, and the
//!   annulus extremal length.
//! * [`hexagon`]: right-angled hexagon trigonometry, the rational norm `Q`
//!   and the pants inequality suite.
//!
//! The guide in `book/` walks through each part with runnable examples.

pub mod error;
pub mod groups;
pub mod hexagon;
pub mod measures;
pub mod moebius;
pub mod periods;
pub mod sum;
pub mod words;

pub use error::{Error, Result};
pub use groups::{CirclePairing, SchottkyGroupSpec, ValidationReport};
pub use moebius::{Circle, ComplexPoint, H3Point, LoxodromicData, MoebiusMap};
pub use num_complex::Complex64;
pub use words::{Basis, Letter, Word};

//! Exact arithmetic for heights, local Weil functions, and position
//! constants of hypersurface families over Q, with an empirical verifier
//! for the weighted height inequality against moving targets.
//!
//! The crate keeps every quantity an exact rational for as long as
//! possible: local norms, Weil ratios, position constants, and filtration
//! factors are exact, and one natural logarithm at the boundary is the only
//! inexact step. Floating-point comparisons always carry an explicit
//! tolerance.
//!
//! A quick tour:
//!
//! ```
//! use heightlab::places::{height_point, product_over_places, rat, Place, ProjPoint};
//! use heightlab::polynomials::{weil, HomPoly};
//!
//! // The product formula is exact.
//! assert_eq!(product_over_places(&rat(-84, 55)).unwrap(), rat(1, 1));
//!
//! // Heights are logs of exact integers.
//! let x = ProjPoint::from_ints(&[1, 128]).unwrap();
//! assert!((height_point(&x) - 128f64.ln()).abs() < 1e-12);
//!
//! // (1 : 128) is 2-adically close to the line x1 = 0.
//! let line = HomPoly::parse("x1", 2).unwrap();
//! let lam = weil(&line, &Place::Finite(2), &x).unwrap();
//! assert!((lam.value - 7.0 * 2f64.ln()).abs() < 1e-12);
//! ```
//!
//! The narrative guide lives in `book/`; every code block there is compiled
//! and run as part of `cargo test`, so the guide and the library cannot
//! drift apart. Start with [`verifier`] for the end-to-end pipeline or
//! [`places`] for the foundations.

pub mod arith;
pub mod error;
pub mod filtration;
pub mod ideals;
pub mod moving;
pub mod places;
pub mod polynomials;
pub mod position;
pub mod verifier;

pub use error::{Error, Result};

// Compile and run every code block of the guide with `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/places-and-heights.md")]
    pub struct PlacesAndHeights;
    #[doc = include_str!("../../../book/src/polynomials-and-weil.md")]
    pub struct PolynomialsAndWeil;
    #[doc = include_str!("../../../book/src/ideals.md")]
    pub struct Ideals;
    #[doc = include_str!("../../../book/src/position.md")]
    pub struct Position;
    #[doc = include_str!("../../../book/src/filtration.md")]
    pub struct Filtration;
    #[doc = include_str!("../../../book/src/moving.md")]
    pub struct Moving;
    #[doc = include_str!("../../../book/src/verifier.md")]
    pub struct Verifier;
    #[doc = include_str!("../../../book/src/config-reference.md")]
    pub struct ConfigReference;
}

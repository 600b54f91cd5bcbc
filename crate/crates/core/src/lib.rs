//! Exact machinery for generalized inverses, multivariate distribution
//! functions and copula extraction.
//!
//! All arithmetic is over arbitrary-precision rationals, so every property
//! check has a definite yes/no answer and every failure comes with an exact
//! witness.
//!
//! ```
//! use exact_copula::{q, ExtScalar, Knot, MonotoneFn};
//!
//! // cdf of a fair coin on {0, 1}
//! let coin = MonotoneFn::new(vec![
//!     Knot::new(q(0, 1), q(0, 1), q(1, 2)),
//!     Knot::new(q(1, 1), q(1, 2), q(1, 1)),
//! ])?;
//! assert_eq!(coin.gen_inverse(&q(3, 10))?, ExtScalar::Finite(q(0, 1)));
//! assert_eq!(coin.gen_inverse_right(&q(1, 2))?, ExtScalar::Finite(q(1, 1)));
//! # Ok::<(), exact_copula::Error>(())
//! ```
//!
//! The guide under `book/` walks through the concepts; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod error;
pub mod families;
pub mod io;
pub mod monotone;
pub mod mvdf;
pub mod scalar;
pub mod sklar;

pub use error::{Error, Result};
pub use families::GridMass;
pub use monotone::{FfResult, FfWitness, Knot, LemmaCheck, LemmaReport, MonotoneFn};
pub use mvdf::{
    check_df_axioms, volume, Cuboid, CuboidSampler, DfReport, DistributionFunction, MultivariateDf,
    Point,
};
pub use scalar::{grid, q, ExtScalar, Scalar};
pub use sklar::{
    copula_eval, extract_copula, verify_copula_axioms, verify_sklar_identity,
    verify_uniform_margins, CheckReport, Copula, GridSpec, Violation,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/generalized-inverse.md")]
    mod generalized_inverse {}
    #[doc = include_str!("../../../book/src/right-limits.md")]
    mod right_limits {}
    #[doc = include_str!("../../../book/src/volumes.md")]
    mod volumes {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/copulas.md")]
    mod copulas {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! The chapters of `book/`, one module each. mdbook cannot build snippets
//! against a local crate, so rustdoc runs them here instead: `cargo test
//! --doc -p refine-guide` keeps the book honest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}
#[doc = include_str!("../../../book/src/grammars.md")]
pub mod grammars {}
#[doc = include_str!("../../../book/src/sequents.md")]
pub mod sequents {}
#[doc = include_str!("../../../book/src/semantics.md")]
pub mod semantics {}
#[doc = include_str!("../../../book/src/calculus.md")]
pub mod calculus {}
#[doc = include_str!("../../../book/src/interpolation.md")]
pub mod interpolation {}
#[doc = include_str!("../../../book/src/stit.md")]
pub mod stit {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}

//! Refined labelled sequent calculi for grammar logics with converse and for
//! single-agent deontic STIT logic.
//!
//! The crate is organised bottom-up:
//!
//! * [`syntax`]: NNF formulas, duality, parsing and printing.
//! * [`grammar`]: context-free closed semi-Thue systems and CFL-reachability.
//! * [`sequent`]: labelled sequents, sequent graphs and propagation graphs.
//! * [`semantics`]: finite models and model checking.
//! * [`calculus`]: the grammar-logic calculus, proof checking, bounded proof
//!   search and nested sequents.
//! * [`interpolation`]: Lyndon interpolants read off proofs.
//! * [`stit`]: the decision procedure for deontic STIT with counter-models.
//!
//! ```
//! use refine::syntax::{parse, negate};
//!
//! let f = parse("[a]~p & q").unwrap();
//! assert_eq!(negate(&f).to_string(), "<a>p | ~q");
//! ```

pub mod calculus;
pub mod fixtures;
pub mod grammar;
pub mod interpolation;
pub mod semantics;
pub mod sequent;
pub mod stit;
pub mod syntax;

//! Finite categories, generalized sketches, and bounded model checking in finite sets.
//!
//! The library is organized around a small tower:
//!
//! - [`fincat`]: finite categories given by explicit composition tables, with
//!   functors, natural transformations, presentations, and exhaustive limit
//!   certification.
//! - [`finset`]: the category of finite sets with *chosen* limits,
//!   exponentials, and dependent products (the standard structured target).
//! - [`lexpr`]: a term language for objects and morphisms of the free locally
//!   Cartesian closed structure over a generator category, evaluated into
//!   finite sets.
//! - [`sigalg`]: operation signatures, derived-operation categories, algebras,
//!   and equation satisfaction, including the executable presentation of
//!   finitely complete categories.
//! - [`sketch`]: marked diagrams over a base category, model checking, and
//!   bounded model enumeration.
//! - [`theories`]: ready-made sketches (walking type theory, dependent
//!   products, booleans) used as fixtures throughout.
//! - [`syntax`]: the shared textual formats and the expression DSL.

pub mod fincat;
pub mod finset;
pub mod lexpr;
pub mod sigalg;
pub mod sketch;
pub mod syntax;
pub mod theories;

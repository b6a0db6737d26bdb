//! The narrative guide, compiled straight from `book/src/`.
//!
//! Each chapter of the mdbook guide is included as a rustdoc module, so
//! every fenced Rust snippet in the book is compiled and executed by
//! `cargo test --doc` and the book can never drift from the library API.
//! Build the rendered book with `mdbook build book` from the repository
//! root.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/elasticity.md")]
pub mod elasticity {}

#[doc = include_str!("../../../book/src/derivatives.md")]
pub mod derivatives {}

#[doc = include_str!("../../../book/src/enrichment.md")]
pub mod enrichment {}

#[doc = include_str!("../../../book/src/collocation.md")]
pub mod collocation {}

#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}

#[doc = include_str!("../../../book/src/sif.md")]
pub mod sif {}

#[doc = include_str!("../../../book/src/benchmarks.md")]
pub mod benchmarks {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

//! The book under `book/` is the narrative guide to the trisigma
//! library. mdbook cannot run snippets against external crates, so each
//! chapter is included here as a doc comment: `cargo test --doc` then
//! compiles and executes every ```rust block, and the book cannot drift
//! out of sync with the API it documents.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/kernel.md")]
pub mod kernel {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/certification.md")]
pub mod certification {}

#[doc = include_str!("../../../book/src/threshold.md")]
pub mod threshold {}

#[doc = include_str!("../../../book/src/spectrum.md")]
pub mod spectrum {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

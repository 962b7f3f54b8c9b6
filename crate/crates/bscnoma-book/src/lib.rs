//! The guide in `book/`, included chapter by chapter so `cargo test` runs
//! every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/link-model.md")]
pub mod link_model {}

#[doc = include_str!("../../../book/src/sca.md")]
pub mod sca {}

#[doc = include_str!("../../../book/src/optimizer.md")]
pub mod optimizer {}

#[doc = include_str!("../../../book/src/designs.md")]
pub mod designs {}

#[doc = include_str!("../../../book/src/codes.md")]
pub mod codes {}

#[doc = include_str!("../../../book/src/decoding.md")]
pub mod decoding {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

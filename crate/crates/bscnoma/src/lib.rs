//! Energy-efficient backscatter-assisted cooperative NOMA.
//!
//! The crate has two halves that share nothing but the link model:
//!
//! * an alternating optimizer ([`optimizer`]) that maximizes bits per joule
//!   over the base-station power, the NOMA power split and the relay power,
//!   built on the closed-form link model ([`sysmodel`]), the successive convex
//!   approximation of the rates ([`sca`]) and a small polynomial root finder
//!   ([`polyroots`]);
//! * a channel-coding pipeline that turns Langford sequences into cyclic
//!   designs ([`designs`]), the designs into 4-cycle-free quasi-cyclic LDPC
//!   matrices ([`qcldpc`]), and decodes the far user's two observations
//!   jointly with sum-product belief propagation ([`codec`]).
//!
//! [`mcsim`] ties both halves to seeded Monte Carlo experiments.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod designs;
pub mod gf2;
pub mod mcsim;
pub mod optimizer;
pub mod polyroots;
pub mod qcldpc;
pub mod sca;
pub mod sysmodel;

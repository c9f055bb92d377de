//! Runs the guide's code listings as doc-tests so they cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../../book/src/mechanics.md")]
pub mod mechanics {}
#[doc = include_str!("../../../book/src/optics.md")]
pub mod optics {}
#[doc = include_str!("../../../book/src/descriptor.md")]
pub mod descriptor {}
#[doc = include_str!("../../../book/src/dataset.md")]
pub mod dataset {}
#[doc = include_str!("../../../book/src/classification.md")]
pub mod classification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
#[cfg(doctest)]
pub struct ReadMe;

//! The book's chapters, compiled so their listings run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/symbols.md")]
pub mod symbols {}

#[doc = include_str!("../../../book/src/conics.md")]
pub mod conics {}

#[doc = include_str!("../../../book/src/local-points.md")]
pub mod local_points {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

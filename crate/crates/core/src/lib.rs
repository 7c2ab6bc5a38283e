//! Tooling for AI FactSheets.
//!
//! A [`template::Template`] lists the questions a FactSheet answers. Producers
//! append answers to a [`factstore::Store`]; a [`factstore::FactSheet`] is the
//! point-in-time view of those answers for one subject. [`compliance`] checks a
//! sheet for completeness and lifecycle gates, [`render`] prints it for people
//! and machines, and [`methodology`] carries the interview and evaluation
//! question banks plus the engine that turns evaluations into template
//! revision suggestions.

pub mod compliance;
pub mod render;
pub mod fixtures;
pub mod lifecycle;
pub mod methodology;
pub mod template;
pub mod factstore;
pub mod time;

/// The guide's chapters, compiled so their samples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/templates.md")]
    mod templates {}
    #[doc = include_str!("../../../book/src/facts.md")]
    mod facts {}
    #[doc = include_str!("../../../book/src/compliance.md")]
    mod compliance {}
    #[doc = include_str!("../../../book/src/rendering.md")]
    mod rendering {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli-and-service.md")]
    mod cli_and_service {}
}

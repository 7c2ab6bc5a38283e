//! Bundled example templates.

/// The model catalog template, ten questions a developer asks of a catalog model.
pub const MAX_CATALOG: &str = include_str!("../fixtures/max_catalog.fst");

/// The ethics review board template for a deployed service.
pub const ETHICS_BOARD: &str = include_str!("../fixtures/ethics_board.fst");

use crate::template::{parse_template, Template};

pub fn max_catalog() -> Template {
    parse_template(MAX_CATALOG).expect("bundled fixture parses")
}

pub fn ethics_board() -> Template {
    parse_template(ETHICS_BOARD).expect("bundled fixture parses")
}

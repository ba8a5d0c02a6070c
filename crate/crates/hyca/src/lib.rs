//! File formats, SVG rendering and the command-line front end for
//! `hyca-core`.

pub mod cli;
pub mod formats;
pub mod render;

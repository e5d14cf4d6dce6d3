#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod moduli;
pub mod moreau;
pub mod oracle;
pub mod report;
pub mod simplex;
pub mod transforms;

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod complex;
pub mod fixtures;
mod num;
pub mod homotopy;
pub mod metric;
pub mod reeb;
pub mod snf;
pub mod systole;

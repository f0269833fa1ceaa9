// Errors carry the offending exact values; they are not on hot paths.
#![allow(clippy::result_large_err)]

pub mod checks;
pub mod law;
pub mod progeny;
pub mod rational;
pub mod series;
pub mod sibuya;
pub mod sibuya_progeny;
pub mod sim;
pub mod tilt;

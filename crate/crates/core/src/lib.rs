//! Exact intersection theory of plane branches: characteristic sequences,
//! key-polynomial towers, intersection numbers from resultants, attainable
//! intersection sets and realizers for intersection numbers and distances.

pub mod field;
pub mod series;
pub mod charseq;
pub mod oracle;
pub mod tower;
pub mod contact;
pub mod bayer;
pub mod distance;
pub mod campaign;
pub mod json;
pub mod cli;

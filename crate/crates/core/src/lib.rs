pub mod canon;
pub mod corpus;
pub mod dsl;
pub mod linear;
pub mod matching;
pub mod numeric;
pub mod order;
pub mod prolongation;
pub mod report;
pub mod ranking;
pub mod symexpr;
pub mod truncation;

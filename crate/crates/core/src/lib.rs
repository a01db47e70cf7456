pub mod bench;
pub mod bits;
pub mod circuit;
pub mod clifford;
pub mod compile;
pub mod graph;
pub mod partition;
pub mod pipeline;
pub mod hardware;
pub mod reduction;
pub mod schedule;
pub mod tableau;

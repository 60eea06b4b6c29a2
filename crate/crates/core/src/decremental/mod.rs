//! Decremental reachability and the bottleneck oracle built on it.

pub mod bottleneck;
pub mod estree;
pub mod reach;

pub use bottleneck::{build_bottleneck_oracle, BottleneckOracle};
pub use estree::{DecGraph, EsState, EsTree};
pub use reach::{new_dec_oracle, DecReachOracle};

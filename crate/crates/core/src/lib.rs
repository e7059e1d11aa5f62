//! Arbitrage, martingale measures and super-replication on finite scenario
//! spaces where prices live on a large filtration and trading happens on
//! smaller ones.

pub mod bayes;
pub mod canonical;
pub mod ftap;
pub mod hedging;
pub mod linalg;
pub mod lpsolve;
pub mod market;
pub mod num;
pub mod probspace;
pub mod random;
pub mod scenario;

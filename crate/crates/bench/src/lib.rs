//! File formats, experiment driver and reporting for `minieg`.

pub mod container;
pub mod experiment;
pub mod export;
pub mod libsvm;

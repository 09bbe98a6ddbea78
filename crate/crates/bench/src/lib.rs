//! Shared inputs for the pipeline benchmarks live in the bench targets.

//! Acceptance suite for the solvers. The checks live in `tests/acceptance.rs`
//! and run with `cargo test -p pucci-validation --test acceptance`; criterion
//! numbers passed as arguments select a subset.

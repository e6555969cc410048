//! Acceptance checks live in `tests/acceptance.rs`; run with `cargo test -p pnais-validation`.

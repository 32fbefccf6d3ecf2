//! Acceptance checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p relhyp-verify`. They drive the `relhyp` binary from the
//! same target directory, so build it first when running this package alone.

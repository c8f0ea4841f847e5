//! Acceptance checks for `pipir`; see `tests/acceptance.rs`.

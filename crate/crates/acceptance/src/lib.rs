//! Acceptance checks for `mwgate`, kept in their own package so they run
//! after every other test of the workspace. See `tests/acceptance.rs`.

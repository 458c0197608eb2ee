//! Host package for the acceptance suite; see `tests/acceptance.rs`.

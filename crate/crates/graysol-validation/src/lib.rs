//! End-to-end acceptance runs. Everything lives in `tests/acceptance.rs`.

//! Shared pieces of the acceptance suite live in its test target.

//! Holds the `acceptance` test target only. Run it with
//! `cargo test -p sie-validation --test acceptance`.

//! Holds the `acceptance` test target, which reproduces the headline numerical
//! results of `zeno-map` end to end. Run it with
//! `cargo test -p zeno-map-validation --test acceptance`.

//! Holds the end-to-end acceptance suite (`cargo test -p ringjsa-validation`).
//! It lives in its own package so that it runs after every other test
//! binary in a workspace test run.

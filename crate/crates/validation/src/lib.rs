//! Holds the `acceptance` test binary, which runs after every other crate's
//! tests. Run it alone with `cargo test -p gsynch-validation --test acceptance`.

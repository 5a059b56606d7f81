//! Holds the `acceptance` test target; run it with
//! `cargo test -p spi3d-acceptance --test acceptance`.

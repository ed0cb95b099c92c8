//! The long-form guide, embedded chapter by chapter from `book/`.
//!
//! Each module below includes one chapter of the mdbook source verbatim,
//! so `cargo doc` renders the guide inside the API docs and `cargo test`
//! compiles and runs every code snippet the book shows. If a chapter
//! drifts from the library, a doc-test here breaks.

#[doc = include_str!("../../../book/src/ch01-overview.md")]
pub mod ch01_overview {}

#[doc = include_str!("../../../book/src/ch02-channel.md")]
pub mod ch02_channel {}

#[doc = include_str!("../../../book/src/ch03-interval.md")]
pub mod ch03_interval {}

#[doc = include_str!("../../../book/src/ch04-timing.md")]
pub mod ch04_timing {}

#[doc = include_str!("../../../book/src/ch05-frontier.md")]
pub mod ch05_frontier {}

#[doc = include_str!("../../../book/src/ch06-baselines-eval.md")]
pub mod ch06_baselines_eval {}

#[doc = include_str!("../../../book/src/ch07-cli.md")]
pub mod ch07_cli {}

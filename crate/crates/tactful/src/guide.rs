//! The book's chapters, compiled as doctests.
//!
//! mdbook cannot run a book's examples against the crate, so each chapter
//! from `book/src/` is included here as a doc comment: `cargo test --doc`
//! builds and runs every ```rust snippet, keeping the book and the library
//! honest with each other. One module per chapter makes a failing snippet
//! easy to trace back to its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/causal-model.md")]
pub mod causal_model {}

#[doc = include_str!("../../../book/src/counterfactual-regret.md")]
pub mod counterfactual_regret {}

#[doc = include_str!("../../../book/src/choosing-explanations.md")]
pub mod choosing_explanations {}

#[doc = include_str!("../../../book/src/fitting.md")]
pub mod fitting {}

#[doc = include_str!("../../../book/src/model-comparison.md")]
pub mod model_comparison {}

#[doc = include_str!("../../../book/src/data-and-cli.md")]
pub mod data_and_cli {}

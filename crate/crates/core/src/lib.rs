//! Core algorithms for translating speech audio into categorical prosodic
//! features, natural-language descriptions, and emotion-recognition prompts.
//!
//! The crate is `no_std` (with `alloc`): everything here is a pure function
//! of its inputs. File formats, the HTTP client, and the CLI live in the
//! companion `speechcue` crate.
//!
//! Pipeline overview:
//!
//! ```text
//! AudioClip ──► dsp::extract_features ──► ProsodicFeatures
//!                                              │
//!          thresholds::standardize ◄───────────┘
//!                     │
//!          thresholds::build_threshold_table ──► categorize
//!                     │
//!          describe::{describe_features, render_impression}
//!                     │
//!          prompt::build_prompt ──► PromptBundle
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baseline;
pub mod corpus;
pub mod describe;
pub mod dsp;
pub mod labels;
pub mod metrics;
pub mod prompt;
pub mod thresholds;

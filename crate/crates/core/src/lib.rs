//! Core of the `embshift` bias-audit toolkit.
//!
//! Everything here is allocation-only and IO-free so it can run anywhere:
//! the term bank and probe generators, the binary embedding-store codec,
//! cosine pairing, the two-sample Kolmogorov-Smirnov test, Gaussian KDE and
//! the baseline-vs-mitigated comparison that ties them together. File access,
//! report rendering and the CLI live in the `embshift` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audit;
pub mod embstore;
pub mod issue;
pub mod seqgen;
pub mod simengine;
pub mod stats;
pub mod termbank;

pub use audit::{compare, AuditReport, CompareOptions, ComparisonBlock, ComparisonKind, GroupBy};
pub use embstore::{EmbeddingKey, EmbeddingStore, StoreError};
pub use issue::{Issue, Severity};
pub use seqgen::{
    generate_encoder_pairs, generate_winodec, locate_term_spans, CharSpan, EncoderTemplate, PairConfig, ProbeKind,
    ProbeSequence, ScoreConfig, TermRole,
};
pub use simengine::{cosine, group_samples, pair_scores, GroupField, GroupKey, SimilaritySample};
pub use stats::{kde, kolmogorov_sf, ks_two_sample, summarize, Bandwidth, DistSummary, KdeCurve, KsResult};
pub use termbank::{GenderClass, OccupationEntry, TermBank, TermEntry};

/// Version string recorded in reports and run manifests.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

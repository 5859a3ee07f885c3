//! DICOM de-identification and answer-key benchmark scoring.
//!
//! The crate is organized as a pipeline:
//!
//! - [`dicom`] reads and writes uncompressed Part-10 files.
//! - [`deid`] applies a tag policy with consistent UID/patient-ID remapping,
//!   per-patient date shifting, free-text scrubbing and pixel redaction.
//! - [`corpus`] generates a seeded synthetic corpus with its answer key.
//! - [`answer_key`] loads and validates answer keys and mapping files.
//! - [`scorer`] checks a de-identified corpus against the key, series- or
//!   instance-based, with overall, normalized and weighted accuracy.
//! - [`reports`] writes the scoring and discrepancy reports.
//! - [`cli`] wires these together behind the `midib` binary.

pub mod answer_key;
pub mod cli;
pub mod corpus;
pub mod deid;
pub mod dicom;
pub mod reports;
pub mod scorer;
pub mod tokens;

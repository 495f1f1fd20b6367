//! Core algorithms for mapping nationality and occupation affiliations of
//! notable people into co-occurrence networks, community structure and
//! contemporaneity-filtered hyperlink graphs.
//!
//! The crate is `no_std` and only needs an allocator. IO, file formats,
//! threading and the command line live in the `cohistory` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod affiliation;
pub mod backbone;
pub mod biograph;
pub mod consensus;
pub mod error;
pub mod hclust;
pub mod louvain;
pub mod nullmodel;
pub mod person;
pub mod seed;
pub mod timeline;
pub mod unionfind;

pub use error::{Error, Result};
pub use person::{DatePrecision, Dimension, PersonRecord};

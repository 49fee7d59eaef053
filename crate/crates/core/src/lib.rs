//! Parametric solar energy insurance with zero-knowledge claims.
//!
//! The pipeline: an integer reference model of the surface-solar-irradiation
//! index ([`ssi_model`]), its arithmetization ([`circuit`]), a bounded
//! Laurent-polynomial commitment scheme ([`commitments`]), the claim proof
//! itself ([`sonic`]), a simulated remote-sensing provider ([`rsp`]) and the
//! contract/ledger state machine ([`ledger`]).

pub mod circuit;
pub mod commitments;
pub mod field;
pub mod ledger;
pub mod policy;
pub mod rsp;
pub mod sonic;
pub mod ssi_model;

pub use circuit::CircuitShape;
pub use commitments::{Commitment, LaurentPolynomial, OpeningProof, Srs};
pub use ledger::{Ledger, PolicyState};
pub use policy::{Area, Period, PolicyTerms};
pub use sonic::{prove, verify, ClaimProof, RejectReason, Verdict};
pub use ssi_model::{ModelParams, RemoteSensingSample, Timestamp};

//! Citation fidelity: how faithfully a citing sentence reports a claim of
//! the paper it cites.
//!
//! The pipeline extracts single-source reporting citations, selects claim
//! sentences from cited papers, scores each citation against its best
//! matching claim on a 1 to 5 scale, then runs a regression of fidelity on
//! paper, team and proximity factors and an intermediary-citation
//! comparison. Scoring and both classifiers are pluggable: deterministic
//! lexical baselines ship here, and [`remote::RemoteClient`] speaks the HTTP
//! protocol of a model server.

pub mod analysis;
pub mod claims;
pub mod corpus;
pub mod extract;
pub mod fidelity;
pub mod pipeline;
pub mod remote;
pub mod synth;
pub mod telephone;

pub use claims::{BaselineDiscourseClassifier, ClaimSentence, DiscourseCategory, DiscourseClassifier};
pub use corpus::{AuthorRef, CitationGraph, Paper, PaperId, PublicationType, ReferenceEntry};
pub use extract::{
    BackgroundClassifier, BaselineBackgroundClassifier, CitationInstance, CitationMarker, CitationRecord, MarkerStyle,
    RejectReason,
};
pub use fidelity::{BaselineScorer, FidelityScore, PairRecord, Scorer, ScorerId};
pub use remote::{RemoteClient, TransportError};
pub use telephone::{EffectEstimate, MatchedPair, Stratum, TelephoneTriple};

//! Exact analysis of three-party secure computation over finite alphabets.
//!
//! The model: Alice holds an input `X`, Bob holds an input `Y`, and Charlie
//! must produce an output `Z` distributed according to a fixed channel
//! `p(z|x,y)`, using private randomness and messages exchanged over the three
//! pairwise links (`M12` between Alice and Bob, `M23` between Bob and Charlie,
//! `M31` between Charlie and Alice). Protocols are secure when each party
//! learns nothing beyond its own input/output.
//!
//! The crate is organized in layers:
//!
//! * [`prob`] — exact (rational) joint distributions, channels, and problem
//!   instances, with entropy and mutual information on top.
//! * [`info`] — Gács–Körner common information, residual information,
//!   characteristic graphs and conditional graph entropy, normal forms, and
//!   output-connectivity condition checks.
//! * [`protocol`] — a deterministic-schedule protocol engine: exact transcript
//!   distributions, rate quadruples, perfect- and epsilon-security verdicts,
//!   distribution switching, and the transcript information inequality.
//! * [`builtin`] — reference protocols: remote oblivious transfer, group
//!   addition, controlled erasure with a prefix code, arithmetic sum, and AND.
//! * [`bounds`] — numeric evaluation of communication and randomness lower
//!   bounds (fixed-distribution, distribution-switched, and asymptotic
//!   families), driven by a deterministic multi-start simplex search.
//! * [`cmss`] — correlated multi-secret sharing: verification, the
//!   protocol-to-sharing reduction, share-size bounds, and secure-sampling
//!   bounds.
//!
//! Probability is exact end to end: atoms are `BigRational` weights and all
//! security verdicts are decided by exact comparisons. Floating point enters
//! only for entropic quantities (entropies, mutual informations, bounds).

pub mod bounds;
pub mod builtin;
pub mod cmss;
pub mod golden;
pub mod info;
pub mod prob;
pub mod protocol;

pub use prob::{Alphabet, Channel, JointDist, Problem, Rat, Var};

//! Quantum measurement calculi on causal structures.
//!
//! * [`hilbert`]: dense finite-dimensional states, operators, spectral
//!   decompositions, tensor products and nonlinear maps.
//! * [`measurement`]: joint and conditional probabilities of successive
//!   projective measurements, Lüders conditioning, contextuality probes and
//!   the composition law for compatible instruments.
//! * [`spacetime`]: 1+1 Minkowski causal classification of events, causal
//!   diamonds and qubit-chain lattice regions; boosts; Poincaré commutators.
//! * [`signaling`]: state-dependent Hamiltonian evolution, EPR ensemble
//!   signaling, frame-dependent onset, and gauge-equivalence checks.
//! * [`modified_born`]: region-operator assignments `O ↦ B_O`, the modified
//!   sequence probability and verifiers for the three consistency constraints.

pub mod hilbert;
pub mod measurement;
pub mod modified_born;
pub mod sampling;
pub mod signaling;
pub mod spacetime;

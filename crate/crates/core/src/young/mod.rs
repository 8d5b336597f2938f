//! Young pairings `𝓢(u, dI)`, abstract Young integrals `∫σ(u) dX`, and the
//! identities they satisfy (Bochner identification, energy identity, chain
//! rule, weighted bound).

mod abstract_young;
mod identities;
mod pairing;

pub use abstract_young::{abstract_young, AveragedGerm, MultiplierProduct, NemytskiiAudit, NemytskiiMap};
pub use identities::{
    chain_rule_residual, energy_identity_residual, weighted_pairing_bound, ChainRuleMap, ChainRuleReport,
    WeightedBoundReport,
};
pub use pairing::{
    bochner_identify, finite_difference_derivative, pair_sew, young_pairing, young_stability_audit, BochnerReport,
    PairingGerm, PairingResult, StabilityAudit, YoungPairInput,
};

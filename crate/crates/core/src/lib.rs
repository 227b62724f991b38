//! Contactless purchasing as an executable artifact: a labeled Petri net
//! workflow engine with exhaustive verification, SIR epidemic analytics,
//! and a discrete-event store simulation that ties workflow compliance to
//! the epidemic contact ratio.
//!
//! The crate is organized around four subsystems:
//!
//! - [`petri`]: generic labeled nets, firing semantics, reachability
//!   analysis, and workflow-net verification, plus a line-oriented text
//!   format for net descriptions.
//! - [`store`]: the concrete contactless-purchasing net with its 18-message
//!   catalog, policy-driven customer runs, and exhaustive trace enumeration.
//! - [`sir`]: SIR dynamics (fixed-step RK4) and the derived analytics —
//!   contact ratio, epidemic threshold, first integral, peak prevalence,
//!   final size.
//! - [`contact`]: a deterministic store-day simulation that counts close
//!   contacts under baseline and resilience regimes and maps the reduction
//!   onto an effective contact ratio.
//!
//! Everything is deterministic given explicit seeds; no operation reads
//! clocks, environment, or global state.

pub mod contact;
pub mod petri;
pub mod roles;
pub mod sir;
pub mod store;

#[cfg(test)]
mod tests {
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_values_are_sendable_across_threads() {
        assert_send_sync::<crate::petri::LabeledNet>();
        assert_send_sync::<crate::petri::NetState>();
        assert_send_sync::<crate::store::CustomerPolicy>();
        assert_send_sync::<crate::sir::Trajectory>();
        assert_send_sync::<crate::contact::StoreDay>();
    }
}

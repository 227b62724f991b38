//! The concrete contactless-purchasing workflow net.
//!
//! The net walks one customer token from the source place `i` to one of
//! three terminal goals: `O1` (denied after a failed temperature check),
//! `O2` (denied for refusing a mask), `O3` (purchase completed). Five
//! procedures are wired in order — entering, purchasing, payment, delivery,
//! customer service — with the store-capacity check looping back while the
//! store is full, and delivery/service as optional branches that rejoin the
//! main line.
//!
//! Every message exchanged anywhere in the net comes from the fixed
//! 18-entry catalog, and every catalog entry is used. Where a message must
//! be received (`In`), the sender's `Out` fires first on every path, so the
//! pool gating never deadlocks. The wiring is documented place by place in
//! `docs/store-net.md`.

mod policy;
mod run;

pub use policy::{parse_policy, BranchPoint, CustomerPolicy, PolicyError};
pub use run::{
    enumerate_traces, resolve_choice, run_customer, trace_to_csv, Firing, Trace, TraceSkeleton,
};

use crate::petri::{LabeledNet, Message, NetDescription, Transition};
pub use crate::roles::RolePlayer;
use serde::{Deserialize, Serialize};
use std::fmt;

use RolePlayer::{B, C, CS, DA, PA, PM, SC};

/// The three terminal goals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Goal {
    /// `O1`: access denied after a failed temperature check.
    TemperatureDenied,
    /// `O2`: access denied after refusing to wear a mask.
    MaskDenied,
    /// `O3`: purchase completed.
    Completed,
}

impl Goal {
    pub const ALL: [Goal; 3] = [Goal::TemperatureDenied, Goal::MaskDenied, Goal::Completed];

    pub fn place_name(self) -> &'static str {
        match self {
            Goal::TemperatureDenied => "O1",
            Goal::MaskDenied => "O2",
            Goal::Completed => "O3",
        }
    }

    pub fn from_place_name(name: &str) -> Option<Goal> {
        Goal::ALL.into_iter().find(|g| g.place_name() == name)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.place_name())
    }
}

/// The closed message catalog: exactly the 18 triples the workflow
/// exchanges, as (msg, sender, receiver).
pub fn message_catalog() -> Vec<Message> {
    vec![
        Message::new("Access", C, B),
        Message::new("Cap", B, C),
        Message::new("Temp", SC, C),
        Message::new("Mask", SC, C),
        Message::new("N_Cap", B, C),
        Message::new("Y_Cap", B, C),
        Message::new("N_Tem", SC, C),
        Message::new("Y_Tem", SC, C),
        Message::new("N_Mas", SC, C),
        Message::new("Y_Mas", SC, C),
        Message::new("Pur", C, PM),
        Message::new("Pur", PM, C),
        Message::new("Pay", C, PA),
        Message::new("Pay", PA, C),
        Message::new("N_Deli", C, DA),
        Message::new("Y_Deli", C, DA),
        Message::new("N_Ser", C, CS),
        Message::new("Y_Ser", C, CS),
    ]
}

/// Transition ids of the store net, named for use by the trace runner.
pub mod transitions {
    pub const RECEIVE_ACCESS: usize = 1;
    pub const SEND_CAP_CHECK: usize = 2;
    pub const NOTIFY_FULL: usize = 3;
    pub const WAIT: usize = 4;
    pub const ADMIT: usize = 5;
    pub const SEND_TEMP_CHECK: usize = 6;
    pub const TEMP_FAIL: usize = 7;
    pub const TEMP_PASS: usize = 8;
    pub const SEND_MASK_CHECK: usize = 9;
    pub const MASK_REFUSE: usize = 10;
    pub const MASK_PASS: usize = 11;
    pub const VOLUNTARY_HYGIENE: usize = 12;
    pub const PUR_REQUEST: usize = 13;
    pub const PUR_ACCEPT: usize = 14;
    pub const PUR_GUIDE: usize = 15;
    pub const PUR_FOLLOW: usize = 16;
    pub const PAY_SUBMIT: usize = 17;
    pub const PAY_ACCEPT: usize = 18;
    pub const PAY_RECEIPT: usize = 19;
    pub const PAY_CONFIRM: usize = 20;
    pub const DELIVERY_REQUEST: usize = 21;
    pub const DELIVERY_PROCESS: usize = 22;
    pub const DELIVERY_DECLINE: usize = 23;
    pub const SERVICE_REQUEST: usize = 24;
    pub const SERVICE_PROVIDE: usize = 25;
    pub const SERVICE_DECLINE: usize = 26;
}

/// Builds the store workflow net: source `i`, interior places `P1`..`P20`,
/// sinks `O1`/`O2`/`O3`, 26 transitions, and the initial pool seeded with
/// the customer's access request.
pub fn build_store_net() -> LabeledNet {
    use transitions::*;

    let mut places: Vec<String> = vec!["i".into()];
    places.extend((1..=20).map(|k| format!("P{k}")));
    places.extend(["O1".into(), "O2".into(), "O3".into()]);

    let transitions = vec![
        // Entering procedure: access request, capacity loop, temperature
        // and mask checks.
        Transition::receive(
            RECEIVE_ACCESS,
            Message::new("Access", C, B),
            "receive_access_request",
        ),
        Transition::send(
            SEND_CAP_CHECK,
            Message::new("Cap", B, C),
            "send_capacity_check",
        ),
        Transition::send(
            NOTIFY_FULL,
            Message::new("Y_Cap", B, C),
            "notify_store_full",
        ),
        Transition::inner(WAIT, "wait_for_capacity"),
        Transition::send(ADMIT, Message::new("N_Cap", B, C), "admit_customer"),
        Transition::send(
            SEND_TEMP_CHECK,
            Message::new("Temp", SC, C),
            "send_temperature_check",
        ),
        Transition::send(
            TEMP_FAIL,
            Message::new("N_Tem", SC, C),
            "report_temperature_fail",
        ),
        Transition::send(
            TEMP_PASS,
            Message::new("Y_Tem", SC, C),
            "report_temperature_pass",
        ),
        Transition::send(
            SEND_MASK_CHECK,
            Message::new("Mask", SC, C),
            "send_mask_check",
        ),
        Transition::send(
            MASK_REFUSE,
            Message::new("N_Mas", SC, C),
            "report_mask_refusal",
        ),
        Transition::send(MASK_PASS, Message::new("Y_Mas", SC, C), "report_mask_pass"),
        Transition::inner(VOLUNTARY_HYGIENE, "voluntary_hygiene"),
        // Purchasing procedure: request/response, each sent then received.
        Transition::send(
            PUR_REQUEST,
            Message::new("Pur", C, PM),
            "request_purchasing_assist",
        ),
        Transition::receive(
            PUR_ACCEPT,
            Message::new("Pur", C, PM),
            "monitor_accepts_purchase",
        ),
        Transition::send(PUR_GUIDE, Message::new("Pur", PM, C), "send_crowd_guidance"),
        Transition::receive(
            PUR_FOLLOW,
            Message::new("Pur", PM, C),
            "customer_follows_guidance",
        ),
        // Payment procedure.
        Transition::send(PAY_SUBMIT, Message::new("Pay", C, PA), "submit_payment"),
        Transition::receive(
            PAY_ACCEPT,
            Message::new("Pay", C, PA),
            "assistant_accepts_payment",
        ),
        Transition::send(
            PAY_RECEIPT,
            Message::new("Pay", PA, C),
            "send_payment_receipt",
        ),
        Transition::receive(
            PAY_CONFIRM,
            Message::new("Pay", PA, C),
            "customer_takes_receipt",
        ),
        // Delivery procedure: optional branch.
        Transition::send(
            DELIVERY_REQUEST,
            Message::new("Y_Deli", C, DA),
            "request_delivery",
        ),
        Transition::receive(
            DELIVERY_PROCESS,
            Message::new("Y_Deli", C, DA),
            "process_delivery",
        ),
        Transition::send(
            DELIVERY_DECLINE,
            Message::new("N_Deli", C, DA),
            "decline_delivery",
        ),
        // Customer service procedure: optional branch.
        Transition::send(
            SERVICE_REQUEST,
            Message::new("Y_Ser", C, CS),
            "request_service",
        ),
        Transition::receive(
            SERVICE_PROVIDE,
            Message::new("Y_Ser", C, CS),
            "provide_service",
        ),
        Transition::send(
            SERVICE_DECLINE,
            Message::new("N_Ser", C, CS),
            "decline_service",
        ),
    ];

    let arc = |from: &str, to: &str| (from.to_string(), to.to_string());
    let arcs = vec![
        arc("i", "t1"),
        arc("t1", "P1"),
        arc("P1", "t2"),
        arc("t2", "P2"),
        // Store full: notify, wait, re-run the capacity check.
        arc("P2", "t3"),
        arc("t3", "P3"),
        arc("P3", "t4"),
        arc("t4", "P1"),
        // Store not full: admitted to the sensor checks.
        arc("P2", "t5"),
        arc("t5", "P4"),
        arc("P4", "t6"),
        arc("t6", "P5"),
        arc("P5", "t7"),
        arc("t7", "O1"),
        arc("P5", "t8"),
        arc("t8", "P6"),
        arc("P6", "t9"),
        arc("t9", "P7"),
        arc("P7", "t10"),
        arc("t10", "O2"),
        arc("P7", "t11"),
        arc("t11", "P8"),
        arc("P8", "t12"),
        arc("t12", "P9"),
        // Purchasing.
        arc("P9", "t13"),
        arc("t13", "P10"),
        arc("P10", "t14"),
        arc("t14", "P11"),
        arc("P11", "t15"),
        arc("t15", "P12"),
        arc("P12", "t16"),
        arc("t16", "P13"),
        // Payment.
        arc("P13", "t17"),
        arc("t17", "P14"),
        arc("P14", "t18"),
        arc("t18", "P15"),
        arc("P15", "t19"),
        arc("t19", "P16"),
        arc("P16", "t20"),
        arc("t20", "P17"),
        // Delivery: yes goes through the assistant, no skips ahead.
        arc("P17", "t21"),
        arc("t21", "P18"),
        arc("P18", "t22"),
        arc("t22", "P19"),
        arc("P17", "t23"),
        arc("t23", "P19"),
        // Customer service, then the completed goal.
        arc("P19", "t24"),
        arc("t24", "P20"),
        arc("P20", "t25"),
        arc("t25", "O3"),
        arc("P19", "t26"),
        arc("t26", "O3"),
    ];

    LabeledNet::build(NetDescription {
        places,
        transitions,
        arcs,
        initial_marking: vec!["i".into()],
        initial_messages: vec![Message::new("Access", C, B)],
    })
    .expect("the built-in store net is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn catalog_has_18_distinct_entries() {
        let catalog = message_catalog();
        assert_eq!(catalog.len(), 18);
        let set: BTreeSet<_> = catalog.iter().collect();
        assert_eq!(set.len(), 18, "all triples distinct");
    }

    #[test]
    fn catalog_contains_the_expected_triples() {
        let catalog = message_catalog();
        assert!(catalog.contains(&Message::new("N_Tem", SC, C)));
        assert!(catalog.contains(&Message::new("Y_Deli", C, DA)));
        assert!(catalog.contains(&Message::new("Access", C, B)));
    }

    #[test]
    fn business_appears_only_in_entering_messages() {
        for m in message_catalog() {
            if m.sender == B || m.receiver == B {
                assert!(
                    ["Access", "Cap", "N_Cap", "Y_Cap"].contains(&m.msg.as_str()),
                    "unexpected B message {m}"
                );
            }
        }
    }

    #[test]
    fn store_net_uses_exactly_the_catalog() {
        let net = build_store_net();
        let used = net.message_alphabet();
        let catalog: BTreeSet<_> = message_catalog().into_iter().collect();
        assert_eq!(used, catalog);
    }

    #[test]
    fn store_net_shape() {
        let net = build_store_net();
        assert_eq!(net.places().len(), 24, "i, P1..P20, O1..O3");
        assert_eq!(net.transitions().len(), 26);
        assert_eq!(net.place_index("i"), Some(0));
        let sinks: Vec<&str> = net
            .sink_places()
            .iter()
            .map(|&p| net.place_name(p))
            .collect();
        assert_eq!(sinks, vec!["O1", "O2", "O3"]);
    }

    #[test]
    fn only_the_access_receive_is_enabled_at_the_source() {
        let net = build_store_net();
        assert_eq!(
            net.enabled(&net.initial_state()),
            vec![transitions::RECEIVE_ACCESS]
        );
    }
}

//! The closed set of role players that exchange messages in the
//! contactless-purchasing workflow.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A participant in the workflow. Messages are always exchanged between two
/// distinct role players.
///
/// `C` is the customer, `B` the business itself, and the remaining four are
/// the assistant systems the business operates: sensor checking, purchasing
/// monitoring, payment assistance, delivery assistance, and customer service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RolePlayer {
    /// Customer
    C,
    /// Business / store
    B,
    /// Sensor Checking System
    SC,
    /// Purchasing Monitoring System
    PM,
    /// Payment Assistant System
    PA,
    /// Delivery Assistant System
    DA,
    /// Customer Service System
    CS,
}

impl RolePlayer {
    pub const ALL: [RolePlayer; 7] = [
        RolePlayer::C,
        RolePlayer::B,
        RolePlayer::SC,
        RolePlayer::PM,
        RolePlayer::PA,
        RolePlayer::DA,
        RolePlayer::CS,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RolePlayer::C => "C",
            RolePlayer::B => "B",
            RolePlayer::SC => "SC",
            RolePlayer::PM => "PM",
            RolePlayer::PA => "PA",
            RolePlayer::DA => "DA",
            RolePlayer::CS => "CS",
        }
    }
}

impl fmt::Display for RolePlayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RolePlayer {
    type Err = UnknownRolePlayer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RolePlayer::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| UnknownRolePlayer(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown role player `{0}` (expected one of C, B, SC, PM, PA, DA, CS)")]
pub struct UnknownRolePlayer(pub String);

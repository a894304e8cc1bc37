use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Task identifier as written in task-graph files (1-based by convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Device capability. `Capability::BASIC` (0) is plain computation and is
/// featured by every device; anything above is a specialized feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Capability(pub u32);

impl Capability {
    pub const BASIC: Capability = Capability(0);

    pub fn is_specialized(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Edge,
    Hub,
    Cloud,
}

impl Tier {
    pub fn prefix(self) -> char {
        match self {
            Tier::Edge => 'e',
            Tier::Hub => 'h',
            Tier::Cloud => 'c',
        }
    }
}

/// Device identifier `(tier, index)`, written as `e1`, `h1`, `c1`.
///
/// Devices order by tier (edge, hub, cloud) and then by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceId {
    pub tier: Tier,
    pub index: u32,
}

impl DeviceId {
    pub const fn new(tier: Tier, index: u32) -> Self {
        DeviceId { tier, index }
    }

    pub const fn edge(index: u32) -> Self {
        DeviceId::new(Tier::Edge, index)
    }

    pub const fn hub(index: u32) -> Self {
        DeviceId::new(Tier::Hub, index)
    }

    pub const fn cloud(index: u32) -> Self {
        DeviceId::new(Tier::Cloud, index)
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.tier.prefix(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDeviceIdError(String);

impl fmt::Display for ParseDeviceIdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid device id '{}', expected e.g. e1, h1, c1", self.0)
    }
}

impl std::error::Error for ParseDeviceIdError {}

impl FromStr for DeviceId {
    type Err = ParseDeviceIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDeviceIdError(s.to_string());
        let mut chars = s.chars();
        let tier = match chars.next() {
            Some('e') => Tier::Edge,
            Some('h') => Tier::Hub,
            Some('c') => Tier::Cloud,
            _ => return Err(err()),
        };
        let rest = chars.as_str();
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let index = rest.parse().map_err(|_| err())?;
        Ok(DeviceId { tier, index })
    }
}

impl Serialize for DeviceId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DeviceId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

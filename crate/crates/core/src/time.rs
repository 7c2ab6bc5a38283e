use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A UTC instant with second precision, printed as `YYYY-MM-DDTHH:MM:SSZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub const FORMAT: &'static str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn now() -> Self {
        Timestamp(Utc::now().trunc_subsecs(0))
    }

    pub fn epoch() -> Self {
        Timestamp(DateTime::UNIX_EPOCH)
    }

    pub fn from_unix(seconds: i64) -> Option<Self> {
        DateTime::from_timestamp(seconds, 0).map(Timestamp)
    }

    pub fn unix(&self) -> i64 {
        self.0.timestamp()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(Self::FORMAT))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timestamp '{0}' (expected ISO-8601, e.g. 2024-05-01T12:00:00Z)")]
pub struct BadTimestamp(pub String);

impl FromStr for Timestamp {
    type Err = BadTimestamp;

    /// Accepts RFC 3339 with any offset, or a bare `YYYY-MM-DDTHH:MM:SS` read as UTC.
    /// Fractional seconds are truncated.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            return Ok(Timestamp(dt.with_timezone(&Utc).trunc_subsecs(0)));
        }
        NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
            .map(|naive| Timestamp(naive.and_utc()))
            .map_err(|_| BadTimestamp(s.to_string()))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalises() {
        let t: Timestamp = "2024-05-01T14:00:00+02:00".parse().unwrap();
        assert_eq!(t.to_string(), "2024-05-01T12:00:00Z");
        let frac: Timestamp = "2024-05-01T12:00:00.999Z".parse().unwrap();
        assert_eq!(frac, t);
        let bare: Timestamp = "2024-05-01T12:00:00".parse().unwrap();
        assert_eq!(bare, t);
        assert!("yesterday".parse::<Timestamp>().is_err());
    }

    #[test]
    fn ordering_follows_time() {
        let a: Timestamp = "2024-01-01T00:00:00Z".parse().unwrap();
        let b: Timestamp = "2024-01-01T00:00:01Z".parse().unwrap();
        assert!(a < b);
        assert_eq!(Timestamp::from_unix(a.unix()), Some(a));
    }
}

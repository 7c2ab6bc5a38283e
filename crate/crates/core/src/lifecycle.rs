//! Lifecycle roles, stages and fact sources shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::template::is_ident;

/// A role in the model lifecycle that produces facts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    BusinessOwner,
    #[default]
    DataScientist,
    ModelValidator,
    AiOperations,
    /// Any organisation-specific role, written `other:NAME`.
    Other(String),
}

impl Role {
    /// The stage whose gate a question owned by this role first blocks.
    pub fn stage(&self) -> Stage {
        match self {
            Role::BusinessOwner => Stage::Conception,
            Role::DataScientist => Stage::Development,
            Role::ModelValidator => Stage::Validation,
            Role::AiOperations => Stage::Deployment,
            Role::Other(_) => Stage::Development,
        }
    }

    /// Roles allowed to answer (or supersede answers to) any question.
    pub fn is_override(&self) -> bool {
        matches!(self, Role::ModelValidator | Role::BusinessOwner)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::BusinessOwner => f.write_str("business_owner"),
            Role::DataScientist => f.write_str("data_scientist"),
            Role::ModelValidator => f.write_str("model_validator"),
            Role::AiOperations => f.write_str("ai_operations"),
            Role::Other(name) => write!(f, "other:{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown role '{0}'")]
pub struct UnknownRole(pub String);

impl FromStr for Role {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "business_owner" => Ok(Role::BusinessOwner),
            "data_scientist" => Ok(Role::DataScientist),
            "model_validator" => Ok(Role::ModelValidator),
            "ai_operations" => Ok(Role::AiOperations),
            other => match other.strip_prefix("other:") {
                Some(name) if is_ident(name) => Ok(Role::Other(name.to_string())),
                _ => Err(UnknownRole(s.to_string())),
            },
        }
    }
}

impl Serialize for Role {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ordered lifecycle stages: conception < development < validation < deployment < monitoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Conception,
    Development,
    Validation,
    Deployment,
    Monitoring,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Conception,
        Stage::Development,
        Stage::Validation,
        Stage::Deployment,
        Stage::Monitoring,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Conception => "conception",
            Stage::Development => "development",
            Stage::Validation => "validation",
            Stage::Deployment => "deployment",
            Stage::Monitoring => "monitoring",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown lifecycle stage '{0}'")]
pub struct UnknownStage(pub String);

impl FromStr for Stage {
    type Err = UnknownStage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|stage| stage.as_str() == s)
            .ok_or_else(|| UnknownStage(s.to_string()))
    }
}

/// Whether a fact is entered by a person or generated by tooling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    #[default]
    Human,
    Auto,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Human => "human",
            Source::Auto => "auto",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Source::Human),
            "auto" => Ok(Source::Auto),
            _ => Err(format!("unknown source '{s}' (expected human or auto)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roles_round_trip_through_strings() {
        for role in [
            Role::BusinessOwner,
            Role::DataScientist,
            Role::ModelValidator,
            Role::AiOperations,
            Role::Other("labeler".into()),
        ] {
            assert_eq!(role.to_string().parse::<Role>().unwrap(), role);
        }
        assert!("other:".parse::<Role>().is_err());
        assert!("other:Bad".parse::<Role>().is_err());
        assert!("validator".parse::<Role>().is_err());
    }

    #[test]
    fn stage_order_is_the_lifecycle_chain() {
        let mut sorted = Stage::ALL;
        sorted.sort();
        assert_eq!(sorted, Stage::ALL);
        assert!(Stage::Conception < Stage::Monitoring);
    }

    #[test]
    fn role_stage_mapping() {
        assert_eq!(Role::BusinessOwner.stage(), Stage::Conception);
        assert_eq!(Role::DataScientist.stage(), Stage::Development);
        assert_eq!(Role::ModelValidator.stage(), Stage::Validation);
        assert_eq!(Role::AiOperations.stage(), Stage::Deployment);
        assert_eq!(Role::Other("x".into()).stage(), Stage::Development);
    }
}

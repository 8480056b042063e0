//! Wire frames. Every frame is one JSON object on one line, tagged by `kind`.
//!
//! Client requests: `hello`, `reset`, `act`.
//! Server replies: `hello`, `obs` (after reset), `reward` (after a step),
//! `done` (after the last step) and `error`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::kernel::AgentId;
use crate::policy::AgentType;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client: Option<String>,
    },
    /// Start a new episode. `config` is a full TOML config replacing the
    /// server's; `seed` defaults to the config's seed.
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<String>,
    },
    /// One grid index per action dimension for every learning agent.
    /// Indices are signed so that negative values get a range error rather
    /// than a parse error.
    Act {
        #[serde(deserialize_with = "agent_keys")]
        actions: BTreeMap<AgentId, Vec<i64>>,
    },
}

/// JSON object keys are strings; tagged enums buffer their content, which
/// loses serde_json's numeric-key coercion, so parse ids explicitly.
fn agent_keys<'de, D: serde::Deserializer<'de>>(de: D) -> Result<BTreeMap<AgentId, Vec<i64>>, D::Error> {
    let raw = BTreeMap::<String, Vec<i64>>::deserialize(de)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.parse::<AgentId>().map(|id| (id, v)).map_err(|_| serde::de::Error::custom(format!("agent id `{k}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Response {
    Hello { protocol: u32, observation_version: u32, server: String },
    Obs(Frame),
    Reward(Frame),
    Done(Frame),
    Error(ErrorFrame),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub episode: u64,
    /// Period the observations belong to.
    pub t: u32,
    pub done: bool,
    pub agents: Vec<AgentFrame>,
    /// Sent with `obs` only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub action_space: Vec<AgentSpace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentFrame {
    pub id: AgentId,
    #[serde(rename = "type")]
    pub agent_type: AgentType,
    pub features: Vec<f64>,
    /// Normalized reward of the step just taken; absent in `obs` frames and
    /// for agents that did not act in the step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_reward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpace {
    pub id: AgentId,
    #[serde(rename = "type")]
    pub agent_type: AgentType,
    pub features: Vec<String>,
    pub dimensions: Vec<DimensionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    MalformedFrame,
    BadConfig,
    NoEpisode,
    EpisodeDone,
    MissingAction,
    UnknownAgent,
    IndexOutOfRange,
    WrongArity,
    SimulationFailed,
    Shutdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorFrame {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<String>,
}

impl ErrorFrame {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), agent: None, dimension: None }
    }
}

impl Response {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Response::Error(ErrorFrame::new(code, message))
    }

    /// Serialized form without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

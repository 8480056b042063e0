//! The message-passing kernel: state, bus, phase sequence and episode logs.

pub mod engine;
pub mod log;
pub mod message;
pub mod state;

use thiserror::Error;

use crate::config::ConfigError;
use crate::model::InventoryFault;
use crate::policy::PolicyError;

pub use engine::{check_action, run_episode, Overrides, Simulation, Stage};
pub use log::{EpisodeLog, LogError, QuarterRecord, RunManifest};
pub use message::{AgentId, MessageKind, MessageStats};
pub use state::{init_state, AgentIds, AgentRef, EconomyState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("period {t}: {agent_type} {agent} policy failed: {source}")]
    Policy { t: u32, agent: AgentId, agent_type: &'static str, source: PolicyError },
    #[error("period {t}: invalid action for agent {agent}: {reason}")]
    InvalidAction { t: u32, agent: AgentId, reason: String },
    #[error("period {t}: firm {firm}: {source}")]
    Inventory { t: u32, firm: usize, source: InventoryFault },
    #[error("{0} is bound to a remote policy; remote agents are driven through the env server")]
    RemoteBinding(&'static str),
    #[error("call out of order: {0}")]
    Sequence(&'static str),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Total messages delivered over an episode.
pub fn count_messages(log: &EpisodeLog) -> MessageStats {
    log.message_stats()
}

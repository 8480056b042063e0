//! Inter-agent messages and the deterministic bus.
//!
//! Messages sent during a phase are delivered in one batch, sorted by
//! `(sender, recipient, kind)`; the relative order of equal keys is the send
//! order. Every delivered message is counted by kind.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub type AgentId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageKind {
    PriceQuery,
    PriceReply,
    WageNotify,
    HireRequest,
    HireAccept,
    FireNotify,
    ConsumptionOrder,
    GoodsDelivery,
    TaxAssessment,
    CreditTransfer,
    RateBroadcast,
    LaborReport,
    /// Firm price and output, sent to the central bank.
    MarketReport,
}

impl MessageKind {
    pub const ALL: [MessageKind; 13] = [
        MessageKind::PriceQuery,
        MessageKind::PriceReply,
        MessageKind::WageNotify,
        MessageKind::HireRequest,
        MessageKind::HireAccept,
        MessageKind::FireNotify,
        MessageKind::ConsumptionOrder,
        MessageKind::GoodsDelivery,
        MessageKind::TaxAssessment,
        MessageKind::CreditTransfer,
        MessageKind::RateBroadcast,
        MessageKind::LaborReport,
        MessageKind::MarketReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::PriceQuery => "price-query",
            MessageKind::PriceReply => "price-reply",
            MessageKind::WageNotify => "wage-notify",
            MessageKind::HireRequest => "hire-request",
            MessageKind::HireAccept => "hire-accept",
            MessageKind::FireNotify => "fire-notify",
            MessageKind::ConsumptionOrder => "consumption-order",
            MessageKind::GoodsDelivery => "goods-delivery",
            MessageKind::TaxAssessment => "tax-assessment",
            MessageKind::CreditTransfer => "credit-transfer",
            MessageKind::RateBroadcast => "rate-broadcast",
            MessageKind::LaborReport => "labor-report",
            MessageKind::MarketReport => "market-report",
        }
    }

    /// Reply kind for query kinds.
    pub fn reply(self) -> Option<MessageKind> {
        match self {
            MessageKind::PriceQuery => Some(MessageKind::PriceReply),
            MessageKind::HireRequest => Some(MessageKind::HireAccept),
            MessageKind::ConsumptionOrder => Some(MessageKind::GoodsDelivery),
            _ => None,
        }
    }
}

/// Which rate a broadcast announces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Announced {
    Interest,
    HouseholdTax,
    FirmTax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    PriceQuery,
    PriceReply { price: f64 },
    WageNotify { wage: f64 },
    HireRequest,
    HireAccept,
    FireNotify,
    ConsumptionOrder { quantity: f64 },
    GoodsDelivery { quantity: f64, price: f64 },
    /// `savings` is the household's balance at the start of the period.
    TaxAssessment { amount: f64, savings: Option<f64> },
    CreditTransfer { amount: f64 },
    RateBroadcast { rate: f64, what: Announced },
    LaborReport { hours: f64 },
    MarketReport { price: f64, output: f64 },
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::PriceQuery => MessageKind::PriceQuery,
            Payload::PriceReply { .. } => MessageKind::PriceReply,
            Payload::WageNotify { .. } => MessageKind::WageNotify,
            Payload::HireRequest => MessageKind::HireRequest,
            Payload::HireAccept => MessageKind::HireAccept,
            Payload::FireNotify => MessageKind::FireNotify,
            Payload::ConsumptionOrder { .. } => MessageKind::ConsumptionOrder,
            Payload::GoodsDelivery { .. } => MessageKind::GoodsDelivery,
            Payload::TaxAssessment { .. } => MessageKind::TaxAssessment,
            Payload::CreditTransfer { .. } => MessageKind::CreditTransfer,
            Payload::RateBroadcast { .. } => MessageKind::RateBroadcast,
            Payload::LaborReport { .. } => MessageKind::LaborReport,
            Payload::MarketReport { .. } => MessageKind::MarketReport,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub sender: AgentId,
    pub recipient: AgentId,
    pub payload: Payload,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.payload.kind()
    }
}

/// Per-kind message counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageStats {
    pub counts: BTreeMap<MessageKind, u64>,
    pub total: u64,
}

impl MessageStats {
    pub fn record(&mut self, kind: MessageKind, n: u64) {
        *self.counts.entry(kind).or_insert(0) += n;
        self.total += n;
    }

    pub fn get(&self, kind: MessageKind) -> u64 {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &MessageStats) {
        for (kind, n) in &other.counts {
            self.record(*kind, *n);
        }
    }
}

/// Collects messages during a phase and delivers them in canonical order.
#[derive(Debug, Default)]
pub struct Bus {
    outbox: Vec<Message>,
    stats: MessageStats,
    delivered: u64,
}

impl Bus {
    pub fn send(&mut self, sender: AgentId, recipient: AgentId, payload: Payload) {
        debug_assert_ne!(sender, recipient);
        self.outbox.push(Message { sender, recipient, payload });
    }

    /// Deliver everything sent since the last dispatch.
    pub fn dispatch(&mut self) -> Vec<Message> {
        let mut batch = std::mem::take(&mut self.outbox);
        batch.sort_by_key(|m| (m.sender, m.recipient, m.kind()));
        for m in &batch {
            self.stats.record(m.kind(), 1);
        }
        self.delivered += batch.len() as u64;
        batch
    }

    /// Messages delivered since the bus was created.
    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    /// Counts accumulated since the last call.
    pub fn take_stats(&mut self) -> MessageStats {
        std::mem::take(&mut self.stats)
    }
}

//! Environment server for external learners.
//!
//! Agents whose type is bound to the `remote` policy are driven by the client:
//! after `reset` the server returns their observations at the household
//! decision point of period 0, and every `act` supplies grid indices for all
//! of them, advances one period and returns their normalized rewards with the
//! next observations. The wire format is documented in `docs/protocol.md`.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{ErrorCode, ErrorFrame, Frame, Request, Response, PROTOCOL_VERSION};
pub use server::{run_session, serve, Endpoint, SessionEnd};
pub use session::Session;

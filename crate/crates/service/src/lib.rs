//! Local session service for the tuner.
//!
//! One WebSocket connection is one tuning session. The client picks a string
//! and asks for a test; the service records from its capture source, runs
//! the tuning chain off the message loop and streams the events back. Frames
//! are described in [`protocol`]. `GET /health` reports version and whether
//! a capture device is present.
//!
//! A [`FixtureSource`](tuner_core::audio::FixtureSource) in place of the live
//! device makes the whole exchange reproducible without audio hardware.

pub mod protocol;
mod server;
pub mod session;

pub use protocol::{
    ClientMessage, ErrorCode, ResultMessage, ServerMessage, SpectrumPreview, MAX_PREVIEW_POINTS,
    PROTOCOL_VERSION,
};
pub use server::{
    bind, router, serve, shutdown_signal, AppState, HealthStatus, ServiceConfig,
    DEFAULT_CAPTURE_SECONDS,
};
pub use session::{Phase, SessionError, SessionState, TestOutcome};

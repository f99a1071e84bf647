//! Per-connection session state.
//!
//! The only phase cycle is `idle -> recording -> analyzing -> idle`. Every
//! method either performs a legal transition or leaves the state untouched
//! and reports why.

use serde::Serialize;
use thiserror::Error;
use tuner_core::GuitarString;

use crate::protocol::ResultMessage;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Idle,
    Recording,
    Analyzing,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown string {0:?}")]
    UnknownString(String),
    #[error("cannot {action} while {phase:?}")]
    WrongPhase { action: &'static str, phase: Phase },
    #[error("select a string before testing")]
    NoStringSelected,
}

/// Outcome of a finished test, as far as the state machine cares.
#[derive(Debug, Clone, PartialEq)]
pub enum TestOutcome {
    Result(Box<ResultMessage>),
    NoSignal,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionState {
    selected_string: Option<GuitarString>,
    phase: Phase,
    last_result: Option<ResultMessage>,
}

impl SessionState {
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn selected_string(&self) -> Option<GuitarString> {
        self.selected_string
    }

    pub fn last_result(&self) -> Option<&ResultMessage> {
        self.last_result.as_ref()
    }

    pub fn select_string(&mut self, id: &str) -> Result<GuitarString, SessionError> {
        if self.phase != Phase::Idle {
            return Err(SessionError::WrongPhase {
                action: "select a string",
                phase: self.phase,
            });
        }
        let string = id
            .parse::<GuitarString>()
            .map_err(|_| SessionError::UnknownString(id.to_string()))?;
        self.selected_string = Some(string);
        Ok(string)
    }

    /// Checks whether a test could start now, without starting it.
    pub fn ready_to_test(&self) -> Result<GuitarString, SessionError> {
        if self.phase != Phase::Idle {
            return Err(SessionError::WrongPhase {
                action: "start a test",
                phase: self.phase,
            });
        }
        self.selected_string.ok_or(SessionError::NoStringSelected)
    }

    /// `idle -> recording`.
    pub fn begin_recording(&mut self) -> Result<GuitarString, SessionError> {
        let string = self.ready_to_test()?;
        self.phase = Phase::Recording;
        Ok(string)
    }

    /// `recording -> analyzing`.
    pub fn recording_stopped(&mut self) -> Result<(), SessionError> {
        if self.phase != Phase::Recording {
            return Err(SessionError::WrongPhase {
                action: "stop recording",
                phase: self.phase,
            });
        }
        self.phase = Phase::Analyzing;
        Ok(())
    }

    /// `analyzing -> idle`.
    pub fn finish(&mut self, outcome: TestOutcome) -> Result<(), SessionError> {
        if self.phase != Phase::Analyzing {
            return Err(SessionError::WrongPhase {
                action: "finish a test",
                phase: self.phase,
            });
        }
        if let TestOutcome::Result(result) = outcome {
            self.last_result = Some(*result);
        }
        self.phase = Phase::Idle;
        Ok(())
    }
}

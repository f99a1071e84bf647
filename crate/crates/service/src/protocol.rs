//! Wire format of the session socket.
//!
//! Every frame is a JSON object carrying `"v"` (protocol version) and
//! `"type"`. Clients send `select_string` and `start_test`; the server answers
//! with `ack`, `recording_started`, `recording_stopped`, `result`,
//! `no_signal`, `error` or `busy`.

use serde::{Deserialize, Serialize};
use tuner_core::{Analysis64, Direction, Spectrum64};

pub const PROTOCOL_VERSION: u32 = 1;

/// Upper bound on points in a spectrum preview.
pub const MAX_PREVIEW_POINTS: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    SelectString { string: String },
    StartTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClientEnvelope {
    #[serde(default = "current_version")]
    v: u32,
    #[serde(flatten)]
    message: ClientMessage,
}

fn current_version() -> u32 {
    PROTOCOL_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPreview {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMessage {
    pub string: String,
    pub detected: f64,
    pub target: f64,
    pub cents: f64,
    pub degrees: f64,
    pub direction: Direction,
    pub clamped: bool,
    pub raw_spectrum: SpectrumPreview,
    pub harmonic_sum_spectrum: SpectrumPreview,
}

impl ResultMessage {
    /// Copies the numbers verbatim; only the spectra are reduced for display.
    pub fn from_analysis(analysis: &Analysis64) -> Self {
        let advice = &analysis.advice;
        Self {
            string: advice.string.name().to_string(),
            detected: advice.detected,
            target: advice.target,
            cents: advice.cents,
            degrees: advice.degrees,
            direction: advice.direction,
            clamped: advice.clamped,
            raw_spectrum: preview(&analysis.estimate.raw_spectrum, MAX_PREVIEW_POINTS),
            harmonic_sum_spectrum: preview(
                &analysis.estimate.harmonic_sum_spectrum,
                MAX_PREVIEW_POINTS,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Ack { string: String, target: f64 },
    RecordingStarted { string: String, duration: f64 },
    RecordingStopped { string: String },
    Result(ResultMessage),
    NoSignal { string: String },
    Error { code: ErrorCode, message: String },
    Busy { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Malformed frame or unknown message type.
    BadRequest,
    UnsupportedVersion,
    /// Unknown string identifier.
    Validation,
    /// Message not legal in the current session phase.
    State,
    NoStringSelected,
    DeviceUnavailable,
    Capture,
    Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ServerEnvelope {
    v: u32,
    #[serde(flatten)]
    message: ServerMessage,
}

impl ServerMessage {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        ServerMessage::Error {
            code,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ServerEnvelope {
            v: PROTOCOL_VERSION,
            message: self.clone(),
        })
        .expect("server messages serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str::<ServerEnvelope>(text).map(|e| e.message)
    }
}

impl ClientMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ClientEnvelope {
            v: PROTOCOL_VERSION,
            message: self.clone(),
        })
        .expect("client messages serialize")
    }

    /// Parses a client frame, rejecting other protocol versions.
    #[allow(clippy::result_large_err)]
    pub fn from_json(text: &str) -> Result<Self, ServerMessage> {
        let envelope: ClientEnvelope = serde_json::from_str(text)
            .map_err(|e| ServerMessage::error(ErrorCode::BadRequest, e.to_string()))?;
        if envelope.v != PROTOCOL_VERSION {
            return Err(ServerMessage::error(
                ErrorCode::UnsupportedVersion,
                format!(
                    "protocol version {} not supported (server speaks {PROTOCOL_VERSION})",
                    envelope.v
                ),
            ));
        }
        Ok(envelope.message)
    }
}

/// Reduces a spectrum to at most `max_points` by max-pooling equal groups of
/// bins. Each point sits at the frequency of its group's largest bin and
/// magnitudes are scaled so the overall peak is 1.
pub fn preview(spectrum: &Spectrum64, max_points: usize) -> SpectrumPreview {
    let mags = spectrum.magnitudes();
    if mags.is_empty() || max_points == 0 {
        return SpectrumPreview {
            frequencies: Vec::new(),
            magnitudes: Vec::new(),
        };
    }
    let group = mags.len().div_ceil(max_points);
    let peak = spectrum.max_magnitude();
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };

    let (frequencies, magnitudes) = mags
        .chunks(group)
        .enumerate()
        .map(|(g, chunk)| {
            let (offset, max) =
                chunk
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &m)| {
                        if m > best.1 {
                            (i, m)
                        } else {
                            best
                        }
                    });
            (spectrum.frequency_of(g * group + offset), max * scale)
        })
        .unzip();
    SpectrumPreview {
        frequencies,
        magnitudes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tuner_core::SpectrumKind;

    #[test]
    fn client_frames() {
        assert_eq!(
            ClientMessage::from_json(r#"{"v":1,"type":"select_string","string":"B3"}"#).unwrap(),
            ClientMessage::SelectString {
                string: "B3".into()
            }
        );
        assert_eq!(
            ClientMessage::from_json(r#"{"type":"start_test"}"#).unwrap(),
            ClientMessage::StartTest
        );
        let json = ClientMessage::StartTest.to_json();
        assert!(json.contains(r#""v":1"#) && json.contains(r#""type":"start_test""#));
    }

    #[test]
    fn bad_client_frames() {
        for bad in [
            "",
            "{}",
            r#"{"type":"dance"}"#,
            r#"{"type":"select_string"}"#,
        ] {
            match ClientMessage::from_json(bad) {
                Err(ServerMessage::Error { code, .. }) => assert_eq!(code, ErrorCode::BadRequest),
                other => panic!("{bad}: {other:?}"),
            }
        }
        match ClientMessage::from_json(r#"{"v":2,"type":"start_test"}"#) {
            Err(ServerMessage::Error { code, .. }) => {
                assert_eq!(code, ErrorCode::UnsupportedVersion)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn server_frames_carry_version_and_type() {
        let json = ServerMessage::Ack {
            string: "B3".into(),
            target: 246.9,
        }
        .to_json();
        assert_eq!(json, r#"{"v":1,"type":"ack","string":"B3","target":246.9}"#);
        let json = ServerMessage::error(ErrorCode::NoStringSelected, "pick one").to_json();
        assert_eq!(
            json,
            r#"{"v":1,"type":"error","code":"no_string_selected","message":"pick one"}"#
        );
        assert_eq!(
            ServerMessage::from_json(&json).unwrap(),
            ServerMessage::error(ErrorCode::NoStringSelected, "pick one")
        );
    }

    #[test]
    fn preview_keeps_peak_location() {
        let mut mags = vec![0.0; 32001];
        mags[1975] = 8.0;
        mags[3000] = 2.0;
        let s = Spectrum64::new(mags, 0.125, SpectrumKind::HarmonicSum).unwrap();
        let p = preview(&s, MAX_PREVIEW_POINTS);
        assert!(p.frequencies.len() <= MAX_PREVIEW_POINTS);
        let top = p.magnitudes.iter().position(|&m| m == 1.0).unwrap();
        assert_eq!(p.frequencies[top], 1975.0 * 0.125);
        assert!(p.magnitudes.contains(&0.25));
    }

    #[test]
    fn preview_of_short_and_silent_spectra() {
        let s = Spectrum64::new(vec![0.0, 0.0, 0.0], 1.0, SpectrumKind::Raw).unwrap();
        let p = preview(&s, MAX_PREVIEW_POINTS);
        assert_eq!(p.frequencies, vec![0.0, 1.0, 2.0]);
        assert_eq!(p.magnitudes, vec![0.0, 0.0, 0.0]);
        let empty = Spectrum64::new(vec![], 1.0, SpectrumKind::Raw).unwrap();
        assert!(preview(&empty, 10).frequencies.is_empty());
    }

    proptest! {
        #[test]
        fn preview_is_monotone_and_normalized(
            mags in proptest::collection::vec(0.0f64..10.0, 1..20000),
            max_points in 1usize..3000,
        ) {
            let s = Spectrum64::new(mags, 0.5, SpectrumKind::Raw).unwrap();
            let p = preview(&s, max_points);
            prop_assert!(p.frequencies.len() <= max_points);
            prop_assert_eq!(p.frequencies.len(), p.magnitudes.len());
            prop_assert!(p.frequencies.windows(2).all(|w| w[0] < w[1]));
            if s.max_magnitude() > 0.0 {
                let top = p.magnitudes.iter().cloned().fold(0.0, f64::max);
                prop_assert!((top - 1.0).abs() < 1e-12);
            }
        }
    }
}

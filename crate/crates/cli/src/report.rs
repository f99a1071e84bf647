use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tuner_core::{Direction, Spectrum64, TuningAdvice64};

/// One analysis result as printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliReport {
    pub string: String,
    pub detected: f64,
    pub target: f64,
    pub cents: f64,
    pub degrees: f64,
    pub direction: Direction,
    pub clamped: bool,
}

impl From<&TuningAdvice64> for CliReport {
    fn from(advice: &TuningAdvice64) -> Self {
        Self {
            string: advice.string.name().to_string(),
            detected: advice.detected,
            target: advice.target,
            cents: advice.cents,
            degrees: advice.degrees,
            direction: advice.direction,
            clamped: advice.clamped,
        }
    }
}

impl CliReport {
    /// Single-line JSON record.
    pub fn to_structured(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "string    {} (target {:.1} Hz)",
            self.string, self.target
        );
        let _ = writeln!(out, "detected  {:.3} Hz", self.detected);
        let _ = writeln!(out, "offset    {:+.1} cents", self.cents);
        let advice = match self.direction {
            Direction::InTune => "in tune, no turn needed".to_string(),
            Direction::Tighten => format!("tighten: turn {:.1} deg clockwise", self.degrees),
            Direction::Loosen => {
                format!("loosen: turn {:.1} deg anticlockwise", self.degrees.abs())
            }
        };
        let _ = write!(out, "advice    {advice}");
        if self.clamped {
            out.push_str(" (limited; re-test after turning)");
        }
        out.push('\n');
        out
    }
}

/// Writes `frequency magnitude` rows, one per bin.
pub fn write_spectrum(path: &Path, spectrum: &Spectrum64) -> io::Result<()> {
    let mut out = String::with_capacity(spectrum.len() * 24);
    out.push_str("# frequency_hz magnitude\n");
    for (k, m) in spectrum.magnitudes().iter().enumerate() {
        let _ = writeln!(out, "{} {}", spectrum.frequency_of(k), m);
    }
    fs::write(path, out)
}

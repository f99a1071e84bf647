use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

use crate::dsp::{AnalysisConfig, SampleBuffer};
use crate::error::{Result, TunerError};
use crate::scalar::Scalar;

use super::decimate::decimate;
use super::wav::{decode_wav, SUPPORTED_RATES};

pub const MIN_CAPTURE_SECONDS: f64 = 0.5;
pub const MAX_CAPTURE_SECONDS: f64 = 4.0;

/// Rate requested from a device that cannot deliver the analysis rate directly.
const FALLBACK_RATE: u32 = 48000;

/// Raw 16-bit mono PCM as delivered by a source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recording {
    pub sample_rate: u32,
    pub pcm: Vec<i16>,
}

/// Something that can record mono audio.
pub trait CaptureSource: Send + Sync {
    fn is_available(&self) -> bool;

    fn describe(&self) -> String;

    /// Records `num_samples` samples, preferably at `sample_rate`.
    ///
    /// A source may answer with a different rate from [`SUPPORTED_RATES`], or
    /// fail with [`TunerError::UnsupportedRate`] to ask for another rate.
    fn record(&self, num_samples: usize, sample_rate: u32) -> Result<Recording>;
}

/// Process-wide exclusivity for capture devices: at most one capture in flight.
#[derive(Debug, Clone, Default)]
pub struct CaptureGate(Arc<AtomicBool>);

/// Held while a capture runs; releases the gate on drop.
#[derive(Debug)]
pub struct CaptureReservation {
    gate: CaptureGate,
}

impl CaptureGate {
    pub fn new() -> Self {
        Self::default()
    }

    /// The gate shared by everything in this process that talks to a real device.
    pub fn global() -> &'static CaptureGate {
        static GLOBAL: OnceLock<CaptureGate> = OnceLock::new();
        GLOBAL.get_or_init(CaptureGate::new)
    }

    pub fn try_reserve(&self) -> Result<CaptureReservation> {
        self.0
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .map_err(|_| TunerError::Busy)?;
        Ok(CaptureReservation { gate: self.clone() })
    }

    pub fn is_busy(&self) -> bool {
        self.0.load(Ordering::Acquire)
    }
}

impl Drop for CaptureReservation {
    fn drop(&mut self) {
        self.gate.0.store(false, Ordering::Release);
    }
}

impl CaptureReservation {
    /// Records `duration` seconds and returns exactly
    /// `duration * analysis.sample_rate` samples at the analysis rate.
    pub fn capture<T: Scalar>(
        &self,
        source: &dyn CaptureSource,
        duration: f64,
        analysis: &AnalysisConfig,
    ) -> Result<SampleBuffer<T>> {
        if !(MIN_CAPTURE_SECONDS..=MAX_CAPTURE_SECONDS).contains(&duration) {
            return Err(TunerError::invalid(format!(
                "capture duration {duration} s outside [{MIN_CAPTURE_SECONDS}, {MAX_CAPTURE_SECONDS}] s"
            )));
        }
        if !source.is_available() {
            return Err(TunerError::DeviceUnavailable(source.describe()));
        }
        let target_rate = analysis.sample_rate;
        let wanted = (duration * f64::from(target_rate)).round() as usize;

        let recording = match source.record(wanted, target_rate) {
            Err(TunerError::UnsupportedRate { .. }) if target_rate != FALLBACK_RATE => {
                log::info!(
                    "{} cannot record at {target_rate} Hz, trying {FALLBACK_RATE} Hz",
                    source.describe()
                );
                let scaled = wanted * (FALLBACK_RATE / target_rate.max(1)) as usize;
                source.record(scaled, FALLBACK_RATE)?
            }
            other => other?,
        };

        let buffer = to_rate::<T>(&recording, target_rate)?;
        if buffer.len() < wanted {
            return Err(TunerError::Capture(format!(
                "source delivered {} of {wanted} samples",
                buffer.len()
            )));
        }
        let mut samples = buffer.into_samples();
        samples.truncate(wanted);
        SampleBuffer::new(samples, target_rate)
    }
}

fn to_rate<T: Scalar>(recording: &Recording, target_rate: u32) -> Result<SampleBuffer<T>> {
    let rate = recording.sample_rate;
    if !SUPPORTED_RATES.contains(&rate) || target_rate == 0 || rate % target_rate != 0 {
        return Err(TunerError::UnsupportedRate { rate });
    }
    let samples = recording
        .pcm
        .iter()
        .map(|&s| T::lit(f64::from(s) / 32768.0))
        .collect();
    let buffer = SampleBuffer::new(samples, rate)?;
    match (rate / target_rate) as usize {
        1 => Ok(buffer),
        factor => decimate(&buffer, factor),
    }
}

/// Captures through the process-wide gate. Fails with [`TunerError::Busy`]
/// while another capture is in flight.
pub fn capture<T: Scalar>(
    source: &dyn CaptureSource,
    duration: f64,
    analysis: &AnalysisConfig,
) -> Result<SampleBuffer<T>> {
    CaptureGate::global()
        .try_reserve()?
        .capture(source, duration, analysis)
}

/// Replays a WAV file in place of a microphone.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    path: PathBuf,
}

impl FixtureSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl CaptureSource for FixtureSource {
    fn is_available(&self) -> bool {
        self.path.is_file()
    }

    fn describe(&self) -> String {
        format!("fixture {}", self.path.display())
    }

    fn record(&self, num_samples: usize, _sample_rate: u32) -> Result<Recording> {
        let bytes = std::fs::read(&self.path)?;
        let (descriptor, mut pcm) = decode_wav(&bytes)?;
        let per_target = (descriptor.sample_rate / super::wav::CANONICAL_RATE).max(1) as usize;
        pcm.truncate(num_samples * per_target);
        Ok(Recording {
            sample_rate: descriptor.sample_rate,
            pcm,
        })
    }
}

/// A source with no device behind it.
#[derive(Debug, Clone, Default)]
pub struct UnavailableSource;

impl CaptureSource for UnavailableSource {
    fn is_available(&self) -> bool {
        false
    }

    fn describe(&self) -> String {
        "no capture device configured".into()
    }

    fn record(&self, _num_samples: usize, _sample_rate: u32) -> Result<Recording> {
        Err(TunerError::DeviceUnavailable(self.describe()))
    }
}

/// Records from the host's default input through an external recorder that
/// writes a WAV stream to stdout (ALSA `arecord` by default).
#[derive(Debug, Clone)]
pub struct CommandSource {
    program: PathBuf,
    device: String,
}

impl Default for CommandSource {
    fn default() -> Self {
        Self {
            program: PathBuf::from("arecord"),
            device: "default".into(),
        }
    }
}

impl CommandSource {
    pub fn new(program: impl Into<PathBuf>, device: impl Into<String>) -> Self {
        Self {
            program: program.into(),
            device: device.into(),
        }
    }

    fn resolve(&self) -> Option<PathBuf> {
        if self.program.components().count() > 1 {
            return self.program.is_file().then(|| self.program.clone());
        }
        std::env::var_os("PATH").and_then(|paths| {
            std::env::split_paths(&paths)
                .map(|dir| dir.join(&self.program))
                .find(|candidate| candidate.is_file())
        })
    }
}

impl CaptureSource for CommandSource {
    fn is_available(&self) -> bool {
        self.resolve().is_some()
    }

    fn describe(&self) -> String {
        format!("{} (device {})", self.program.display(), self.device)
    }

    fn record(&self, num_samples: usize, sample_rate: u32) -> Result<Recording> {
        let program = self
            .resolve()
            .ok_or_else(|| TunerError::DeviceUnavailable(self.describe()))?;
        let output = Command::new(program)
            .args([
                "-q",
                "-D",
                &self.device,
                "-t",
                "wav",
                "-f",
                "S16_LE",
                "-c",
                "1",
            ])
            .args([
                "-r",
                &sample_rate.to_string(),
                "-s",
                &num_samples.to_string(),
            ])
            .stdin(Stdio::null())
            .stderr(Stdio::piped())
            .output()?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            return Err(TunerError::Capture(format!(
                "recorder exited with {}: {}",
                output.status,
                stderr.trim()
            )));
        }
        let (descriptor, pcm) = decode_wav(&output.stdout)?;
        Ok(Recording {
            sample_rate: descriptor.sample_rate,
            pcm,
        })
    }
}

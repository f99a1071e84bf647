use serde::{Deserialize, Serialize};

use crate::dsp::SampleBuffer;
use crate::error::{Result, TunerError};
use crate::scalar::Scalar;

/// A synthetic plucked string: exponentially decaying harmonic partials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluckSpec {
    pub fundamental: f64,
    /// Entry `k` is the amplitude of partial `k + 1`.
    pub harmonic_amplitudes: Vec<f64>,
    /// Envelope time constant in seconds; `f64::INFINITY` for no decay.
    pub decay_time_constant: f64,
    pub duration: f64,
    pub sample_rate: u32,
}

impl PluckSpec {
    pub fn new(fundamental: f64, harmonic_amplitudes: Vec<f64>) -> Self {
        Self {
            fundamental,
            harmonic_amplitudes,
            decay_time_constant: 0.8,
            duration: 2.0,
            sample_rate: 8000,
        }
    }

    pub fn decay(mut self, seconds: f64) -> Self {
        self.decay_time_constant = seconds;
        self
    }

    pub fn duration(mut self, seconds: f64) -> Self {
        self.duration = seconds;
        self
    }

    pub fn sample_rate(mut self, rate: u32) -> Self {
        self.sample_rate = rate;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.fundamental > 0.0) {
            return Err(TunerError::invalid("fundamental must be positive"));
        }
        if self.sample_rate == 0 || !(self.duration > 0.0) {
            return Err(TunerError::invalid(
                "sample rate and duration must be positive",
            ));
        }
        if !(self.decay_time_constant > 0.0) {
            return Err(TunerError::invalid("decay time constant must be positive"));
        }
        if self.harmonic_amplitudes.iter().any(|a| !(*a >= 0.0)) {
            return Err(TunerError::invalid(
                "harmonic amplitudes must be non-negative",
            ));
        }
        if !self.harmonic_amplitudes.iter().any(|&a| a > 0.0) {
            return Err(TunerError::invalid("at least one partial must be nonzero"));
        }
        let highest = self.fundamental * self.harmonic_amplitudes.len() as f64;
        if highest >= f64::from(self.sample_rate) / 2.0 {
            return Err(TunerError::invalid(format!(
                "partial at {highest} Hz aliases at {} Hz",
                self.sample_rate
            )));
        }
        Ok(())
    }
}

/// Renders `spec`, normalized so the largest absolute sample is 1.
pub fn synth_pluck<T: Scalar>(spec: &PluckSpec) -> Result<SampleBuffer<T>> {
    spec.validate()?;
    let rate = f64::from(spec.sample_rate);
    let n = (spec.duration * rate).round() as usize;
    let two_pi = 2.0 * std::f64::consts::PI;
    // Phases are accumulated in f64 whatever the output precision.
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let envelope = (-t / spec.decay_time_constant).exp();
            envelope
                * spec
                    .harmonic_amplitudes
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| a * (two_pi * (k + 1) as f64 * spec.fundamental * t).sin())
                    .sum::<f64>()
        })
        .collect();
    let peak = raw.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if !(peak > 0.0) {
        return Err(TunerError::invalid("pluck renders to silence"));
    }
    SampleBuffer::new(
        raw.iter().map(|&s| T::lit(s / peak)).collect(),
        spec.sample_rate,
    )
}

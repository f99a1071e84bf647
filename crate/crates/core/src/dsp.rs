//! Time and frequency domain fundamentals: sample buffers, magnitude
//! spectra and the bin-resolution relation `resolution = rate / samples`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TunerError};
use crate::scalar::Scalar;

/// Mono time-domain audio.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Scalar> SampleBuffer<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(TunerError::invalid("sample rate must be positive"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| s * factor).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn rms(&self) -> T {
        if self.samples.is_empty() {
            return T::zero();
        }
        let power: T = self.samples.iter().map(|&s| s * s).sum();
        (power / T::from_count(self.samples.len())).sqrt()
    }

    pub fn peak(&self) -> T {
        self.samples
            .iter()
            .fold(T::zero(), |acc, &s| acc.max(s.abs()))
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(TunerError::invalid("sample buffer is empty"))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Raw,
    Normalized,
    HarmonicSum,
}

/// One-sided magnitude spectrum. Bin `k` sits at `k * bin_resolution` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    magnitudes: Vec<T>,
    bin_resolution: T,
    kind: SpectrumKind,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(magnitudes: Vec<T>, bin_resolution: T, kind: SpectrumKind) -> Result<Self> {
        if !(bin_resolution > T::zero()) || !bin_resolution.is_finite() {
            return Err(TunerError::invalid("bin resolution must be positive"));
        }
        if let Some(bad) = magnitudes.iter().find(|m| !(**m >= T::zero())) {
            return Err(TunerError::invalid(format!(
                "spectrum magnitudes must be non-negative, got {bad}"
            )));
        }
        Ok(Self {
            magnitudes,
            bin_resolution,
            kind,
        })
    }

    pub fn magnitudes(&self) -> &[T] {
        &self.magnitudes
    }

    pub fn bin_resolution(&self) -> T {
        self.bin_resolution
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn frequency_of(&self, bin: usize) -> T {
        T::from_count(bin) * self.bin_resolution
    }

    /// Index of the largest magnitude; ties resolve to the lowest bin.
    pub fn argmax(&self) -> Option<usize> {
        argmax_in(&self.magnitudes, 0..self.magnitudes.len())
    }

    pub fn max_magnitude(&self) -> T {
        self.magnitudes.iter().fold(T::zero(), |acc, &m| acc.max(m))
    }

    /// `(frequency, magnitude)` pairs in bin order.
    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.magnitudes
            .iter()
            .enumerate()
            .map(move |(k, &m)| (self.frequency_of(k), m))
    }

    pub(crate) fn with_magnitudes(&self, magnitudes: Vec<T>, kind: SpectrumKind) -> Self {
        Self {
            magnitudes,
            bin_resolution: self.bin_resolution,
            kind,
        }
    }
}

/// Lowest index of the maximum within `range`, or `None` when the range is empty.
pub(crate) fn argmax_in<T: Scalar>(values: &[T], range: std::ops::Range<usize>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for k in range {
        let v = values[k];
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((k, v)),
        }
    }
    best.map(|(k, _)| k)
}

/// Parameters of a single analysis frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub sample_rate: u32,
    /// Seconds of audio per analysis.
    pub capture_duration: f64,
    /// Inclusive `(low, high)` Hz range searched for the fundamental.
    pub search_band: (f64, f64),
    /// The frame is zero-padded to `zero_pad_factor * samples` before the
    /// transform. Bin resolution is reported for the padded length.
    pub zero_pad_factor: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            sample_rate: 8000,
            capture_duration: 2.0,
            search_band: (75.0, 500.0),
            zero_pad_factor: 4,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(TunerError::invalid("sample rate must be positive"));
        }
        let count = f64::from(self.sample_rate) * self.capture_duration;
        if !(count >= 2.0) || (count - count.round()).abs() > 1e-9 {
            return Err(TunerError::invalid(format!(
                "sample_rate x capture_duration must be an integer >= 2, got {count}"
            )));
        }
        let (low, high) = self.search_band;
        let nyquist = f64::from(self.sample_rate) / 2.0;
        if !(low >= 0.0 && low < high && high <= nyquist) {
            return Err(TunerError::invalid(format!(
                "search band ({low}, {high}) Hz must satisfy 0 <= low < high <= {nyquist}"
            )));
        }
        if self.zero_pad_factor == 0 {
            return Err(TunerError::invalid("zero_pad_factor must be at least 1"));
        }
        Ok(())
    }

    /// Number of samples in one capture.
    pub fn num_samples(&self) -> usize {
        (f64::from(self.sample_rate) * self.capture_duration).round() as usize
    }
}

/// Spacing between adjacent bins of an `num_samples`-point transform.
pub fn bin_resolution<T: Scalar>(sample_rate: u32, num_samples: usize) -> Result<T> {
    if sample_rate == 0 {
        return Err(TunerError::invalid("sample rate must be positive"));
    }
    if num_samples == 0 {
        return Err(TunerError::invalid("number of samples must be positive"));
    }
    Ok(T::from_count(sample_rate as usize) / T::from_count(num_samples))
}

/// One-sided magnitude spectrum of the buffer, `N / 2 + 1` bins.
///
/// No analysis window is applied.
pub fn magnitude_spectrum<T: Scalar>(buffer: &SampleBuffer<T>) -> Result<Spectrum<T>> {
    magnitude_spectrum_padded(buffer, buffer.len())
}

/// Magnitude spectrum of the buffer zero-padded to `fft_len` samples.
/// The returned bin resolution is `sample_rate / fft_len`.
pub fn magnitude_spectrum_padded<T: Scalar>(
    buffer: &SampleBuffer<T>,
    fft_len: usize,
) -> Result<Spectrum<T>> {
    buffer.ensure_non_empty()?;
    if fft_len < buffer.len() {
        return Err(TunerError::invalid(format!(
            "transform length {fft_len} shorter than buffer ({})",
            buffer.len()
        )));
    }
    let mut data: Vec<Complex<T>> = Vec::with_capacity(fft_len);
    data.extend(buffer.samples().iter().map(|&s| Complex::new(s, T::zero())));
    data.resize(fft_len, Complex::new(T::zero(), T::zero()));

    FftPlanner::new()
        .plan_fft_forward(fft_len)
        .process(&mut data);

    let magnitudes = data[..fft_len / 2 + 1].iter().map(|c| c.norm()).collect();
    Spectrum::new(
        magnitudes,
        bin_resolution(buffer.sample_rate(), fft_len)?,
        SpectrumKind::Raw,
    )
}

/// Scales magnitudes so the largest equals one. An all-zero spectrum is
/// returned unchanged.
pub fn normalize<T: Scalar>(spectrum: &Spectrum<T>) -> Spectrum<T> {
    let max = spectrum.max_magnitude();
    let magnitudes = if max > T::zero() {
        spectrum.magnitudes().iter().map(|&m| m / max).collect()
    } else {
        spectrum.magnitudes().to_vec()
    };
    spectrum.with_magnitudes(magnitudes, SpectrumKind::Normalized)
}

//! Harmonic-sum fundamental detection.
//!
//! The magnitude spectrum is compressed by integer factors (bin `k` of the
//! copy reads bin `k * factor` of the original) and the copies are added to
//! the original. Partial `h` of a tone lands on the fundamental's bin in the
//! copy compressed by `h`, so only the fundamental collects energy from every
//! copy. The decision is the largest bin of the sum within the search band.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::dsp::{
    argmax_in, magnitude_spectrum_padded, normalize, AnalysisConfig, SampleBuffer, Spectrum,
    SpectrumKind,
};
use crate::error::{Result, TunerError};
use crate::fir::{apply, design_bandpass, FilterSpec};
use crate::scalar::Scalar;

/// Shortest and longest frames accepted by [`detect_fundamental`], seconds.
pub const MIN_FRAME_SECONDS: f64 = 0.5;
pub const MAX_FRAME_SECONDS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmonicConfig {
    downsample_factors: Vec<usize>,
    use_filter: bool,
}

impl Default for HarmonicConfig {
    fn default() -> Self {
        Self {
            downsample_factors: vec![2, 3],
            use_filter: true,
        }
    }
}

impl HarmonicConfig {
    /// Factors must each be at least 2 and strictly increasing.
    pub fn new(downsample_factors: Vec<usize>, use_filter: bool) -> Result<Self> {
        if downsample_factors.iter().any(|&f| f < 2) {
            return Err(TunerError::invalid("downsample factors must be >= 2"));
        }
        if downsample_factors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TunerError::invalid(
                "downsample factors must be strictly increasing",
            ));
        }
        Ok(Self {
            downsample_factors,
            use_filter,
        })
    }

    pub fn downsample_factors(&self) -> &[usize] {
        &self.downsample_factors
    }

    pub fn use_filter(&self) -> bool {
        self.use_filter
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchEstimate<T> {
    pub fundamental: T,
    pub peak_bin: usize,
    pub bin_resolution: T,
    /// Spectrum of the input before filtering.
    pub raw_spectrum: Spectrum<T>,
    pub harmonic_sum_spectrum: Spectrum<T>,
}

/// Bin decimation: output bin `k` is input bin `k * factor`, zero beyond the
/// input; the output keeps the input length.
pub fn downsample_spectrum<T: Scalar>(
    spectrum: &Spectrum<T>,
    factor: usize,
) -> Result<Spectrum<T>> {
    if factor < 2 {
        return Err(TunerError::invalid(format!(
            "downsample factor must be >= 2, got {factor}"
        )));
    }
    let input = spectrum.magnitudes();
    let mut out: Vec<T> = input.iter().step_by(factor).copied().collect();
    out.resize(input.len(), T::zero());
    Ok(spectrum.with_magnitudes(out, spectrum.kind()))
}

/// The spectrum plus each of its decimated copies, bin by bin.
pub fn harmonic_sum<T: Scalar>(spectrum: &Spectrum<T>, config: &HarmonicConfig) -> Spectrum<T> {
    let input = spectrum.magnitudes();
    let mut sum = input.to_vec();
    for &factor in config.downsample_factors() {
        for (k, &m) in input.iter().step_by(factor).enumerate() {
            sum[k] = sum[k] + m;
        }
    }
    spectrum.with_magnitudes(sum, SpectrumKind::HarmonicSum)
}

/// Bins whose centre frequency lies inside `band`, clipped to `len` bins.
pub fn band_bins(
    bin_resolution: f64,
    band: (f64, f64),
    len: usize,
) -> Option<RangeInclusive<usize>> {
    let low = (band.0 / bin_resolution).ceil().max(0.0) as usize;
    let high = ((band.1 / bin_resolution).floor() as usize).min(len.checked_sub(1)?);
    (low <= high).then_some(low..=high)
}

pub fn detect_fundamental<T: Scalar>(
    buffer: &SampleBuffer<T>,
    analysis: &AnalysisConfig,
    harmonic: &HarmonicConfig,
) -> Result<PitchEstimate<T>> {
    analysis.validate()?;
    if buffer.sample_rate() != analysis.sample_rate {
        return Err(TunerError::invalid(format!(
            "buffer sampled at {} Hz, analysis configured for {} Hz",
            buffer.sample_rate(),
            analysis.sample_rate
        )));
    }
    let seconds = buffer.duration();
    if !(MIN_FRAME_SECONDS..=MAX_FRAME_SECONDS).contains(&seconds) {
        return Err(TunerError::invalid(format!(
            "frame of {seconds:.3} s outside [{MIN_FRAME_SECONDS}, {MAX_FRAME_SECONDS}] s"
        )));
    }

    let fft_len = buffer.len() * analysis.zero_pad_factor;
    let raw_spectrum = magnitude_spectrum_padded(buffer, fft_len)?;
    let analysed = if harmonic.use_filter() {
        let filter = design_bandpass::<T>(&FilterSpec::for_sample_rate(buffer.sample_rate()))?;
        magnitude_spectrum_padded(&apply(&filter, buffer)?, fft_len)?
    } else {
        raw_spectrum.clone()
    };

    let summed = harmonic_sum(&normalize(&analysed), harmonic);
    let resolution = f64::from(buffer.sample_rate()) / fft_len as f64;
    let bins = band_bins(resolution, analysis.search_band, summed.len())
        .ok_or_else(|| TunerError::invalid("search band contains no spectrum bins"))?;
    let magnitudes = summed.magnitudes();
    if magnitudes[bins.clone()].iter().all(|&m| m == T::zero()) {
        return Err(TunerError::NoSignal);
    }
    let peak_bin =
        argmax_in(magnitudes, *bins.start()..*bins.end() + 1).expect("band is non-empty");

    log::debug!(
        "fundamental at bin {peak_bin} of {} ({} Hz/bin)",
        summed.len(),
        resolution
    );
    Ok(PitchEstimate {
        fundamental: summed.frequency_of(peak_bin),
        peak_bin,
        bin_resolution: summed.bin_resolution(),
        raw_spectrum,
        harmonic_sum_spectrum: summed,
    })
}

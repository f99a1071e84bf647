//! Linear-phase FIR design by the window method (Hamming-windowed sinc)
//! and zero-extended, delay-compensated filtering.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::SampleBuffer;
use crate::error::{Result, TunerError};
use crate::scalar::Scalar;

/// Best stopband attenuation a Hamming-windowed design reliably reaches.
pub const HAMMING_STOPBAND_DB: f64 = 53.0;

/// Normalized transition width of the Hamming window is about 3.3 / L.
const HAMMING_TRANSITION_FACTOR: f64 = 3.3;

/// Direct convolution below this tap count, FFT convolution above.
const DIRECT_CONVOLUTION_MAX_TAPS: usize = 64;

/// Reported for responses indistinguishable from an exact null.
pub const RESPONSE_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Lower cutoff in Hz (-6 dB point).
    pub low_cutoff: f64,
    /// Upper cutoff in Hz (-6 dB point).
    pub high_cutoff: f64,
    pub transition_bandwidth: f64,
    pub min_stopband_attenuation: f64,
    pub sample_rate: u32,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            low_cutoff: 75.0,
            high_cutoff: 1320.0,
            transition_bandwidth: 25.0,
            min_stopband_attenuation: 50.0,
            sample_rate: 8000,
        }
    }
}

impl FilterSpec {
    /// The default guitar passband at a different sample rate.
    pub fn for_sample_rate(sample_rate: u32) -> Self {
        Self {
            sample_rate,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = f64::from(self.sample_rate) / 2.0;
        if self.sample_rate == 0 {
            return Err(TunerError::invalid("filter sample rate must be positive"));
        }
        if !(self.low_cutoff > 0.0
            && self.low_cutoff < self.high_cutoff
            && self.high_cutoff < nyquist)
        {
            return Err(TunerError::invalid(format!(
                "cutoffs must satisfy 0 < {} < {} < {nyquist}",
                self.low_cutoff, self.high_cutoff
            )));
        }
        if !(self.transition_bandwidth > 0.0) {
            return Err(TunerError::invalid("transition bandwidth must be positive"));
        }
        if self.min_stopband_attenuation > HAMMING_STOPBAND_DB {
            return Err(TunerError::invalid(format!(
                "a Hamming design cannot guarantee {} dB stopband attenuation (limit {HAMMING_STOPBAND_DB} dB)",
                self.min_stopband_attenuation
            )));
        }
        Ok(())
    }
}

/// Finite impulse response filter. Filters built by [`design_bandpass`] and
/// [`design_lowpass`] have odd length and symmetric coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter<T> {
    coefficients: Vec<T>,
    sample_rate: u32,
}

impl<T: Scalar> FirFilter<T> {
    pub fn from_coefficients(coefficients: Vec<T>, sample_rate: u32) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(TunerError::invalid("filter needs at least one coefficient"));
        }
        if sample_rate == 0 {
            return Err(TunerError::invalid("filter sample rate must be positive"));
        }
        Ok(Self {
            coefficients,
            sample_rate,
        })
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Delay in samples introduced by a symmetric filter.
    pub fn group_delay(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    /// Odd length and mirror-symmetric coefficients (Type I linear phase).
    pub fn is_linear_phase(&self, tolerance: T) -> bool {
        let c = &self.coefficients;
        c.len() % 2 == 1 && (0..c.len() / 2).all(|i| (c[i] - c[c.len() - 1 - i]).abs() <= tolerance)
    }
}

/// Smallest odd tap count whose Hamming transition fits in `transition_bandwidth`.
pub fn hamming_tap_count(sample_rate: u32, transition_bandwidth: f64) -> usize {
    let exact = HAMMING_TRANSITION_FACTOR * f64::from(sample_rate) / transition_bandwidth;
    // 3.3 is inexact in binary; an exactly integral product must not round up.
    let taps = (exact - 1e-9).ceil().max(1.0) as usize;
    if taps % 2 == 0 {
        taps + 1
    } else {
        taps
    }
}

pub fn hamming_window<T: Scalar>(len: usize) -> Vec<T> {
    if len == 1 {
        return vec![T::one()];
    }
    let denom = T::from_count(len - 1);
    (0..len)
        .map(|n| {
            let phase = T::lit(2.0) * T::PI() * T::from_count(n) / denom;
            T::lit(0.54) - T::lit(0.46) * phase.cos()
        })
        .collect()
}

/// Ideal lowpass impulse response with cutoff `cutoff_hz`, centred on tap `(len - 1) / 2`.
fn ideal_lowpass<T: Scalar>(len: usize, cutoff_hz: f64, sample_rate: u32) -> Vec<T> {
    let center = T::from_count(len - 1) / T::lit(2.0);
    let fc = T::lit(cutoff_hz / f64::from(sample_rate));
    let two = T::lit(2.0);
    (0..len)
        .map(|n| {
            let m = T::from_count(n) - center;
            if m == T::zero() {
                two * fc
            } else {
                (two * T::PI() * fc * m).sin() / (T::PI() * m)
            }
        })
        .collect()
}

/// Windowed-sinc bandpass realizing `spec`.
pub fn design_bandpass<T: Scalar>(spec: &FilterSpec) -> Result<FirFilter<T>> {
    spec.validate()?;
    let len = hamming_tap_count(spec.sample_rate, spec.transition_bandwidth);
    let upper = ideal_lowpass::<T>(len, spec.high_cutoff, spec.sample_rate);
    let lower = ideal_lowpass::<T>(len, spec.low_cutoff, spec.sample_rate);
    let coefficients = hamming_window::<T>(len)
        .into_iter()
        .zip(upper.into_iter().zip(lower))
        .map(|(w, (hi, lo))| w * (hi - lo))
        .collect();
    FirFilter::from_coefficients(coefficients, spec.sample_rate)
}

/// Windowed-sinc lowpass normalized to unit gain at DC.
pub fn design_lowpass<T: Scalar>(
    cutoff_hz: f64,
    transition_bandwidth: f64,
    sample_rate: u32,
) -> Result<FirFilter<T>> {
    let nyquist = f64::from(sample_rate) / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(TunerError::invalid(format!(
            "lowpass cutoff {cutoff_hz} Hz must lie in (0, {nyquist})"
        )));
    }
    if !(transition_bandwidth > 0.0) {
        return Err(TunerError::invalid("transition bandwidth must be positive"));
    }
    let len = hamming_tap_count(sample_rate, transition_bandwidth);
    let mut coefficients: Vec<T> = hamming_window::<T>(len)
        .into_iter()
        .zip(ideal_lowpass::<T>(len, cutoff_hz, sample_rate))
        .map(|(w, h)| w * h)
        .collect();
    let dc: T = coefficients.iter().copied().sum();
    for c in &mut coefficients {
        *c = *c / dc;
    }
    FirFilter::from_coefficients(coefficients, sample_rate)
}

/// Gain of `filter` at `frequency` Hz, in dB.
///
/// Responses below the evaluation's rounding floor report
/// [`RESPONSE_FLOOR_DB`].
pub fn frequency_response<T: Scalar>(filter: &FirFilter<T>, frequency: f64) -> Result<T> {
    let rate = f64::from(filter.sample_rate);
    if !(0.0..=rate / 2.0).contains(&frequency) {
        return Err(TunerError::invalid(format!(
            "frequency {frequency} Hz outside [0, {}]",
            rate / 2.0
        )));
    }
    let cycles_per_sample = T::lit(frequency / rate);
    let two_pi = T::lit(2.0) * T::PI();
    let (mut re, mut im) = (T::zero(), T::zero());
    let mut abs_sum = T::zero();
    for (n, &c) in filter.coefficients.iter().enumerate() {
        let cycles = cycles_per_sample * T::from_count(n);
        let (sin, cos) = (two_pi * (cycles - cycles.floor())).sin_cos();
        re = re + c * cos;
        im = im - c * sin;
        abs_sum = abs_sum + c.abs();
    }
    let magnitude = (re * re + im * im).sqrt();
    let noise_floor =
        abs_sum * T::epsilon() * T::from_count(filter.coefficients.len()).sqrt() * T::lit(4.0);
    if magnitude <= noise_floor {
        return Ok(T::lit(RESPONSE_FLOOR_DB));
    }
    Ok(T::lit(20.0) * magnitude.log10())
}

/// Filters `buffer`, returning a buffer of the same length aligned with the
/// input: the full convolution is trimmed by the group delay on the left.
pub fn apply<T: Scalar>(
    filter: &FirFilter<T>,
    buffer: &SampleBuffer<T>,
) -> Result<SampleBuffer<T>> {
    if filter.sample_rate != buffer.sample_rate() {
        return Err(TunerError::invalid(format!(
            "filter designed for {} Hz applied to {} Hz buffer",
            filter.sample_rate,
            buffer.sample_rate()
        )));
    }
    if buffer.len() < filter.len() {
        return Err(TunerError::invalid(format!(
            "buffer of {} samples is shorter than the {}-tap filter",
            buffer.len(),
            filter.len()
        )));
    }
    let full = convolve(buffer.samples(), &filter.coefficients);
    let start = filter.group_delay();
    SampleBuffer::new(
        full[start..start + buffer.len()].to_vec(),
        buffer.sample_rate(),
    )
}

/// Full linear convolution, `a.len() + b.len() - 1` outputs.
pub(crate) fn convolve<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= DIRECT_CONVOLUTION_MAX_TAPS {
        convolve_direct(a, b)
    } else {
        convolve_fft(a, b)
    }
}

fn convolve_direct<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &h) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * h;
        }
    }
    out
}

fn convolve_fft<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let out_len = a.len() + b.len() - 1;
    let fft_len = out_len.next_power_of_two();
    let zero = Complex::new(T::zero(), T::zero());
    let to_complex = |x: &[T]| {
        let mut v: Vec<Complex<T>> = x.iter().map(|&s| Complex::new(s, T::zero())).collect();
        v.resize(fft_len, zero);
        v
    };
    let mut fa = to_complex(a);
    let mut fb = to_complex(b);

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(fft_len);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * *y;
    }
    planner.plan_fft_inverse(fft_len).process(&mut fa);

    let scale = T::from_count(fft_len);
    fa[..out_len].iter().map(|c| c.re / scale).collect()
}

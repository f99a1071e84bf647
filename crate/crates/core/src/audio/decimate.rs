use crate::dsp::SampleBuffer;
use crate::error::{Result, TunerError};
use crate::fir::{convolve, design_lowpass};
use crate::scalar::Scalar;

/// Anti-alias cutoff as a fraction of the output Nyquist frequency.
const CUTOFF_FRACTION: f64 = 0.45;
/// Lowpass transition width as a fraction of the output Nyquist frequency.
const TRANSITION_FRACTION: f64 = 0.1;

/// Lowpass filters `buffer` and keeps every `factor`-th sample.
///
/// The input rate must be a multiple of `factor`. Edges are extended by
/// repeating the first and last samples so a constant signal stays constant.
pub fn decimate<T: Scalar>(buffer: &SampleBuffer<T>, factor: usize) -> Result<SampleBuffer<T>> {
    if factor < 2 {
        return Err(TunerError::invalid(format!(
            "decimation factor must be >= 2, got {factor}"
        )));
    }
    let rate = buffer.sample_rate();
    if rate as usize % factor != 0 {
        return Err(TunerError::invalid(format!(
            "{rate} Hz is not divisible by decimation factor {factor}"
        )));
    }
    buffer.ensure_non_empty()?;
    let out_rate = rate / factor as u32;
    let out_nyquist = f64::from(out_rate) / 2.0;
    let filter = design_lowpass::<T>(
        CUTOFF_FRACTION * out_nyquist,
        TRANSITION_FRACTION * out_nyquist,
        rate,
    )?;

    let pad = filter.group_delay();
    let samples = buffer.samples();
    let first = samples[0];
    let last = samples[samples.len() - 1];
    let mut extended = Vec::with_capacity(samples.len() + 2 * pad);
    extended.extend(std::iter::repeat(first).take(pad));
    extended.extend_from_slice(samples);
    extended.extend(std::iter::repeat(last).take(pad));

    // Full-convolution index `2 * pad + i` is aligned with input sample `i`.
    let full = convolve(&extended, filter.coefficients());
    let kept = full[2 * pad..2 * pad + samples.len()]
        .iter()
        .step_by(factor)
        .copied()
        .collect();
    SampleBuffer::new(kept, out_rate)
}

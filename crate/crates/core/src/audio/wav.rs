use crate::dsp::SampleBuffer;
use crate::error::{Result, TunerError};
use crate::scalar::Scalar;

use super::decimate::decimate;

/// Rate every ingress path delivers.
pub const CANONICAL_RATE: u32 = 8000;

/// Accepted input rates; each is an integer multiple of [`CANONICAL_RATE`].
pub const SUPPORTED_RATES: [u32; 3] = [8000, 16000, 48000];

const PCM_SCALE: f64 = 32768.0;
const FORMAT_PCM: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavDescriptor {
    pub sample_rate: u32,
    pub channels: u16,
    pub bits_per_sample: u16,
    pub num_frames: usize,
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Parses a mono 16-bit PCM RIFF/WAVE container without resampling.
///
/// Chunks other than `fmt ` and `data` are skipped. A `data` chunk that
/// claims more bytes than remain (as written by streaming recorders) is
/// truncated to what is present.
pub fn decode_wav(bytes: &[u8]) -> Result<(WavDescriptor, Vec<i16>)> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(TunerError::Parse("missing RIFF/WAVE header".into()));
    }
    let mut format: Option<(u16, u16, u32, u16)> = None;
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4) as usize;
        let body_start = at + 8;
        let body_end = body_start.saturating_add(size).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(TunerError::Parse("fmt chunk too short".into()));
                }
                format = Some((
                    u16_at(body, 0),
                    u16_at(body, 2),
                    u32_at(body, 4),
                    u16_at(body, 14),
                ));
            }
            b"data" => {
                data = Some(body);
                break;
            }
            _ => {}
        }
        // Chunks are padded to even length.
        at = body_start.saturating_add(size).saturating_add(size & 1);
    }

    let (tag, channels, sample_rate, bits) =
        format.ok_or_else(|| TunerError::Parse("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| TunerError::Parse("no data chunk".into()))?;

    if tag != FORMAT_PCM {
        return Err(TunerError::UnsupportedFormat(format!(
            "format tag {tag}, only integer PCM is supported"
        )));
    }
    if channels != 1 {
        return Err(TunerError::UnsupportedFormat(format!(
            "{channels} channels, only mono is supported"
        )));
    }
    if bits != 16 {
        return Err(TunerError::UnsupportedFormat(format!(
            "{bits}-bit samples, only 16-bit is supported"
        )));
    }
    if !SUPPORTED_RATES.contains(&sample_rate) {
        return Err(TunerError::UnsupportedRate { rate: sample_rate });
    }

    let pcm: Vec<i16> = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    let descriptor = WavDescriptor {
        sample_rate,
        channels,
        bits_per_sample: bits,
        num_frames: pcm.len(),
    };
    Ok((descriptor, pcm))
}

/// Scales 16-bit PCM to `[-1, 1)` and brings it to [`CANONICAL_RATE`].
pub fn pcm_to_buffer<T: Scalar>(pcm: &[i16], sample_rate: u32) -> Result<SampleBuffer<T>> {
    if !SUPPORTED_RATES.contains(&sample_rate) {
        return Err(TunerError::UnsupportedRate { rate: sample_rate });
    }
    let samples = pcm
        .iter()
        .map(|&s| T::lit(f64::from(s) / PCM_SCALE))
        .collect();
    let buffer = SampleBuffer::new(samples, sample_rate)?;
    match sample_rate / CANONICAL_RATE {
        1 => Ok(buffer),
        factor => decimate(&buffer, factor as usize),
    }
}

/// Decodes a WAV file into an 8000 Hz buffer.
pub fn read_wav<T: Scalar>(bytes: &[u8]) -> Result<SampleBuffer<T>> {
    let (descriptor, pcm) = decode_wav(bytes)?;
    pcm_to_buffer(&pcm, descriptor.sample_rate)
}

/// Encodes a buffer as mono 16-bit PCM. Samples are clipped to `[-1, 1]`.
pub fn write_wav<T: Scalar>(buffer: &SampleBuffer<T>) -> Vec<u8> {
    let data_len = buffer.len() * 2;
    let rate = buffer.sample_rate();
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in buffer.samples() {
        let q = (s.to_f64_lossy() * PCM_SCALE)
            .round()
            .clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

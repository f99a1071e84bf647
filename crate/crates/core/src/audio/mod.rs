//! Signal ingress. Every path converges on 8000 Hz mono buffers.

mod capture;
mod decimate;
mod synth;
mod wav;

pub use capture::{
    capture, CaptureGate, CaptureReservation, CaptureSource, CommandSource, FixtureSource,
    Recording, UnavailableSource, MAX_CAPTURE_SECONDS, MIN_CAPTURE_SECONDS,
};
pub use decimate::decimate;
pub use synth::{synth_pluck, PluckSpec};
pub use wav::{
    decode_wav, pcm_to_buffer, read_wav, write_wav, WavDescriptor, CANONICAL_RATE, SUPPORTED_RATES,
};

//! Guitar tuning by harmonic-sum pitch detection.
//!
//! The chain is: bandpass the captured frame (Hamming-windowed sinc,
//! 75-1320 Hz), take its magnitude spectrum, add copies of the spectrum
//! compressed by 2 and 3 so that harmonics pile onto the fundamental, pick
//! the strongest bin in the fundamental search band, then compare against
//! the equal-tempered target and translate the error into degrees of peg
//! rotation.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below name the common instantiations.
//!
//! ```
//! use tuner_core::{audio, GuitarString, Tuner64};
//!
//! let pluck = audio::PluckSpec::new(243.0, vec![1.0, 0.6, 0.3]);
//! let buffer = audio::synth_pluck::<f64>(&pluck).unwrap();
//! let result = Tuner64::default().analyze(&buffer, GuitarString::B3).unwrap();
//! assert!((result.estimate.fundamental - 243.0).abs() <= 0.5);
//! assert_eq!(result.advice.direction, tuner_core::Direction::Tighten);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advisor;
pub mod audio;
pub mod dsp;
pub mod error;
pub mod fir;
pub mod notes;
pub mod pipeline;
pub mod pitch;
mod scalar;

pub use advisor::{
    advise, degrees_for_shift, turn_rate, Direction, TuningAdvice, TurnCalibration,
    IN_TUNE_THRESHOLD_HZ, MAX_TURN_DEGREES,
};
pub use dsp::{
    bin_resolution, magnitude_spectrum, magnitude_spectrum_padded, normalize, AnalysisConfig,
    SampleBuffer, Spectrum, SpectrumKind,
};
pub use error::{Result, TunerError};
pub use fir::{apply, design_bandpass, frequency_response, FilterSpec, FirFilter};
pub use notes::{cents_offset, note_frequency, string_target, GuitarString};
pub use pipeline::{Analysis, Tuner};
pub use pitch::{
    detect_fundamental, downsample_spectrum, harmonic_sum, HarmonicConfig, PitchEstimate,
};
pub use scalar::Scalar;

pub type SampleBuffer64 = SampleBuffer<f64>;
pub type SampleBuffer32 = SampleBuffer<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type Spectrum32 = Spectrum<f32>;
pub type FirFilter64 = FirFilter<f64>;
pub type FirFilter32 = FirFilter<f32>;
pub type PitchEstimate64 = PitchEstimate<f64>;
pub type PitchEstimate32 = PitchEstimate<f32>;
pub type TuningAdvice64 = TuningAdvice<f64>;
pub type TuningAdvice32 = TuningAdvice<f32>;
pub type TurnCalibration64 = TurnCalibration<f64>;
pub type TurnCalibration32 = TurnCalibration<f32>;
pub type Analysis64 = Analysis<f64>;
pub type Analysis32 = Analysis<f32>;
pub type Tuner64 = Tuner<f64>;
pub type Tuner32 = Tuner<f32>;

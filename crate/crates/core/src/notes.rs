//! Equal-tempered pitch model anchored at A4 = 440 Hz, and the six open
//! strings of a standard-tuned guitar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TunerError};
use crate::scalar::Scalar;

pub const A4_HZ: f64 = 440.0;

/// Frequency `n` equal-tempered semitones above A4.
pub fn note_frequency<T: Scalar>(semitones_from_a4: i32) -> T {
    T::lit(A4_HZ) * T::lit(2.0).powf(T::lit(f64::from(semitones_from_a4)) / T::lit(12.0))
}

/// Distance from `reference` to `measured` in cents (1200 per octave).
pub fn cents_offset<T: Scalar>(measured: T, reference: T) -> Result<T> {
    if !(measured > T::zero()) || !(reference > T::zero()) {
        return Err(TunerError::invalid(format!(
            "frequencies must be positive (measured {measured}, reference {reference})"
        )));
    }
    Ok(T::lit(1200.0) * (measured / reference).log2())
}

/// Open strings in standard tuning, low to high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GuitarString {
    E2,
    A2,
    D3,
    G3,
    B3,
    E4,
}

impl GuitarString {
    pub const ALL: [GuitarString; 6] = [
        GuitarString::E2,
        GuitarString::A2,
        GuitarString::D3,
        GuitarString::G3,
        GuitarString::B3,
        GuitarString::E4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GuitarString::E2 => "E2",
            GuitarString::A2 => "A2",
            GuitarString::D3 => "D3",
            GuitarString::G3 => "G3",
            GuitarString::B3 => "B3",
            GuitarString::E4 => "E4",
        }
    }

    /// Conventional string number: 6 is the low E, 1 the high E.
    pub fn number(self) -> u8 {
        match self {
            GuitarString::E2 => 6,
            GuitarString::A2 => 5,
            GuitarString::D3 => 4,
            GuitarString::G3 => 3,
            GuitarString::B3 => 2,
            GuitarString::E4 => 1,
        }
    }

    pub fn from_number(number: u8) -> Result<Self> {
        GuitarString::ALL
            .into_iter()
            .find(|s| s.number() == number)
            .ok_or_else(|| TunerError::invalid(format!("no string number {number} (expected 1-6)")))
    }

    /// Semitones from A4 to this string's open note.
    pub fn semitones_from_a4(self) -> i32 {
        match self {
            GuitarString::E2 => -29,
            GuitarString::A2 => -24,
            GuitarString::D3 => -19,
            GuitarString::G3 => -14,
            GuitarString::B3 => -10,
            GuitarString::E4 => -5,
        }
    }

    /// Standard tuning target, rounded to 0.1 Hz as conventionally tabulated.
    pub fn target_hz(self) -> f64 {
        match self {
            GuitarString::E2 => 82.4,
            GuitarString::A2 => 110.0,
            GuitarString::D3 => 146.8,
            GuitarString::G3 => 196.0,
            GuitarString::B3 => 246.9,
            GuitarString::E4 => 329.6,
        }
    }
}

impl fmt::Display for GuitarString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts a note name (`"B3"`, case-insensitive) or a string number (`"2"`).
impl FromStr for GuitarString {
    type Err = TunerError;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if let Ok(number) = trimmed.parse::<u8>() {
            return GuitarString::from_number(number);
        }
        GuitarString::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| {
                TunerError::invalid(format!(
                    "unknown string {trimmed:?} (expected E2, A2, D3, G3, B3, E4 or 1-6)"
                ))
            })
    }
}

/// Tuning target for `string`, in the requested scalar type.
pub fn string_target<T: Scalar>(string: GuitarString) -> T {
    T::lit(string.target_hz())
}

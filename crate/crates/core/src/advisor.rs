//! Peg-turn advice from a detected and a target frequency.
//!
//! Each string responds to its tuning peg at a roughly constant rate in Hz
//! per degree of rotation. The advice is the frequency error divided by that
//! rate; clockwise (positive degrees) tightens the string and raises pitch.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TunerError};
use crate::notes::{cents_offset, GuitarString};
use crate::scalar::Scalar;

/// Errors smaller than this are inaudible and reported as in tune.
pub const IN_TUNE_THRESHOLD_HZ: f64 = 0.5;

/// Largest suggested rotation; beyond this the linear model is not trusted.
pub const MAX_TURN_DEGREES: f64 = 720.0;

/// Measured Hz per degree of peg rotation, strings 6 down to 1.
const DEFAULT_RATES: [f64; 6] = [0.022, 0.025, 0.028, 0.067, 0.075, 0.083];

/// Peg sensitivity per string, in Hz per degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnCalibration<T> {
    /// Indexed in `GuitarString::ALL` order (string 6 first).
    rates: [T; 6],
}

impl<T: Scalar> Default for TurnCalibration<T> {
    fn default() -> Self {
        Self {
            rates: DEFAULT_RATES.map(T::lit),
        }
    }
}

fn index_of(string: GuitarString) -> usize {
    GuitarString::ALL
        .iter()
        .position(|&s| s == string)
        .expect("every string is listed")
}

impl<T: Scalar> TurnCalibration<T> {
    /// Rates must be positive and non-decreasing from string 6 to string 1.
    pub fn new(rates: [T; 6]) -> Result<Self> {
        if let Some(bad) = rates.iter().find(|r| !(**r > T::zero()) || !r.is_finite()) {
            return Err(TunerError::Calibration(format!(
                "rates must be positive, got {bad}"
            )));
        }
        if rates.windows(2).any(|w| w[1] < w[0]) {
            return Err(TunerError::Calibration(
                "rates must not decrease from string 6 to string 1".into(),
            ));
        }
        Ok(Self { rates })
    }

    pub fn rate(&self, string: GuitarString) -> T {
        self.rates[index_of(string)]
    }

    /// Parses an override file. Keys are string numbers 1-6, values are
    /// Hz per degree; unlisted strings keep their default rate.
    ///
    /// ```text
    /// # my guitar
    /// 6 = 0.021
    /// 1 = 0.09
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        let table: BTreeMap<String, f64> =
            toml::from_str(text).map_err(|e| TunerError::Calibration(e.to_string()))?;
        let mut rates = Self::default().rates;
        for (key, value) in table {
            let number: u8 = key.trim().parse().map_err(|_| {
                TunerError::Calibration(format!("key {key:?} is not a string number"))
            })?;
            let string = GuitarString::from_number(number)
                .map_err(|e| TunerError::Calibration(e.to_string()))?;
            rates[index_of(string)] = T::lit(value);
        }
        Self::new(rates)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config_str(&std::fs::read_to_string(path)?)
    }
}

/// Hz per degree for `string` under the built-in calibration.
pub fn turn_rate<T: Scalar>(string: GuitarString) -> T {
    TurnCalibration::<T>::default().rate(string)
}

/// Unclamped rotation that shifts `string` by `delta_hz`.
pub fn degrees_for_shift<T: Scalar>(
    string: GuitarString,
    delta_hz: T,
    calibration: &TurnCalibration<T>,
) -> T {
    delta_hz / calibration.rate(string)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Tighten,
    Loosen,
    InTune,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Tighten => "tighten",
            Direction::Loosen => "loosen",
            Direction::InTune => "in_tune",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningAdvice<T> {
    pub string: GuitarString,
    pub detected: T,
    pub target: T,
    pub cents: T,
    /// Positive is clockwise (tighten).
    pub degrees: T,
    pub direction: Direction,
    /// Set when the raw suggestion exceeded [`MAX_TURN_DEGREES`].
    pub clamped: bool,
}

pub fn advise<T: Scalar>(
    string: GuitarString,
    detected: T,
    calibration: &TurnCalibration<T>,
) -> Result<TuningAdvice<T>> {
    if !(detected > T::zero()) || !detected.is_finite() {
        return Err(TunerError::invalid(format!(
            "detected frequency must be positive, got {detected}"
        )));
    }
    let target = T::lit(string.target_hz());
    let delta = target - detected;
    let cents = cents_offset(detected, target)?;

    // Tabulated targets carry one decimal; absorb representation error at the boundary.
    let threshold = T::lit(IN_TUNE_THRESHOLD_HZ + 1e-9);
    let direction = if delta > threshold {
        Direction::Tighten
    } else if delta < -threshold {
        Direction::Loosen
    } else {
        Direction::InTune
    };

    let (degrees, clamped) = match direction {
        Direction::InTune => (T::zero(), false),
        _ => {
            let raw = degrees_for_shift(string, delta, calibration);
            let limit = T::lit(MAX_TURN_DEGREES);
            if raw.abs() > limit {
                (limit.copysign(raw), true)
            } else {
                (raw, false)
            }
        }
    };

    Ok(TuningAdvice {
        string,
        detected,
        target,
        cents,
        degrees,
        direction,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_cal() -> TurnCalibration<f64> {
        TurnCalibration::default()
    }

    #[test]
    fn tabulated_rates() {
        assert_eq!(turn_rate::<f64>(GuitarString::E2), 0.022);
        assert_eq!(turn_rate::<f64>(GuitarString::B3), 0.075);
        assert_eq!(turn_rate::<f64>(GuitarString::E4), 0.083);
        assert_eq!(turn_rate::<f64>(GuitarString::D3), 0.028);
    }

    #[test]
    fn sharp_b_string_loosens_half_a_turn() {
        let a = advise(GuitarString::B3, 260.4, &default_cal()).unwrap();
        assert!((a.degrees + 180.0).abs() < 1e-9, "{}", a.degrees);
        assert_eq!(a.direction, Direction::Loosen);
        assert!(!a.clamped);
    }

    #[test]
    fn exact_target_is_in_tune() {
        let a = advise(GuitarString::E2, 82.4, &default_cal()).unwrap();
        assert_eq!(a.degrees, 0.0);
        assert_eq!(a.direction, Direction::InTune);
        assert_eq!(a.cents, 0.0);
    }

    #[test]
    fn flat_low_e_tightens() {
        let a = advise(GuitarString::E2, 78.4, &default_cal()).unwrap();
        assert!((a.degrees - 181.8).abs() <= 0.1, "{}", a.degrees);
        assert_eq!(a.direction, Direction::Tighten);
    }

    #[test]
    fn b_string_shift_is_exactly_half_turn() {
        assert_eq!(
            degrees_for_shift(GuitarString::B3, 13.5, &default_cal()),
            180.0
        );
    }

    #[test]
    fn large_errors_clamp() {
        let a = advise(GuitarString::E2, 40.0, &default_cal()).unwrap();
        assert_eq!(a.degrees, 720.0);
        assert!(a.clamped);
        assert_eq!(a.direction, Direction::Tighten);
        let b = advise(GuitarString::E2, 140.0, &default_cal()).unwrap();
        assert_eq!(b.degrees, -720.0);
        assert!(b.clamped);
    }

    #[test]
    fn threshold_boundary_is_in_tune() {
        for detected in [82.9, 81.9, 82.4 + 0.5, 82.4 - 0.5] {
            let a = advise(GuitarString::E2, detected, &default_cal()).unwrap();
            assert_eq!(a.direction, Direction::InTune, "{detected}");
            assert_eq!(a.degrees, 0.0);
        }
        let just_out = advise(GuitarString::E2, 82.91, &default_cal()).unwrap();
        assert_eq!(just_out.direction, Direction::Loosen);
    }

    #[test]
    fn non_positive_detection_rejected() {
        assert!(advise(GuitarString::A2, 0.0, &default_cal()).is_err());
        assert!(advise(GuitarString::A2, -3.0, &default_cal()).is_err());
    }

    #[test]
    fn calibration_file_overrides() {
        let cal = TurnCalibration::<f64>::from_config_str("# mine\n6 = 0.02\n1 = 0.09\n").unwrap();
        assert_eq!(cal.rate(GuitarString::E2), 0.02);
        assert_eq!(cal.rate(GuitarString::E4), 0.09);
        assert_eq!(cal.rate(GuitarString::B3), 0.075);
    }

    #[test]
    fn calibration_file_errors() {
        for bad in ["7 = 0.1", "x = 0.1", "3 = -0.1", "1 = 0.001", "2 = "] {
            assert!(
                matches!(
                    TurnCalibration::<f64>::from_config_str(bad),
                    Err(TunerError::Calibration(_))
                ),
                "{bad}"
            );
        }
    }

    #[test]
    fn calibration_invariants() {
        assert!(TurnCalibration::new([0.1f64; 6]).is_ok());
        assert!(TurnCalibration::new([0.0f64, 0.1, 0.1, 0.1, 0.1, 0.1]).is_err());
        assert!(TurnCalibration::new([0.2f64, 0.1, 0.1, 0.1, 0.1, 0.1]).is_err());
    }

    proptest! {
        #[test]
        fn advice_is_antisymmetric(idx in 0usize..6, delta in 0.51f64..60.0) {
            let s = GuitarString::ALL[idx];
            let t = s.target_hz();
            let up = advise(s, t + delta, &default_cal()).unwrap();
            let down = advise(s, t - delta, &default_cal()).unwrap();
            prop_assert!((up.degrees + down.degrees).abs() <= 1e-9 * up.degrees.abs().max(1.0));
        }

        #[test]
        fn small_errors_are_in_tune(idx in 0usize..6, delta in -0.5f64..=0.5) {
            let s = GuitarString::ALL[idx];
            let a = advise(s, s.target_hz() + delta, &default_cal()).unwrap();
            prop_assert_eq!(a.direction, Direction::InTune);
            prop_assert_eq!(a.degrees, 0.0);
        }

        #[test]
        fn degrees_grow_with_error(idx in 0usize..6, d1 in 0.51f64..10.0, extra in 0.01f64..5.0) {
            let s = GuitarString::ALL[idx];
            let t = s.target_hz();
            let a = advise(s, t - d1, &default_cal()).unwrap();
            let b = advise(s, t - d1 - extra, &default_cal()).unwrap();
            prop_assert!(b.degrees.abs() > a.degrees.abs() || b.clamped);
            prop_assert!(a.degrees > 0.0);
        }

        #[test]
        fn sign_follows_error(idx in 0usize..6, detected in 20.0f64..600.0) {
            let s = GuitarString::ALL[idx];
            let a = advise(s, detected, &default_cal()).unwrap();
            let delta = s.target_hz() - detected;
            match a.direction {
                Direction::InTune => prop_assert_eq!(a.degrees, 0.0),
                _ => prop_assert_eq!(a.degrees.signum(), delta.signum()),
            }
            prop_assert!(a.degrees.abs() <= MAX_TURN_DEGREES);
        }
    }
}

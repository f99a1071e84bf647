use crate::advisor::{advise, TuningAdvice, TurnCalibration};
use crate::dsp::{AnalysisConfig, SampleBuffer};
use crate::error::Result;
use crate::notes::GuitarString;
use crate::pitch::{detect_fundamental, HarmonicConfig, PitchEstimate};
use crate::scalar::Scalar;

/// Detection followed by advice for one string.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis<T> {
    pub estimate: PitchEstimate<T>,
    pub advice: TuningAdvice<T>,
}

/// The complete tuning chain with its configuration.
#[derive(Debug, Clone)]
pub struct Tuner<T> {
    pub analysis: AnalysisConfig,
    pub harmonic: HarmonicConfig,
    pub calibration: TurnCalibration<T>,
}

impl<T: Scalar> Default for Tuner<T> {
    fn default() -> Self {
        Self {
            analysis: AnalysisConfig::default(),
            harmonic: HarmonicConfig::default(),
            calibration: TurnCalibration::default(),
        }
    }
}

impl<T: Scalar> Tuner<T> {
    pub fn with_calibration(calibration: TurnCalibration<T>) -> Self {
        Self {
            calibration,
            ..Self::default()
        }
    }

    pub fn analyze(&self, buffer: &SampleBuffer<T>, string: GuitarString) -> Result<Analysis<T>> {
        let estimate = detect_fundamental(buffer, &self.analysis, &self.harmonic)?;
        let advice = advise(string, estimate.fundamental, &self.calibration)?;
        Ok(Analysis { estimate, advice })
    }
}

use serde::{Deserialize, Serialize};

use crate::error::ScoringError;
use crate::scalar::Scalar;

/// Bounded integer assessment scale with one label per step.
///
/// The maximum doubles as the ideal value that priorities are measured
/// against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScale", into = "RawScale")]
pub struct Scale {
    min: i64,
    max: i64,
    labels: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawScale {
    min: i64,
    max: i64,
    labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScaleError {
    #[error("scale minimum {min} must be below maximum {max}")]
    EmptyRange { min: i64, max: i64 },
    #[error("scale {min}..={max} needs {expected} labels, got {actual}")]
    LabelCount {
        min: i64,
        max: i64,
        expected: usize,
        actual: usize,
    },
}

impl Scale {
    pub fn new(min: i64, max: i64, labels: Vec<String>) -> Result<Self, ScaleError> {
        if min >= max {
            return Err(ScaleError::EmptyRange { min, max });
        }
        let expected = (max - min + 1) as usize;
        if labels.len() != expected {
            return Err(ScaleError::LabelCount {
                min,
                max,
                expected,
                actual: labels.len(),
            });
        }
        Ok(Self { min, max, labels })
    }

    pub fn min(&self) -> i64 {
        self.min
    }

    pub fn max(&self) -> i64 {
        self.max
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Width of the scale, `max - min`.
    pub fn span(&self) -> i64 {
        self.max - self.min
    }

    pub fn contains(&self, score: i64) -> bool {
        (self.min..=self.max).contains(&score)
    }

    /// Label of an integer step, if it lies on the scale.
    pub fn label(&self, score: i64) -> Option<&str> {
        if self.contains(score) {
            Some(&self.labels[(score - self.min) as usize])
        } else {
            None
        }
    }

    pub(crate) fn check_real<T: Scalar>(&self, value: T) -> Result<(), ScoringError> {
        if value < T::from_score(self.min) || value > T::from_score(self.max) {
            return Err(ScoringError::OutOfRangeScore {
                leaf_id: None,
                value: value.as_f64(),
                min: self.min,
                max: self.max,
            });
        }
        Ok(())
    }
}

impl Default for Scale {
    /// The five-point 0..=4 scale.
    fn default() -> Self {
        Self::new(
            0,
            4,
            [
                "not implementing",
                "below average",
                "average",
                "above average",
                "excellent",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        )
        .expect("default scale is well formed")
    }
}

impl TryFrom<RawScale> for Scale {
    type Error = ScaleError;

    fn try_from(raw: RawScale) -> Result<Self, Self::Error> {
        Scale::new(raw.min, raw.max, raw.labels)
    }
}

impl From<Scale> for RawScale {
    fn from(s: Scale) -> Self {
        RawScale {
            min: s.min,
            max: s.max,
            labels: s.labels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scale_labels() {
        let s = Scale::default();
        assert_eq!((s.min(), s.max()), (0, 4));
        assert_eq!(s.label(0), Some("not implementing"));
        assert_eq!(s.label(4), Some("excellent"));
        assert_eq!(s.label(5), None);
        assert_eq!(s.labels().len(), 5);
    }

    #[test]
    fn rejects_bad_scales() {
        assert_eq!(
            Scale::new(3, 3, vec!["x".into()]),
            Err(ScaleError::EmptyRange { min: 3, max: 3 })
        );
        assert!(matches!(
            Scale::new(1, 3, vec!["a".into(), "b".into()]),
            Err(ScaleError::LabelCount { expected: 3, actual: 2, .. })
        ));
        let bad: Result<Scale, _> = serde_json::from_str(r#"{"min":0,"max":2,"labels":["a"]}"#);
        assert!(bad.is_err());
    }
}

//! On-disk calibration model.

use std::fs;
use std::path::Path;

use monocal_core::Staircase;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub family: String,
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub merge_count: usize,
    pub total_loss: f64,
    pub solver: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl ModelFile {
    pub fn new(family: &str, staircase: &Staircase, metadata: Metadata) -> Self {
        ModelFile {
            version: MODEL_VERSION,
            family: family.to_string(),
            breakpoints: staircase.breakpoints().to_vec(),
            values: staircase.values().to_vec(),
            metadata,
        }
    }

    pub fn staircase(&self) -> Result<Staircase, CliError> {
        if self.version != MODEL_VERSION {
            return Err(CliError::Input(format!(
                "unsupported model version {}",
                self.version
            )));
        }
        if self.family != "square" && self.family != "logloss" {
            return Err(CliError::Input(format!("unknown family {:?}", self.family)));
        }
        Staircase::new(self.breakpoints.clone(), self.values.clone())
            .map_err(|e| CliError::Input(format!("invalid model: {e}")))
    }

    /// JSON text. Floats are written in shortest round-trip form, so reading
    /// the text back reproduces every value bit for bit.
    pub fn to_json(&self) -> Result<String, CliError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !finite(&self.breakpoints)
            || !finite(&self.values)
            || !self.metadata.total_loss.is_finite()
        {
            return Err(CliError::Input(
                "model contains non-finite numbers and cannot be written as JSON".into(),
            ));
        }
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Input(format!("cannot serialize model: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let model: ModelFile = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed model: {e}")))?;
        model.staircase()?;
        Ok(model)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read model {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn metadata() -> Metadata {
        Metadata {
            merge_count: 11,
            total_loss: 1234.5,
            solver: "stack".into(),
            delta: None,
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let s = Staircase::new(vec![4.5], vec![1.0, 2.0]).unwrap();
        let text = ModelFile::new("square", &s, metadata()).to_json().unwrap();
        let extra = text.replacen("\"version\"", "\"colour\": 1,\n  \"version\"", 1);
        assert!(ModelFile::from_json(&extra).is_err());
        let extra_meta = text.replacen("\"solver\"", "\"note\": \"x\",\n    \"solver\"", 1);
        assert!(ModelFile::from_json(&extra_meta).is_err());
        assert!(ModelFile::from_json(&text).is_ok());
    }

    #[test]
    fn invalid_staircases_are_rejected() {
        let mut m = ModelFile::new("square", &Staircase::constant(1.0).unwrap(), metadata());
        m.values = vec![2.0, 1.0];
        m.breakpoints = vec![0.0];
        assert!(ModelFile::from_json(&serde_json::to_string(&m).unwrap()).is_err());
        m.values = vec![1.0, 2.0];
        m.breakpoints = vec![];
        assert!(ModelFile::from_json(&serde_json::to_string(&m).unwrap()).is_err());
        m.breakpoints = vec![0.0];
        m.version = 2;
        assert!(ModelFile::from_json(&serde_json::to_string(&m).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            steps in prop::collection::vec((1e-9..1e3f64, 1e-12..1e6f64), 1..20),
            start in -1e6..1e6f64,
            base in -1e3..1e3f64,
        ) {
            let mut x = start;
            let mut v = base;
            let mut breakpoints = Vec::new();
            let mut values = vec![v];
            for (dx, dv) in &steps[1..] {
                x += dx;
                v += dv;
                breakpoints.push(x);
                values.push(v);
            }
            let s = Staircase::new(breakpoints, values).unwrap();
            let model = ModelFile::new("square", &s, metadata());
            let back = ModelFile::from_json(&model.to_json().unwrap()).unwrap();
            prop_assert_eq!(&back, &model);
            let s2 = back.staircase().unwrap();
            for (a, b) in s.values().iter().zip(s2.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in s.breakpoints().iter().zip(s2.breakpoints()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}

use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Sample;
use crate::error::{Error, Result};

/// How many hidden features a drift replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intensity {
    Mild,
    Medium,
    Drastic,
    Features(usize),
}

impl Intensity {
    pub fn features(self) -> usize {
        match self {
            Intensity::Mild => 1,
            Intensity::Medium => 3,
            Intensity::Drastic => 5,
            Intensity::Features(n) => n,
        }
    }
}

impl std::str::FromStr for Intensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mild" => Ok(Intensity::Mild),
            "medium" => Ok(Intensity::Medium),
            "drastic" => Ok(Intensity::Drastic),
            other => other
                .parse()
                .map(Intensity::Features)
                .map_err(|_| Error::Config(format!("unknown drift intensity `{other}`"))),
        }
    }
}

impl std::fmt::Display for Intensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Intensity::Mild => f.write_str("mild"),
            Intensity::Medium => f.write_str("medium"),
            Intensity::Drastic => f.write_str("drastic"),
            Intensity::Features(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Intensity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Intensity::Features(n) => s.serialize_u64(*n as u64),
            named => s.serialize_str(&named.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Intensity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(Intensity::Features(n)),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Abrupt-drift binary stream over binary features.
///
/// The label is the majority vote of a hidden subset of `n_relevant`
/// features. At each drift point `intensity` members of that subset are
/// swapped for features outside it. Noise, when enabled, flips
/// `round(|N(0, noise_std)|)` randomly chosen features of each sample after
/// its label has been fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    pub n_samples: usize,
    pub n_features: usize,
    pub n_relevant: usize,
    pub n_drifts: usize,
    pub intensity: Intensity,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            n_samples: 50_000,
            n_features: 10,
            n_relevant: 5,
            n_drifts: 1,
            intensity: Intensity::Drastic,
            noise_std: 0.0,
            seed: 0,
        }
    }
}

impl DriftConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: DriftConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let k = self.intensity.features();
        if self.n_features == 0 {
            return bad("n_features must be positive".into());
        }
        if k > self.n_features {
            return bad(format!("intensity {k} exceeds n_features {}", self.n_features));
        }
        if self.n_relevant == 0 || self.n_relevant > self.n_features {
            return bad(format!("n_relevant must be in 1..={}", self.n_features));
        }
        if self.n_drifts > 0 {
            if k > self.n_relevant {
                return bad(format!("intensity {k} exceeds n_relevant {}", self.n_relevant));
            }
            if k > self.n_features - self.n_relevant {
                return bad(format!(
                    "intensity {k} needs {k} spare features, only {} exist",
                    self.n_features - self.n_relevant
                ));
            }
            if self.n_samples <= self.n_drifts {
                return bad("need more samples than drifts".into());
            }
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad("noise_std must be a finite non-negative number".into());
        }
        Ok(())
    }

    /// Sample indices at which a new concept starts.
    pub fn drift_points(&self) -> Vec<usize> {
        (1..=self.n_drifts)
            .map(|k| k * self.n_samples / (self.n_drifts + 1))
            .collect()
    }

    pub fn stream(&self) -> Result<DriftStream> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut relevant: Vec<usize> = index::sample(&mut rng, self.n_features, self.n_relevant).into_vec();
        relevant.sort_unstable();
        let noise = (self.noise_std > 0.0).then(|| Normal::new(0.0, self.noise_std).expect("validated std"));
        Ok(DriftStream {
            config: self.clone(),
            rng,
            relevant,
            drift_points: self.drift_points(),
            next: 0,
            noise,
        })
    }

    /// The whole stream in memory.
    pub fn generate(&self) -> Result<Vec<Sample>> {
        Ok(self.stream()?.collect())
    }
}

#[derive(Debug, Clone)]
pub struct DriftStream {
    config: DriftConfig,
    rng: ChaCha8Rng,
    relevant: Vec<usize>,
    drift_points: Vec<usize>,
    next: usize,
    noise: Option<Normal<f64>>,
}

impl DriftStream {
    /// Hidden features defining the current concept.
    pub fn relevant_features(&self) -> &[usize] {
        &self.relevant
    }

    fn drift(&mut self) {
        let k = self.config.intensity.features();
        let outside: Vec<usize> = (0..self.config.n_features)
            .filter(|f| !self.relevant.contains(f))
            .collect();
        let dropped = index::sample(&mut self.rng, self.relevant.len(), k).into_vec();
        let added = index::sample(&mut self.rng, outside.len(), k).into_vec();
        for (slot, pick) in dropped.into_iter().zip(added) {
            self.relevant[slot] = outside[pick];
        }
        self.relevant.sort_unstable();
    }
}

impl Iterator for DriftStream {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        if self.next >= self.config.n_samples {
            return None;
        }
        if self.drift_points.contains(&self.next) {
            self.drift();
        }
        let n = self.config.n_features;
        let mut features: Vec<f64> = (0..n).map(|_| f64::from(self.rng.random_range(0..2u8))).collect();
        let ones = self.relevant.iter().filter(|&&f| features[f] > 0.5).count();
        let label = usize::from(2 * ones > self.relevant.len());
        if let Some(noise) = &self.noise {
            let flips = (noise.sample(&mut self.rng).abs().round() as usize).min(n);
            for f in index::sample(&mut self.rng, n, flips) {
                features[f] = 1.0 - features[f];
            }
        }
        let sample = Sample {
            id: self.next as u64,
            features,
            label,
        };
        self.next += 1;
        Some(sample)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.config.n_samples - self.next;
        (left, Some(left))
    }
}

use serde::{Deserialize, Serialize};

use super::GbdtError;

/// Tree growth strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    /// Expand every splittable node level by level up to `max_depth`.
    DepthWise,
    /// Repeatedly split the open leaf with the highest gain until
    /// `max_leaves` leaves exist (also bounded by `max_depth`).
    LeafWise,
}

impl std::str::FromStr for Growth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "depth_wise" | "depthwise" => Ok(Growth::DepthWise),
            "leaf_wise" | "leafwise" => Ok(Growth::LeafWise),
            other => Err(format!("unknown growth policy {other:?}")),
        }
    }
}

/// Gradient-based one-side sampling fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossParams {
    /// Fraction of rows kept by largest |gradient|.
    pub top_rate: f64,
    /// Fraction of rows sampled uniformly from the remainder.
    pub other_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_estimators: usize,
    /// L2 penalty on leaf weights.
    pub lambda_l2: f64,
    pub max_bins: usize,
    pub min_samples_leaf: usize,
    pub goss: Option<GossParams>,
    pub seed: u64,
    pub growth: Growth,
    /// Leaf budget for [`Growth::LeafWise`].
    pub max_leaves: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        Preset::CatboostLike.params()
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), GbdtError> {
        let bad = |m: String| Err(GbdtError::InvalidParams(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive".into());
        }
        if !(self.lambda_l2 >= 0.0 && self.lambda_l2.is_finite()) {
            return bad(format!("lambda_l2 {} must be non-negative", self.lambda_l2));
        }
        if !(2..=255).contains(&self.max_bins) {
            return bad(format!("max_bins {} outside [2, 255]", self.max_bins));
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be positive".into());
        }
        if self.max_leaves == 0 {
            return bad("max_leaves must be positive".into());
        }
        if let Some(g) = self.goss {
            check_fractions(g.top_rate, g.other_rate)?;
        }
        Ok(())
    }
}

pub(crate) fn check_fractions(a: f64, b: f64) -> Result<(), GbdtError> {
    if !(a > 0.0 && a <= 1.0 && b >= 0.0 && a + b <= 1.0 + 1e-12) {
        return Err(GbdtError::InvalidFractions { a, b });
    }
    Ok(())
}

/// Settings standing in for the three libraries' reported hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    CatboostLike,
    XgboostLike,
    LightgbmLike,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::CatboostLike, Preset::XgboostLike, Preset::LightgbmLike];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CatboostLike => "catboost-like",
            Preset::XgboostLike => "xgboost-like",
            Preset::LightgbmLike => "lightgbm-like",
        }
    }

    pub fn params(self) -> TrainParams {
        let base = TrainParams {
            learning_rate: 0.02,
            max_depth: 5,
            n_estimators: 1500,
            lambda_l2: 1.0,
            max_bins: 255,
            min_samples_leaf: 20,
            goss: None,
            seed: 0,
            growth: Growth::DepthWise,
            max_leaves: 32,
        };
        match self {
            Preset::CatboostLike => base,
            Preset::XgboostLike => TrainParams {
                learning_rate: 0.0156,
                max_depth: 8,
                n_estimators: 300,
                max_leaves: 256,
                ..base
            },
            Preset::LightgbmLike => TrainParams {
                learning_rate: 0.0182,
                max_depth: 10,
                n_estimators: 250,
                growth: Growth::LeafWise,
                max_leaves: 1 << 10,
                goss: Some(GossParams {
                    top_rate: 0.2,
                    other_rate: 0.1,
                }),
                ..base
            },
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| {
                format!("unknown preset {key:?} (expected catboost-like, xgboost-like or lightgbm-like)")
            })
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        let c = Preset::CatboostLike.params();
        assert_eq!((c.learning_rate, c.max_depth, c.n_estimators), (0.02, 5, 1500));
        let x = Preset::XgboostLike.params();
        assert_eq!((x.learning_rate, x.max_depth, x.n_estimators), (0.0156, 8, 300));
        let l = Preset::LightgbmLike.params();
        assert_eq!((l.learning_rate, l.max_depth, l.n_estimators), (0.0182, 10, 250));
        assert_eq!(l.growth, Growth::LeafWise);
        assert!(l.goss.is_some());
        for p in Preset::ALL {
            p.params().validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("random-forest".parse::<Preset>().is_err());
    }

    #[test]
    fn validation() {
        let p = TrainParams {
            max_bins: 256,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = TrainParams {
            goss: Some(GossParams {
                top_rate: 0.7,
                other_rate: 0.4,
            }),
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(GbdtError::InvalidFractions { .. })));
        let p = TrainParams {
            n_estimators: 0,
            ..Default::default()
        };
        p.validate().unwrap();
    }
}

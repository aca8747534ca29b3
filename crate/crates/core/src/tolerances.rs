use serde::{Deserialize, Serialize};

/// Relative tolerances; lengths are multiplied by the bounding-box diagonal
/// of the input, heights by the height range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Level-edge threshold for directional counts.
    pub eps_level: f64,
    /// Minimum transversality angle at a crossing, radians.
    pub theta_min: f64,
    /// Angular threshold for merging secant lines, radians.
    pub dedup_angle: f64,
    /// Moment-distance threshold for merging secant lines.
    pub dedup_moment: f64,
    /// Slack for a hit to count as lying on a segment.
    pub hit_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_level: 1e-12, theta_min: 1e-4, dedup_angle: 1e-6, dedup_moment: 1e-6, hit_slack: 1e-9 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("eps_level", self.eps_level),
            ("theta_min", self.theta_min),
            ("dedup_angle", self.dedup_angle),
            ("dedup_moment", self.dedup_moment),
            ("hit_slack", self.hit_slack),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

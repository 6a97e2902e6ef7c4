//! Radar scene: leakage path and point targets on a rotating turntable.

use std::f64::consts::PI;

use crate::chirp::C;
use crate::error::Error;

/// A point scatterer riding on the turntable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTarget {
    /// Distance from the turntable center (m).
    pub radius_m: f64,
    /// Angular position at slow time zero (rad). Zero puts the target on
    /// the antenna side of the center.
    pub initial_angle_rad: f64,
    /// Echo amplitude as a fraction of the leakage amplitude.
    pub reflectivity: f64,
}

/// Leakage path plus rotating point targets.
///
/// Echo amplitudes are `reflectivity * leakage_amplitude`; echo power is
/// an experiment knob (attenuators in the hardware this models), not a
/// radar-equation quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Distance from the antenna pair to the turntable center, L1 (m).
    pub antenna_to_center_m: f64,
    /// Turntable rotation period (s).
    pub turntable_period_s: f64,
    pub targets: Vec<PointTarget>,
    /// Leakage path delay (s).
    pub leakage_delay_s: f64,
    /// Leakage amplitude at the modulator (V).
    pub leakage_amplitude_v: f64,
    /// Extra delay added to every echo path for cable lengths (s).
    pub system_delay_offset_s: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.turntable_period_s > 0.0) {
            return Err(Error::invalid("turntable period must be > 0"));
        }
        if self.leakage_delay_s < 0.0 || self.leakage_amplitude_v < 0.0 {
            return Err(Error::invalid("leakage delay and amplitude must be >= 0"));
        }
        if self.system_delay_offset_s < 0.0 {
            return Err(Error::invalid("system delay offset must be >= 0"));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.radius_m < 0.0 || t.reflectivity < 0.0 {
                return Err(Error::invalid(format!(
                    "target {i}: radius and reflectivity must be >= 0"
                )));
            }
            if t.radius_m >= self.antenna_to_center_m {
                return Err(Error::invalid(format!(
                    "target {i}: radius {} m places it behind the antenna (L1 = {} m)",
                    t.radius_m, self.antenna_to_center_m
                )));
            }
        }
        Ok(())
    }

    /// Turntable angle of a target at `slow_time`; the table turns
    /// clockwise, so the angle decreases.
    pub fn target_angle(&self, target_index: usize, slow_time_s: f64) -> f64 {
        let t = &self.targets[target_index];
        t.initial_angle_rad - 2.0 * PI * slow_time_s / self.turntable_period_s
    }

    /// Line-of-sight distance from the antenna pair to a target (m).
    pub fn target_distance(&self, target_index: usize, slow_time_s: f64) -> f64 {
        let r = self.targets[target_index].radius_m;
        let l1 = self.antenna_to_center_m;
        let phi = self.target_angle(target_index, slow_time_s);
        (l1 * l1 + r * r - 2.0 * l1 * r * phi.cos()).sqrt()
    }

    /// Round-trip echo delay of a target (s), including the system offset.
    pub fn echo_delay(&self, target_index: usize, slow_time_s: f64) -> f64 {
        2.0 * self.target_distance(target_index, slow_time_s) / C + self.system_delay_offset_s
    }

    /// Largest echo delay any target can reach (s).
    pub fn max_echo_delay(&self) -> f64 {
        self.targets
            .iter()
            .map(|t| 2.0 * (self.antenna_to_center_m + t.radius_m) / C + self.system_delay_offset_s)
            .fold(self.leakage_delay_s, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scene_with(radius: f64, angle: f64, l1: f64, offset: f64) -> Scene {
        Scene {
            antenna_to_center_m: l1,
            turntable_period_s: 24.56,
            targets: vec![PointTarget {
                radius_m: radius,
                initial_angle_rad: angle,
                reflectivity: 1.0,
            }],
            leakage_delay_s: 6e-9,
            leakage_amplitude_v: 0.1,
            system_delay_offset_s: offset,
        }
    }

    #[test]
    fn center_target_delay() {
        let s = scene_with(0.0, 0.0, 1.55, 0.0);
        assert_relative_eq!(s.echo_delay(0, 0.0), 2.0 * 1.55 / C, max_relative = 1e-15);
    }

    #[test]
    fn nearest_and_farthest_positions() {
        // Turntable geometry of the ranging experiment: the target moves
        // between 1.10 m and 2.00 m from the antenna pair.
        let s = scene_with(0.45, 0.0, 1.55, 0.0);
        assert_relative_eq!(s.echo_delay(0, 0.0), 2.0 * 1.10 / C, max_relative = 1e-12);
        let half_turn = s.turntable_period_s / 2.0;
        assert_relative_eq!(s.echo_delay(0, half_turn), 2.0 * 2.00 / C, max_relative = 1e-12);
    }

    #[test]
    fn system_offset_is_additive() {
        let base = scene_with(0.45, 0.3, 1.55, 0.0);
        let offset = scene_with(0.45, 0.3, 1.55, 6e-9);
        for &t in &[0.0, 3.1, 17.9] {
            assert_relative_eq!(
                offset.echo_delay(0, t) - base.echo_delay(0, t),
                6e-9,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn delay_returns_after_full_rotation() {
        let s = scene_with(0.45, 1.234, 1.89, 2e-9);
        let d0 = s.echo_delay(0, 0.0);
        let d1 = s.echo_delay(0, s.turntable_period_s);
        assert!((d1 - d0).abs() < 1e-15, "drift {}", (d1 - d0).abs());
    }

    #[test]
    fn delay_bounded_by_geometry() {
        let s = scene_with(0.45, 0.7, 1.55, 1e-9);
        let lo = 2.0 * (1.55 - 0.45) / C + 1e-9;
        let hi = 2.0 * (1.55 + 0.45) / C + 1e-9;
        for i in 0..100 {
            let d = s.echo_delay(0, i as f64 * 0.31);
            assert!(d >= lo - 1e-18 && d <= hi + 1e-18);
        }
    }

    #[test]
    fn clockwise_rotation_decreases_angle() {
        let s = scene_with(0.45, 1.0, 1.55, 0.0);
        assert!(s.target_angle(0, 1.0) < s.target_angle(0, 0.0));
    }

    #[test]
    fn target_behind_antenna_rejected() {
        let s = scene_with(2.0, 0.0, 1.55, 0.0);
        assert!(s.validate().is_err());
    }
}

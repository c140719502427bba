use crate::error::{Error, Result};

/// Spatial domain the particles live in.
///
/// Periodic domains are squares (cubes in higher dimension) of side `side`
/// with coordinates kept in `[0, side)`. Distances use the minimum-image
/// convention, which is the same as surrounding the box with a layer of
/// ghost copies as long as the interaction range stays below `side / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Unbounded,
    Periodic { side: f64 },
}

impl Default for Domain {
    fn default() -> Self {
        Domain::Unbounded
    }
}

impl Domain {
    pub fn periodic(side: f64) -> Self {
        Domain::Periodic { side }
    }

    pub fn side(&self) -> Option<f64> {
        match *self {
            Domain::Unbounded => None,
            Domain::Periodic { side } => Some(side),
        }
    }

    /// Checks `side > 0` and, when an interaction range is given, `side > 2 * range`.
    pub fn validate(&self, interaction_range: Option<f64>) -> Result<()> {
        if let Domain::Periodic { side } = *self {
            if !(side.is_finite() && side > 0.0) {
                return Err(Error::config("L", "periodic side length must be positive"));
            }
            if let Some(range) = interaction_range {
                if range.is_finite() && side <= 2.0 * range {
                    return Err(Error::config(
                        "L",
                        format!("periodic side {side} must exceed twice the interaction radius {range}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Component of the shortest displacement from `a` to `b` along one axis.
    #[inline]
    pub fn delta_axis(&self, a: f64, b: f64) -> f64 {
        let d = b - a;
        match *self {
            Domain::Unbounded => d,
            Domain::Periodic { side } => d - side * (d / side).round(),
        }
    }

    #[inline]
    pub fn distance_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let d = self.delta_axis(x, y);
                d * d
            })
            .sum()
    }

    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    /// Maps coordinates back into `[0, side)`; a no-op for unbounded domains.
    pub fn wrap(&self, coords: &mut [f64]) {
        if let Domain::Periodic { side } = *self {
            for c in coords {
                let mut w = c.rem_euclid(side);
                // rem_euclid of a tiny negative value can round up to `side`
                if w >= side {
                    w -= side;
                }
                *c = w;
            }
        }
    }
}

/// Euclidean distance between the nearest periodic images of `a` and `b`.
pub fn min_image_distance(a: &[f64], b: &[f64], domain: &Domain) -> f64 {
    domain.distance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraparound_distance() {
        let d = Domain::periodic(25.0);
        assert!((min_image_distance(&[0.5], &[24.9], &d) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn identical_points() {
        let d = Domain::periodic(25.0);
        assert_eq!(min_image_distance(&[3.0, 4.0], &[3.0, 4.0], &d), 0.0);
        assert_eq!(min_image_distance(&[3.0, 4.0], &[3.0, 4.0], &Domain::Unbounded), 0.0);
    }

    #[test]
    fn half_box_has_no_closer_image() {
        let d = Domain::periodic(10.0);
        assert_eq!(min_image_distance(&[1.0], &[6.0], &d), 5.0);
        assert_eq!(min_image_distance(&[6.0], &[1.0], &d), 5.0);
    }

    #[test]
    fn unbounded_is_euclidean() {
        assert_eq!(Domain::Unbounded.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn wrap_into_box() {
        let d = Domain::periodic(25.0);
        let mut x = [25.0, -0.5, 50.25, -1e-18];
        d.wrap(&mut x);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 24.5).abs() < 1e-12);
        assert!((x[2] - 0.25).abs() < 1e-12);
        assert!(x[3] >= 0.0 && x[3] < 25.0);
    }

    #[test]
    fn side_must_exceed_twice_range() {
        assert!(Domain::periodic(4.0).validate(Some(2.0)).is_err());
        assert!(Domain::periodic(4.1).validate(Some(2.0)).is_ok());
        assert!(Domain::periodic(-1.0).validate(None).is_err());
    }
}

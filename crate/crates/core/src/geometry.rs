//! Planar primitives, network parameters and the probabilistic cell area
//! (PCA) of the Voronoi cell of the AP nearest to the origin.
//!
//! Everything here works in the canonical frame where the nearest AP `x*`
//! sits on the non-negative x-axis. The PCA of a point `x` is
//! `exp(-λ_a |A|)` with `A = B(x, |x - x*|) \ B(o, |x*|)`: `|A|` is already
//! an area, so no extra factor of π appears in the exponent (the `x* = o`
//! case then reproduces the unconditioned bound `exp(-λ_a π |x - x*|²)`).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Point at distance `r` and angle `theta` from the origin.
    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Principal angle in `[-π, π)`.
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        if a >= PI {
            a - 2.0 * PI
        } else {
            a
        }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        (self - other).norm_sq()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

/// The conditioned geometry: nearest AP `x*` and receiver `x_R`, stored in
/// the frame rotated so that `∠x* = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    x_star: Point2,
    x_r: Point2,
    rotation: f64,
}

impl Scenario {
    /// Builds a scenario from positions in any frame; both points are rotated
    /// by `-∠x*` and the rotation is recorded.
    pub fn new(x_star: Point2, x_r: Point2) -> Result<Self> {
        if !x_star.is_finite() || !x_r.is_finite() {
            return Err(Error::invalid("scenario coordinates must be finite"));
        }
        let rotation = if x_star.norm() > 0.0 { x_star.angle() } else { 0.0 };
        Ok(Self {
            x_star: Point2::new(x_star.norm(), 0.0),
            x_r: x_r.rotate(-rotation),
            rotation,
        })
    }

    /// `x* = (|x*|, 0)` and `x_R` given directly in the canonical frame.
    pub fn canonical(norm_xstar: f64, x_r: Point2) -> Result<Self> {
        if !(norm_xstar >= 0.0) {
            return Err(Error::invalid(format!("|x*| must be >= 0, got {norm_xstar}")));
        }
        Self::new(Point2::new(norm_xstar, 0.0), x_r)
    }

    /// Receiver at polar position `(norm_xr, angle_xr)` relative to the
    /// `o → x*` axis.
    pub fn with_receiver_polar(norm_xstar: f64, norm_xr: f64, angle_xr: f64) -> Result<Self> {
        Self::canonical(norm_xstar, Point2::polar(norm_xr, angle_xr))
    }

    pub fn x_star(&self) -> Point2 {
        self.x_star
    }

    pub fn x_r(&self) -> Point2 {
        self.x_r
    }

    pub fn norm_xstar(&self) -> f64 {
        self.x_star.x
    }

    pub fn norm_xr(&self) -> f64 {
        self.x_r.norm()
    }

    /// Angle of the original `x*`; results never depend on it.
    pub fn rotation(&self) -> f64 {
        self.rotation
    }
}

/// Densities (points per unit area), transmit powers and path-loss
/// exponents of the AP and UE tiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lambda_a: f64,
    pub lambda_u: f64,
    pub p_a: f64,
    pub p_u: f64,
    pub alpha_a: f64,
    pub alpha_u: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            lambda_a: 1.0,
            lambda_u: 1.0,
            p_a: 1.0,
            p_u: 1.0,
            alpha_a: 4.0,
            alpha_u: 4.0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_a > 0.0 && self.lambda_a.is_finite()) {
            return Err(Error::invalid(format!("lambda_a must be > 0, got {}", self.lambda_a)));
        }
        if !(self.lambda_u >= 0.0 && self.lambda_u.is_finite()) {
            return Err(Error::invalid(format!("lambda_u must be >= 0, got {}", self.lambda_u)));
        }
        if !(self.p_a > 0.0 && self.p_u > 0.0) {
            return Err(Error::invalid("transmit powers must be > 0"));
        }
        if !(self.alpha_a > 2.0 && self.alpha_u > 2.0) {
            return Err(Error::invalid(format!(
                "path-loss exponents must exceed 2 (alpha_a {}, alpha_u {})",
                self.alpha_a, self.alpha_u
            )));
        }
        Ok(())
    }

    /// `1/(2√λ_a)`, the mean distance to the nearest AP.
    pub fn mean_nearest_distance(&self) -> f64 {
        0.5 / self.lambda_a.sqrt()
    }
}

/// Area of `B(x, |x - x*|) \ B(o, |x*|)`, with `x*` on the positive x-axis.
pub fn lens_area(x: Point2, x_star: Point2) -> f64 {
    let rs = x_star.norm();
    let rx = x.norm();
    if rs == 0.0 {
        return PI * rx * rx;
    }
    let phi = x.angle().abs();
    let r_star_sq = (rx * rx + rs * rs - 2.0 * rx * rs * phi.cos()).max(0.0);
    if r_star_sq == 0.0 {
        return 0.0;
    }
    let sin_phi = phi.sin();
    // Angle at x* in the triangle (o, x*, x): asin(|x| sin φ / r*), taken
    // obtuse when |x| cos φ > |x*|. atan2 keeps it accurate near π/2.
    let theta_star = (rx * sin_phi).atan2(rs - rx * phi.cos());
    let area = r_star_sq * (phi + theta_star) - rs * rs * phi + rx * rs * sin_phi;
    area.max(0.0)
}

/// `P(x ∈ V* | x*)`.
pub fn pca(x: Point2, scenario: &Scenario, lambda_a: f64) -> f64 {
    (-lambda_a * lens_area(x, scenario.x_star())).exp()
}

/// `1 - pca`, accurate when the PCA is close to one.
pub fn pca_complement(x: Point2, x_star: Point2, lambda_a: f64) -> f64 {
    -(-lambda_a * lens_area(x, x_star)).exp_m1()
}

/// `exp(-λ_a π |x - x*|²)`, the PCA without conditioning on `x*` being the
/// nearest AP to the origin. Never exceeds [`pca`].
pub fn pca_lower_bound(x: Point2, scenario: &Scenario, lambda_a: f64) -> f64 {
    (-lambda_a * PI * x.dist_sq(scenario.x_star())).exp()
}

//! Scene descriptions: spherical resonators with complex material
//! contrast and wave speed, an optional small defect sphere, JSON
//! (de)serialization, and validation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Defect radii below this are rejected: the quadrature coupling between
/// a sphere this small and the chain underflows to noise.
pub const MIN_RADIUS: f64 = 1e-8;

/// Complex material parameters travel as `{"re": ..., "im": ...}` maps.
mod complex_map {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Parts { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let p = Parts::deserialize(d)?;
        Ok(Complex64::new(p.re, p.im))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Resonator {
    pub center: [f64; 3],
    pub radius: f64,
    /// Material-density contrast against the background (small and
    /// positive for subwavelength behavior; an imaginary part models
    /// gain or loss).
    #[serde(with = "complex_map")]
    pub delta: Complex64,
    /// Interior wave speed.
    #[serde(with = "complex_map")]
    pub speed: Complex64,
}

impl Resonator {
    pub fn new(center: [f64; 3], radius: f64, delta: Complex64, speed: Complex64) -> Self {
        Resonator {
            center,
            radius,
            delta,
            speed,
        }
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    /// Material weight delta v^2 / |volume| multiplying this body's row of
    /// the capacitance matrix in the resonance problem.
    pub fn weight(&self) -> Complex64 {
        self.delta * self.speed * self.speed / self.volume()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Scene {
    pub resonators: Vec<Resonator>,
    #[serde(default)]
    pub defect: Option<Resonator>,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene has no resonators")]
    Empty,
    #[error("body {index}: radius {radius} is not a finite positive number >= {MIN_RADIUS}")]
    BadRadius { index: usize, radius: f64 },
    #[error("body {index}: center coordinate is not finite")]
    BadCenter { index: usize },
    #[error("body {index}: material parameter is not finite")]
    BadMaterial { index: usize },
    #[error("bodies {first} and {second} overlap (gap {gap})")]
    Overlap {
        first: usize,
        second: usize,
        gap: f64,
    },
    #[error("failed to parse scene JSON: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Scene {
    /// All bodies in assembly order: resonators first, then the defect.
    pub fn bodies(&self) -> Vec<&Resonator> {
        self.resonators.iter().chain(self.defect.iter()).collect()
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serialization cannot fail")
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.resonators.is_empty() {
            return Err(SceneError::Empty);
        }
        let bodies = self.bodies();
        for (i, b) in bodies.iter().enumerate() {
            if !(b.radius.is_finite() && b.radius >= MIN_RADIUS) {
                return Err(SceneError::BadRadius {
                    index: i,
                    radius: b.radius,
                });
            }
            if b.center.iter().any(|c| !c.is_finite()) {
                return Err(SceneError::BadCenter { index: i });
            }
            for z in [b.delta, b.speed] {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(SceneError::BadMaterial { index: i });
                }
            }
        }
        for i in 0..bodies.len() {
            for j in (i + 1)..bodies.len() {
                let gap = distance(bodies[i].center, bodies[j].center)
                    - bodies[i].radius
                    - bodies[j].radius;
                if gap <= 0.0 {
                    return Err(SceneError::Overlap {
                        first: i,
                        second: j,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    /// Three unit-spaced resonators of radius `a` on the x axis with real
    /// contrast `delta` and unit speed.
    pub fn chain(a: f64, delta: f64) -> Self {
        let resonators = (0..3)
            .map(|k| {
                Resonator::new(
                    [k as f64, 0.0, 0.0],
                    a,
                    Complex64::new(delta, 0.0),
                    Complex64::new(1.0, 0.0),
                )
            })
            .collect();
        Scene {
            resonators,
            defect: None,
        }
    }

    /// Apply the balanced gain/loss profile (+t, 0, -t) to the imaginary
    /// parts of the three chain contrasts, leaving magnitudes delta * t.
    pub fn with_detuning(mut self, t: f64) -> Self {
        assert_eq!(self.resonators.len(), 3, "detuning profile is for the three-chain");
        let profile = [t, 0.0, -t];
        for (r, tau) in self.resonators.iter_mut().zip(profile) {
            r.delta = Complex64::new(r.delta.re, r.delta.re * tau);
        }
        self
    }

    /// Attach a small defect sphere whose contrast is scaled so its
    /// material weight equals the first resonator's: delta_defect =
    /// delta * (r / a)^3. A bounded weight keeps the defect's resonance
    /// comparable to the chain's as the radius shrinks.
    pub fn with_defect(mut self, center: [f64; 3], radius: f64) -> Self {
        let reference = &self.resonators[0];
        let scale = (radius / reference.radius).powi(3);
        self.defect = Some(Resonator::new(
            center,
            radius,
            reference.delta * scale,
            reference.speed,
        ));
        self
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn json_round_trip_preserves_scene() {
        let scene = Scene::chain(1.0 / 3.0, 1e-3)
            .with_detuning(0.25)
            .with_defect([3.0, 0.0, 0.0], 1e-2);
        let back = Scene::from_json(&scene.to_json()).unwrap();
        assert_eq!(scene, back);
    }

    #[test]
    fn defect_weight_matches_chain_weight() {
        let scene = Scene::chain(1.0 / 3.0, 1e-3).with_defect([3.0, 0.0, 0.0], 1e-2);
        let w_res = scene.resonators[0].weight();
        let w_def = scene.defect.as_ref().unwrap().weight();
        assert_relative_eq!(w_def.re, w_res.re, max_relative = 1e-12);
        assert_relative_eq!(
            w_res.re,
            1e-3 / (4.0 / 3.0 * PI * (1.0f64 / 3.0).powi(3)),
            max_relative = 1e-12
        );
    }

    #[test]
    fn overlapping_bodies_are_rejected() {
        let mut scene = Scene::chain(1.0 / 3.0, 1e-3);
        scene.resonators[1].center = [0.1, 0.0, 0.0];
        assert!(matches!(
            scene.validate(),
            Err(SceneError::Overlap { .. })
        ));
    }

    #[test]
    fn tiny_defects_are_rejected() {
        let scene = Scene::chain(1.0 / 3.0, 1e-3).with_defect([3.0, 0.0, 0.0], 1e-9);
        assert!(matches!(scene.validate(), Err(SceneError::BadRadius { .. })));
    }
}

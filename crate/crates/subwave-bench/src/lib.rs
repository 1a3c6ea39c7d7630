//! Shared fixtures for the pipeline benchmarks.

use subwave_core::bie::Resolution;
use subwave_core::geometry::Scene;

/// The standard three-chain: touching-free unit spacing, radius 1/3,
/// contrast 1e-3.
pub fn chain_scene() -> Scene {
    Scene::chain(1.0 / 3.0, 1e-3)
}

pub fn resolution() -> Resolution {
    Resolution::new(4)
}

pub fn bodies(scene: &Scene) -> Vec<([f64; 3], f64)> {
    scene
        .resonators
        .iter()
        .map(|r| (r.center, r.radius))
        .collect()
}

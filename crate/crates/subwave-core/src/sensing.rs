//! Defect localization from resonance measurements: the forward model
//! mapping a candidate defect position to the chain's perturbed
//! resonances, a pairing-aware misfit, finite-difference steepest
//! descent, multiplicative measurement noise, and the Monte Carlo
//! experiment comparing scenes under that noise.

use crate::bie::{AssemblyError, Resolution};
use crate::capacitance::DefectSolver;
use crate::geometry::Scene;
use crate::spectral;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SensingError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("finite-difference stencil failed on both step sizes at ({0}, {1})")]
    StencilFailed(f64, f64),
    #[error("sensing scene must have exactly three chain resonators")]
    WrongChain,
}

/// Forward model: a fixed chain (with its gain/loss profile baked into.
/// the weights) probed by an equal-weight defect sphere of fixed radius
/// moving in the z = 0 plane.
pub struct SensingModel {
    solver: DefectSolver,
    weights: Vec<Complex64>,
    defect_weight: f64,
    pub defect_radius: f64,
}

impl SensingModel {
    /// Build from a chain scene; the defect weight copies the real part
    /// of the first resonator's weight so the probe stays comparable to
    /// the chain at every radius.
    pub fn new(scene: &Scene, res: Resolution, defect_radius: f64) -> Result<Self, SensingError> {
        if scene.resonators.len() != 3 {
            return Err(SensingError::WrongChain);
        }
        let bodies: Vec<([f64; 3], f64)> = scene
            .resonators
            .iter()
            .map(|b| (b.center, b.radius))
            .collect();
        let solver = DefectSolver::from_bodies(&bodies, res)?;
        let weights = scene.resonators.iter().map(|b| b.weight()).collect();
        let defect_weight = scene.resonators[0].weight().re;
        Ok(SensingModel {
            solver,
            weights,
            defect_weight,
            defect_radius,
        })
    }

    /// Chain resonances with the defect at (x, y, 0): eigenvalues of the
    /// weighted perturbed capacitance with the defect-born mode removed,
    /// sorted by real part, square-rooted.
    pub fn resonances_at(&self, p: [f64; 2]) -> Result<[Complex64; 3], SensingError> {
        let ct = self
            .solver
            .perturbed_capacitance([p[0], p[1], 0.0], self.defect_radius)?;
        let n = ct.nrows();
        let mut w = self.weights.clone();
        w.push(Complex64::new(self.defect_weight, 0.0));
        let weighted = DMatrix::from_fn(n, n, |i, j| w[i] * ct[(i, j)]);
        let values = spectral::eigenvalues(&weighted);
        // the defect contributes one mode near its isolated value; drop it
        let defect_ref = self.defect_weight * 4.0 * PI * self.defect_radius;
        let drop = (0..n)
            .min_by(|&i, &j| {
                let di = (values[i] - defect_ref).norm();
                let dj = (values[j] - defect_ref).norm();
                di.partial_cmp(&dj).unwrap()
            })
            .unwrap();
        let mut kept: Vec<Complex64> = values
            .into_iter()
            .enumerate()
            .filter(|&(i, _)| i != drop)
            .map(|(_, v)| v.sqrt())
            .collect();
        kept.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        Ok([kept[0], kept[1], kept[2]])
    }

    /// Squared misfit between measured and predicted resonances. The
    /// lowest resonance pairs by order; the upper two are matched as a
    /// set, so the misfit stays smooth where a gain/loss pair crosses.
    pub fn loss(measured: &[Complex64; 3], predicted: &[Complex64; 3]) -> f64 {
        let d = |a: Complex64, b: Complex64| (a - b).norm_sqr();
        let straight = d(measured[1], predicted[1]) + d(measured[2], predicted[2]);
        let crossed = d(measured[1], predicted[2]) + d(measured[2], predicted[1]);
        d(measured[0], predicted[0]) + straight.min(crossed)
    }

    pub fn loss_at(&self, measured: &[Complex64; 3], p: [f64; 2]) -> Result<f64, SensingError> {
        Ok(Self::loss(measured, &self.resonances_at(p)?))
    }

    /// Central-difference loss gradient; if a probe point is infeasible
    /// the stencil retries once at a tenth of the step before giving up.
    pub fn loss_gradient(
        &self,
        measured: &[Complex64; 3],
        p: [f64; 2],
        h: f64,
    ) -> Result<[f64; 2], SensingError> {
        for step in [h, h / 10.0] {
            let attempt = (|| -> Result<[f64; 2], SensingError> {
                let mut g = [0.0; 2];
                for axis in 0..2 {
                    let mut hi = p;
                    let mut lo = p;
                    hi[axis] += step;
                    lo[axis] -= step;
                    g[axis] = (self.loss_at(measured, hi)? - self.loss_at(measured, lo)?)
                        / (2.0 * step);
                }
                Ok(g)
            })();
            if let Ok(g) = attempt {
                return Ok(g);
            }
        }
        Err(SensingError::StencilFailed(p[0], p[1]))
    }
}

/// Step-size rule for the descent.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum StepRule {
    /// Step length (gain * loss / |grad|^2) |grad|, capped: the classic
    /// zero-target step for the root of the squared misfit. The default
    /// gain 2 makes it exact for the root of a quadratic valley.
    RootLoss { gain: f64, cap: f64 },
    /// Fixed step length along the unit gradient.
    Constant { length: f64 },
    /// Raw gradient scaling.
    Raw { rate: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DescentConfig {
    pub iterations: usize,
    /// Geometric per-iteration damping of the step rule.
    pub decay: f64,
    pub rule: StepRule,
    /// Finite-difference step for the gradient.
    pub h: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            iterations: 20,
            decay: 0.9,
            rule: StepRule::RootLoss {
                gain: 2.0,
                cap: 0.45,
            },
            h: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentTrace {
    /// Iterates including the start; the last entry is the estimate.
    pub points: Vec<[f64; 2]>,
    /// Loss at each iterate.
    pub losses: Vec<f64>,
}

impl DescentTrace {
    pub fn final_point(&self) -> [f64; 2] {
        *self.points.last().unwrap()
    }

    pub fn final_loss(&self) -> f64 {
        *self.losses.last().unwrap()
    }

    pub fn initial_loss(&self) -> f64 {
        self.losses[0]
    }
}

impl SensingModel {
    /// Steepest descent on the misfit in the z = 0 plane. The chain is
    /// mirror-symmetric about y = 0, so each iterate folds into the
    /// upper half-plane.
    pub fn descend(
        &self,
        measured: &[Complex64; 3],
        start: [f64; 2],
        cfg: &DescentConfig,
    ) -> Result<DescentTrace, SensingError> {
        let mut p = [start[0], start[1].abs()];
        let mut points = vec![p];
        let mut losses = vec![self.loss_at(measured, p)?];
        let mut damping = 1.0;
        for _ in 0..cfg.iterations {
            let l = *losses.last().unwrap();
            let g = self.loss_gradient(measured, p, cfg.h)?;
            let g_norm_sq = g[0] * g[0] + g[1] * g[1];
            if g_norm_sq == 0.0 {
                break;
            }
            let g_norm = g_norm_sq.sqrt();
            let length = damping
                * match cfg.rule {
                    StepRule::RootLoss { gain, cap } => {
                        (gain * l / g_norm_sq * g_norm).min(cap)
                    }
                    StepRule::Constant { length } => length,
                    StepRule::Raw { rate } => rate * g_norm,
                };
            p = [p[0] - length * g[0] / g_norm, (p[1] - length * g[1] / g_norm).abs()];
            points.push(p);
            losses.push(self.loss_at(measured, p)?);
            damping *= cfg.decay;
        }
        Ok(DescentTrace { points, losses })
    }

    /// Loss sampled on a rectangular grid of candidate positions; rows
    /// follow `ys`, columns `xs`.
    pub fn loss_map(
        &self,
        measured: &[Complex64; 3],
        xs: &[f64],
        ys: &[f64],
    ) -> Result<DMatrix<f64>, SensingError> {
        let mut out = DMatrix::zeros(ys.len(), xs.len());
        for (i, &y) in ys.iter().enumerate() {
            for (j, &x) in xs.iter().enumerate() {
                out[(i, j)] = self.loss_at(measured, [x, y])?;
            }
        }
        Ok(out)
    }
}

/// The 5 x 3 grid of descent starts covering [2.5, 3.5] x [0, 1].
pub fn standard_grid() -> Vec<[f64; 2]> {
    let mut grid = Vec::with_capacity(15);
    for i in 0..5 {
        for j in 0..3 {
            grid.push([2.5 + 0.25 * i as f64, 0.5 * j as f64]);
        }
    }
    grid
}

/// Multiplicative measurement noise: each resonance scaled by
/// (1 + eta_j) with eta_j uniform on [-epsilon, epsilon]. Draw `draw` of
/// seed `seed` is an independent, reproducible stream.
pub fn noisy_measurements(
    clean: &[Complex64; 3],
    epsilon: f64,
    seed: u64,
    draw: u64,
) -> [Complex64; 3] {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    let mut out = *clean;
    for omega in &mut out {
        let eta = epsilon * (2.0 * rng.gen::<f64>() - 1.0);
        *omega *= 1.0 + eta;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloConfig {
    pub draws: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub descent: DescentConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    /// Localization error of every (draw, start) run, draws outermost.
    pub errors: Vec<f64>,
    pub median: f64,
    pub quartile_low: f64,
    pub quartile_high: f64,
}

/// Localization errors under noisy measurements: for each draw, perturb
/// the clean measurement, descend from every grid start, and record the
/// distance of each final iterate to the true defect position.
pub fn monte_carlo(
    model: &SensingModel,
    truth: [f64; 2],
    grid: &[[f64; 2]],
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloSummary, SensingError> {
    let clean = model.resonances_at(truth)?;
    let mut errors = Vec::with_capacity(cfg.draws * grid.len());
    for draw in 0..cfg.draws {
        let measured = noisy_measurements(&clean, cfg.epsilon, cfg.seed, draw as u64);
        for &start in grid {
            let trace = model.descend(&measured, start, &cfg.descent)?;
            let f = trace.final_point();
            errors.push(((f[0] - truth[0]).powi(2) + (f[1] - truth[1]).powi(2)).sqrt());
        }
    }
    let mut sorted = errors.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(MonteCarloSummary {
        median: quantile(&sorted, 0.5),
        quartile_low: quantile(&sorted, 0.25),
        quartile_high: quantile(&sorted, 0.75),
        errors,
    })
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Clean measurement vector of a scene's truth defect, shared by the
/// experiment drivers.
pub fn clean_measurements(
    model: &SensingModel,
    truth: [f64; 2],
) -> Result<[Complex64; 3], SensingError> {
    model.resonances_at(truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Scene;

    fn model() -> SensingModel {
        let scene = Scene::chain(1.0 / 3.0, 1e-3);
        SensingModel::new(&scene, Resolution::new(3), 1e-2).unwrap()
    }

    #[test]
    fn loss_vanishes_only_at_the_truth() {
        let m = model();
        let truth = [3.0, 0.0];
        let clean = m.resonances_at(truth).unwrap();
        assert!(m.loss_at(&clean, truth).unwrap() < 1e-28);
        assert!(m.loss_at(&clean, [3.2, 0.3]).unwrap() > 1e-12);
    }

    #[test]
    fn loss_respects_the_mirror_symmetry() {
        let m = model();
        let clean = m.resonances_at([3.0, 0.0]).unwrap();
        let up = m.loss_at(&clean, [3.1, 0.4]).unwrap();
        let down = m.loss_at(&clean, [3.1, -0.4]).unwrap();
        assert!((up - down).abs() <= 1e-12 * up.max(1e-300));
    }

    #[test]
    fn set_matching_ignores_pair_order() {
        let a = [
            Complex64::new(0.1, 0.0),
            Complex64::new(0.2, 1e-3),
            Complex64::new(0.2, -1e-3),
        ];
        let swapped = [a[0], a[2], a[1]];
        assert!(SensingModel::loss(&a, &swapped) < 1e-30);
    }

    #[test]
    fn gradient_matches_a_coarse_secant_check() {
        let m = model();
        let clean = m.resonances_at([3.0, 0.0]).unwrap();
        let p = [3.15, 0.2];
        let g = m.loss_gradient(&clean, p, 1e-3).unwrap();
        let h = 1e-3;
        let lx_hi = m.loss_at(&clean, [p[0] + h, p[1]]).unwrap();
        let lx_lo = m.loss_at(&clean, [p[0] - h, p[1]]).unwrap();
        assert!((g[0] - (lx_hi - lx_lo) / (2.0 * h)).abs() < 1e-12 * g[0].abs().max(1e-12));
    }

    #[test]
    fn descent_from_near_truth_converges_to_truth() {
        let m = model();
        let truth = [3.0, 0.0];
        let clean = m.resonances_at(truth).unwrap();
        let trace = m
            .descend(&clean, [3.08, 0.0], &DescentConfig::default())
            .unwrap();
        let f = trace.final_point();
        let err = ((f[0] - truth[0]).powi(2) + (f[1] - truth[1]).powi(2)).sqrt();
        assert!(err < 1e-2, "final {:?}", f);
        assert!(trace.final_loss() <= 1e-3 * trace.initial_loss());
    }

    #[test]
    fn noise_draws_are_reproducible_and_bounded() {
        let clean = [
            Complex64::new(0.13, 0.0),
            Complex64::new(0.18, 1e-3),
            Complex64::new(0.21, -1e-3),
        ];
        let a = noisy_measurements(&clean, 1e-3, 42, 7);
        let again = noisy_measurements(&clean, 1e-3, 42, 7);
        for j in 0..3 {
            assert_eq!(a[j], again[j]);
            let rel = (a[j] / clean[j] - 1.0).norm();
            assert!(rel <= 1e-3 + 1e-12);
        }
        // different draws differ
        let c = noisy_measurements(&clean, 1e-3, 42, 8);
        assert!(a.iter().zip(&c).any(|(x, y)| x != y));
    }

    #[test]
    fn grid_has_fifteen_starts_spanning_the_window() {
        let g = standard_grid();
        assert_eq!(g.len(), 15);
        assert!(g.contains(&[2.5, 0.0]) && g.contains(&[3.5, 1.0]) && g.contains(&[3.0, 0.5]));
    }
}

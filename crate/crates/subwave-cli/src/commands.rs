//! Subcommand implementations. Each takes a validated scene plus its
//! resolved options, writes its data products into the output
//! directory, and returns the list of files written so the driver can
//! record them in the run manifest.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use subwave_core::bie::{self, AssemblyError, BoundaryOperator, Resolution};
use subwave_core::capacitance::{self, DefectSolver};
use subwave_core::geometry::{Scene, SceneError};
use subwave_core::scattering::{Expansion, ExpansionError};
use subwave_core::sensing::{self, DescentConfig, SensingError, SensingModel};
use subwave_core::spectral::{self, SpectralError};

use crate::output;

/// Detuning range scanned when a command asks for the tuned gain/loss
/// point of the three-chain.
pub const DETUNE_SCAN: (f64, f64) = (0.1, 0.5);
pub const DETUNE_SAMPLES: usize = 400;

/// Errors split by exit status: bad input or I/O is a usage error
/// (status 2), a computation that fails on valid input is a numerical
/// error (status 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Numerical(msg) => f.write_str(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ExpansionError> for CliError {
    fn from(e: ExpansionError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SensingError> for CliError {
    fn from(e: SensingError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Usage(format!("cannot read scene file {}: {e}", path.display()))
    })?;
    Scene::from_json(&text)
        .map_err(|e| CliError::Usage(format!("scene file {}: {e}", path.display())))
}

fn chain_bodies(scene: &Scene) -> Vec<([f64; 3], f64)> {
    scene
        .resonators
        .iter()
        .map(|r| (r.center, r.radius))
        .collect()
}

fn require_defect(scene: &Scene) -> Result<&subwave_core::geometry::Resonator, CliError> {
    scene
        .defect
        .as_ref()
        .ok_or_else(|| CliError::Usage("the scene has no defect body".to_string()))
}

fn require_three_chain(scene: &Scene) -> Result<(), CliError> {
    if scene.resonators.len() == 3 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "this command needs the three-resonator chain, got {} resonators",
            scene.resonators.len()
        )))
    }
}

/// Tune the gain/loss profile to the coalescence point and return the
/// detuned scene together with the parameter found.
fn maybe_detune(
    scene: &Scene,
    degree: usize,
    ep: bool,
) -> Result<(Scene, Option<f64>), CliError> {
    if !ep {
        return Ok((scene.clone(), None));
    }
    require_three_chain(scene)?;
    let c = capacitance::capacitance(&chain_bodies(scene), Resolution::new(degree))?;
    let cp = spectral::find_exceptional_point(&c, DETUNE_SCAN, DETUNE_SAMPLES)?;
    Ok((scene.clone().with_detuning(cp.t), Some(cp.t)))
}

/// Lattice "lo:hi:count"; a single axis of the sampling grids.
fn parse_axis(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Usage(format!("bad grid axis '{text}', expected lo:hi:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || n == 0 {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

pub fn parse_grid(text: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "bad grid '{text}', expected x0:x1:n,y0:y1:m"
        )));
    }
    Ok((parse_axis(parts[0])?, parse_axis(parts[1])?))
}

fn resolve_path(out: &Path, name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

/// Least-squares slope of ln y against ln x over the positive, finite
/// points; NaN when fewer than two survive.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

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

fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
}

// ---------------------------------------------------------------- capmat

#[derive(Debug, Serialize, Deserialize)]
pub struct CapmatOptions {
    pub dump_operator: Option<String>,
}

pub fn capmat(
    scene: &Scene,
    degree: usize,
    opts: &CapmatOptions,
    out: &Path,
) -> Result<Vec<String>, CliError> {
    let res = Resolution::new(degree);
    let chain = chain_bodies(scene);
    let labels: Vec<String> = (0..chain.len()).map(|i| format!("r{i}")).collect();
    let c = capacitance::capacitance(&chain, res)?;
    output::write_labeled_matrix(&out.join("capacitance.csv"), &labels, &c)?;
    let mut outputs = vec!["capacitance.csv".to_string()];

    if let Some(defect) = &scene.defect {
        let solver = DefectSolver::from_bodies(&chain, res)?;
        let ct = solver.perturbed_capacitance(defect.center, defect.radius)?;
        let mut full = labels.clone();
        full.push("defect".to_string());
        output::write_labeled_matrix(&out.join("capacitance_perturbed.csv"), &full, &ct)?;
        outputs.push("capacitance_perturbed.csv".to_string());
    }

    if let Some(name) = &opts.dump_operator {
        let s = bie::assemble(&capacitance::scene_bodies(scene), res);
        output::write_matrix(&resolve_path(out, name), &s)?;
        outputs.push(name.clone());
    }
    Ok(outputs)
}

// -------------------------------------------------------------- spectrum

#[derive(Debug, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub find_ep: bool,
}

#[derive(Serialize)]
struct EpReport {
    detuning: f64,
    gap: f64,
    value_re: f64,
    value_im: f64,
    alignment: f64,
}

pub fn spectrum(
    scene: &Scene,
    degree: usize,
    opts: &SpectrumOptions,
    out: &Path,
) -> Result<Vec<String>, CliError> {
    let res = Resolution::new(degree);
    let bodies = capacitance::scene_bodies(scene);
    let weights = capacitance::material_weights(scene);
    let c = capacitance::capacitance(&bodies, res)?;
    let w = capacitance::weighted(&c, &weights);
    let values = spectral::eigenvalues(&w);
    let aligns = spectral::alignments(&w, &values);

    let rows: Vec<Vec<String>> = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let omega = v.sqrt();
            vec![
                k.to_string(),
                output::fmt(v.re),
                output::fmt(v.im),
                output::fmt(omega.re),
                output::fmt(omega.im),
                output::fmt(aligns[k]),
            ]
        })
        .collect();
    output::write_csv(
        &out.join("spectrum.csv"),
        "index,eigenvalue_re,eigenvalue_im,resonance_re,resonance_im,alignment",
        &rows,
    )?;
    let mut outputs = vec!["spectrum.csv".to_string()];

    if opts.find_ep {
        require_three_chain(scene)?;
        let c3 = capacitance::capacitance(&chain_bodies(scene), res)?;
        let cp = spectral::find_exceptional_point(&c3, DETUNE_SCAN, DETUNE_SAMPLES)?;
        let tuned = scene.clone().with_detuning(cp.t);
        fs::write(out.join("ep_scene.json"), format!("{}\n", tuned.to_json()))?;
        output::write_json(
            &out.join("ep_report.json"),
            &EpReport {
                detuning: cp.t,
                gap: cp.gap,
                value_re: cp.value.re,
                value_im: cp.value.im,
                alignment: cp.alignment,
            },
        )?;
        outputs.push("ep_scene.json".to_string());
        outputs.push("ep_report.json".to_string());
    }
    Ok(outputs)
}

// ---------------------------------------------------------------- expand

#[derive(Debug, Serialize, Deserialize)]
pub struct ExpandOptions {
    pub order: usize,
    pub report_truncation: Option<usize>,
}

pub fn expand(
    scene: &Scene,
    degree: usize,
    opts: &ExpandOptions,
    out: &Path,
) -> Result<Vec<String>, CliError> {
    let defect = require_defect(scene)?;
    let res = Resolution::new(degree);
    let op = BoundaryOperator::new(&chain_bodies(scene), res)?;
    let exp = Expansion::new(&op, defect.center, defect.radius)?;
    exp.check_convergent()?;

    let mut rows = Vec::new();
    for n in 0..=opts.order {
        if n % 2 == 0 {
            let k = n / 2;
            rows.push(vec![
                n.to_string(),
                "chain".to_string(),
                output::fmt(exp.chain_term(k).norm()),
            ]);
            rows.push(vec![
                n.to_string(),
                "defect".to_string(),
                output::fmt(exp.defect_term(k).abs()),
            ]);
        } else {
            let k = (n - 1) / 2;
            rows.push(vec![
                n.to_string(),
                "mixed".to_string(),
                output::fmt(exp.mixed_term(k).norm()),
            ]);
        }
    }
    output::write_csv(&out.join("orders.csv"), "order,family,frobenius_norm", &rows)?;

    let e = exp.leading_corrections();
    let mut labels: Vec<String> = (0..scene.resonators.len())
        .map(|i| format!("r{i}"))
        .collect();
    labels.push("defect".to_string());
    output::write_labeled_matrix(&out.join("corrections.csv"), &labels, &e)?;
    let mut outputs = vec!["orders.csv".to_string(), "corrections.csv".to_string()];

    if let Some(kmax) = opts.report_truncation {
        if kmax == 0 {
            return Err(CliError::Usage(
                "--report-truncation needs at least one level".to_string(),
            ));
        }
        let ks: Vec<usize> = (1..=kmax).collect();
        let report = exp.truncation_report(&ks)?;
        output::write_json(&out.join("truncation.json"), &report)?;
        outputs.push("truncation.json".to_string());
    }
    Ok(outputs)
}

// ----------------------------------------------------------------- sweep

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    pub radii: Vec<f64>,
    pub ep: bool,
}

#[derive(Serialize)]
struct SweepSlopes {
    radii: Vec<f64>,
    direct: Vec<f64>,
    predicted: Vec<f64>,
    detuning: Option<f64>,
}

fn closest_pair(values: &[Complex64]) -> (usize, usize, Complex64) {
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let d = (values[i] - values[j]).norm();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    (
        best.0,
        best.1,
        (values[best.0] + values[best.1]) / 2.0,
    )
}

pub fn sweep(
    scene: &Scene,
    degree: usize,
    opts: &SweepOptions,
    out: &Path,
) -> Result<Vec<String>, CliError> {
    let defect = require_defect(scene)?;
    if opts.radii.is_empty() {
        return Err(CliError::Usage("the radius grid is empty".to_string()));
    }
    for &r in &opts.radii {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::Usage(format!("bad defect radius {r}")));
        }
    }
    let (working, detuning) = maybe_detune(scene, degree, opts.ep)?;
    let res = Resolution::new(degree);
    let chain = chain_bodies(&working);
    let n = chain.len();
    let weights: Vec<Complex64> = working.resonators.iter().map(|b| b.weight()).collect();
    let w_def = defect.weight();
    let solver = DefectSolver::from_bodies(&chain, res)?;
    let w_chain = capacitance::weighted(&solver.base_capacitance, &weights);
    let base_omega = capacitance::resonances(&w_chain);

    // At the tuned point the usual eigenbasis route breaks down: the
    // coalesced pair gets its generalized chain, the bystander mode its
    // own singular-pair update.
    let ep_data = if opts.ep {
        let values = spectral::eigenvalues(&w_chain);
        let (i, j, mean) = closest_pair(&values);
        let lone = (0..values.len()).find(|k| *k != i && *k != j).unwrap();
        let chain_pair = spectral::jordan_chain(&w_chain, mean, 2)?;
        Some((chain_pair, values[lone]))
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut direct_cols = vec![Vec::new(); n];
    let mut predicted_cols = vec![Vec::new(); n];
    for &r in &opts.radii {
        let lam_def = w_def * 4.0 * std::f64::consts::PI * r;
        let mut full_weights = weights.clone();
        full_weights.push(w_def);

        let ct = solver.perturbed_capacitance(defect.center, r)?;
        let wt = capacitance::weighted(&ct, &full_weights);
        let values = spectral::eigenvalues(&wt);
        let defect_idx = (0..values.len())
            .min_by(|&a, &b| {
                let da = (values[a] - lam_def).norm();
                let db = (values[b] - lam_def).norm();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let mut omega: Vec<Complex64> = values
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != defect_idx)
            .map(|(_, v)| v.sqrt())
            .collect();
        sort_complex(&mut omega);

        let exp = Expansion::new(&solver.op, defect.center, r)?;
        let e_geom = exp.leading_corrections();
        let e_w = DMatrix::from_fn(n + 1, n + 1, |i, j| full_weights[i] * e_geom[(i, j)]);
        let mut a0 = DMatrix::<Complex64>::zeros(n + 1, n + 1);
        a0.view_mut((0, 0), (n, n)).copy_from(&w_chain);
        a0[(n, n)] = lam_def;

        let mut predicted: Vec<Complex64> = match &ep_data {
            None => {
                let sys = spectral::eigen(&a0)?;
                let d0 = (0..sys.values.len())
                    .min_by(|&a, &b| {
                        let da = (sys.values[a] - lam_def).norm();
                        let db = (sys.values[b] - lam_def).norm();
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                (0..sys.values.len())
                    .filter(|k| *k != d0)
                    .map(|k| spectral::simple_perturbation(&sys, k, &e_w))
                    .collect::<Result<Vec<_>, _>>()?
            }
            Some((chain_pair, lone_value)) => {
                let mut v = spectral::ep_perturbation(chain_pair, &e_w);
                v.push(spectral::isolated_mode_perturbation(&a0, *lone_value, &e_w)?);
                v
            }
        };
        sort_complex(&mut predicted);

        let mut row = vec![output::fmt(r)];
        for k in 0..n {
            let shift = (omega[k] - base_omega[k]).norm();
            direct_cols[k].push(shift);
            row.push(output::fmt(shift));
        }
        for k in 0..n {
            let shift = (predicted[k] - base_omega[k]).norm();
            predicted_cols[k].push(shift);
            row.push(output::fmt(shift));
        }
        rows.push(row);
    }

    let mut header = "radius".to_string();
    for k in 1..=n {
        header.push_str(&format!(",shift_{k}"));
    }
    for k in 1..=n {
        header.push_str(&format!(",predicted_{k}"));
    }
    output::write_csv(&out.join("sweep.csv"), &header, &rows)?;

    let slopes = SweepSlopes {
        direct: direct_cols
            .iter()
            .map(|c| log_slope(&opts.radii, c))
            .collect(),
        predicted: predicted_cols
            .iter()
            .map(|c| log_slope(&opts.radii, c))
            .collect(),
        radii: opts.radii.clone(),
        detuning,
    };
    output::write_json(&out.join("slopes.json"), &slopes)?;
    Ok(vec!["sweep.csv".to_string(), "slopes.json".to_string()])
}

// -------------------------------------------------------------- loss-map

#[derive(Debug, Serialize, Deserialize)]
pub struct LossMapOptions {
    pub grid: String,
    pub ep: bool,
}

#[derive(Serialize)]
struct LossMapSummary {
    nx: usize,
    ny: usize,
    min_log10_loss: Option<f64>,
    min_x: Option<f64>,
    min_y: Option<f64>,
    nonfinite_cells: usize,
    failed_cells: usize,
    detuning: Option<f64>,
}

fn plane_truth(defect: &subwave_core::geometry::Resonator) -> Result<[f64; 2], CliError> {
    if defect.center[2] != 0.0 {
        return Err(CliError::Usage(
            "the sensing plane is z = 0; move the defect into it".to_string(),
        ));
    }
    Ok([defect.center[0], defect.center[1]])
}

pub fn loss_map(
    scene: &Scene,
    degree: usize,
    opts: &LossMapOptions,
    out: &Path,
) -> Result<Vec<String>, CliError> {
    let defect = require_defect(scene)?;
    require_three_chain(scene)?;
    let truth = plane_truth(defect)?;
    let (xs, ys) = parse_grid(&opts.grid)?;
    let (working, detuning) = maybe_detune(scene, degree, opts.ep)?;
    let model = SensingModel::new(&working, Resolution::new(degree), defect.radius)?;
    let measured = model.resonances_at(truth)?;

    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    let mut nonfinite = 0usize;
    let mut failed = 0usize;
    let mut best: Option<(f64, f64, f64)> = None;
    for &y in &ys {
        for &x in &xs {
            match model.loss_at(&measured, [x, y]) {
                Ok(l) => {
                    let v = l.log10();
                    if v.is_finite() {
                        if best.map_or(true, |b| v < b.0) {
                            best = Some((v, x, y));
                        }
                    } else {
                        nonfinite += 1;
                    }
                    rows.push(vec![output::fmt(x), output::fmt(y), output::fmt(v)]);
                }
                Err(_) => {
                    failed += 1;
                    nonfinite += 1;
                    rows.push(vec![
                        output::fmt(x),
                        output::fmt(y),
                        "NaN".to_string(),
                    ]);
                }
            }
        }
    }
    output::write_csv(&out.join("loss_map.csv"), "x,y,log10_loss", &rows)?;
    output::write_json(
        &out.join("loss_map_summary.json"),
        &LossMapSummary {
            nx: xs.len(),
            ny: ys.len(),
            min_log10_loss: best.map(|b| b.0),
            min_x: best.map(|b| b.1),
            min_y: best.map(|b| b.2),
            nonfinite_cells: nonfinite,
            failed_cells: failed,
            detuning,
        },
    )?;
    Ok(vec![
        "loss_map.csv".to_string(),
        "loss_map_summary.json".to_string(),
    ])
}

// ----------------------------------------------------------------- sense

#[derive(Debug, Serialize, Deserialize)]
pub struct SenseOptions {
    pub grid: String,
    pub noise: f64,
    pub draws: usize,
    pub ep: bool,
}

#[derive(Serialize)]
struct SenseSummary {
    draws: usize,
    starts: usize,
    runs: usize,
    failures: usize,
    noise: f64,
    seed: u64,
    truth: [f64; 2],
    median_error: Option<f64>,
    quartile_low: Option<f64>,
    quartile_high: Option<f64>,
    detuning: Option<f64>,
    descent: DescentConfig,
}

pub fn sense(
    scene: &Scene,
    degree: usize,
    seed: u64,
    opts: &SenseOptions,
    out: &Path,
) -> Result<Vec<String>, CliError> {
    let defect = require_defect(scene)?;
    require_three_chain(scene)?;
    if !(opts.noise.is_finite() && opts.noise >= 0.0) {
        return Err(CliError::Usage(format!("bad noise level {}", opts.noise)));
    }
    if opts.draws == 0 {
        return Err(CliError::Usage("need at least one draw".to_string()));
    }
    let truth = plane_truth(defect)?;
    let (xs, ys) = parse_grid(&opts.grid)?;
    let starts: Vec<[f64; 2]> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
        .collect();
    let (working, detuning) = maybe_detune(scene, degree, opts.ep)?;
    let model = SensingModel::new(&working, Resolution::new(degree), defect.radius)?;
    let clean = model.resonances_at(truth)?;
    let cfg = DescentConfig::default();

    let mut draw_rows = Vec::with_capacity(opts.draws * starts.len());
    let mut trace_rows = Vec::new();
    let mut errors = Vec::new();
    let mut failures = 0usize;
    for draw in 0..opts.draws {
        let measured = sensing::noisy_measurements(&clean, opts.noise, seed, draw as u64);
        for &start in &starts {
            match model.descend(&measured, start, &cfg) {
                Ok(trace) => {
                    let f = trace.final_point();
                    let err =
                        ((f[0] - truth[0]).powi(2) + (f[1] - truth[1]).powi(2)).sqrt();
                    errors.push(err);
                    draw_rows.push(vec![
                        draw.to_string(),
                        output::fmt(start[0]),
                        output::fmt(start[1]),
                        output::fmt(f[0]),
                        output::fmt(f[1]),
                        output::fmt(trace.initial_loss()),
                        output::fmt(trace.final_loss()),
                        output::fmt(err),
                    ]);
                    for (step, (p, l)) in
                        trace.points.iter().zip(&trace.losses).enumerate()
                    {
                        trace_rows.push(vec![
                            draw.to_string(),
                            output::fmt(start[0]),
                            output::fmt(start[1]),
                            step.to_string(),
                            output::fmt(p[0]),
                            output::fmt(p[1]),
                            output::fmt(*l),
                        ]);
                    }
                }
                Err(_) => {
                    failures += 1;
                    draw_rows.push(vec![
                        draw.to_string(),
                        output::fmt(start[0]),
                        output::fmt(start[1]),
                        "NaN".to_string(),
                        "NaN".to_string(),
                        "NaN".to_string(),
                        "NaN".to_string(),
                        "NaN".to_string(),
                    ]);
                }
            }
        }
    }
    output::write_csv(
        &out.join("draws.csv"),
        "draw,start_x,start_y,final_x,final_y,initial_loss,final_loss,error",
        &draw_rows,
    )?;
    output::write_csv(
        &out.join("traces.csv"),
        "draw,start_x,start_y,step,x,y,loss",
        &trace_rows,
    )?;

    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stat = |q: f64| {
        if errors.is_empty() {
            None
        } else {
            Some(quantile(&errors, q))
        }
    };
    output::write_json(
        &out.join("sense_summary.json"),
        &SenseSummary {
            draws: opts.draws,
            starts: starts.len(),
            runs: opts.draws * starts.len(),
            failures,
            noise: opts.noise,
            seed,
            truth,
            median_error: stat(0.5),
            quartile_low: stat(0.25),
            quartile_high: stat(0.75),
            detuning,
            descent: cfg,
        },
    )?;
    Ok(vec![
        "draws.csv".to_string(),
        "traces.csv".to_string(),
        "sense_summary.json".to_string(),
    ])
}

//! Stationary-phase pairings and pointwise identification of potential differences.
//!
//! For CGO solutions `u₁ = e^{Φ/h}(a + …)` and `u₂ = e^{−Φ/h}(a + …)` the product
//! `u₁ū₂` carries the oscillation `e^{2iψ/h}`, `ψ = Im Φ`. Pairing it against
//! `W = V₁ − V₂` gives
//!
//! ```text
//! I(h) = ∫ e^{2iψ/h} |a|² W e^{2σ} dA = C h W(p) + o(h),   C = π |a(p)|² e^{2σ(p)} / |Φ″(p)|,
//! ```
//!
//! so `W(p)` is read off from `I(h)/(C h)` as `h → 0`. All pairings here are
//! reported relative to the critical value, i.e. multiplied by `e^{−2iψ(p)/h}`.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cgo::{assemble_with_phase, build_b, build_r12_global, CgoConfig};
use crate::error::{Error, Result};
use crate::fieldops::{Field, Grid, TAPER_FLAT_FRACTION};
use crate::geometry::{RationalFunction, SurfaceModel};
use crate::phase::{construct_amplitude, construct_phase, MorsePhase};
use crate::potentials::Potential;
use crate::scattering::{extract_s_matrix, scattering_difference_identity, ModeVector};

/// Largest number of quadrature samples per axis.
pub const MAX_QUADRATURE_SAMPLES: usize = 20_000;
/// Relative oracle-vs-formula disagreement above which a constant is flagged.
pub const CONSTANT_TOLERANCE: f64 = 1e-2;

/// Square `[c − L, c + L]²` on which an oscillatory integrand is summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureWindow {
    pub center: Complex64,
    pub half_width: f64,
}

fn phase_factor(phase: &MorsePhase, z: Complex64, h: f64) -> Option<Complex64> {
    let psi0 = phase.value(phase.base_point())?.im;
    let psi = phase.value(z)?.im;
    Some(Complex64::from_polar(1.0, 2.0 * (psi - psi0) / h))
}

/// `∫ e^{2i(ψ − ψ(p))/h} g dA` over `window` by the trapezoid rule, with the spacing
/// chosen so that `points_per_wavelength` samples cover the shortest local wavelength
/// where `g` is not negligible. `g` must be negligible on the window boundary.
pub fn oscillatory_integral<G>(g: G, phase: &MorsePhase, h: f64, window: QuadratureWindow, points_per_wavelength: f64) -> Result<Complex64>
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    if !(h > 0.0 && window.half_width > 0.0 && points_per_wavelength > 1.0) {
        return Err(Error::invalid("oscillatory integral needs h > 0, a window and > 1 point per wavelength"));
    }
    const PROBE: usize = 129;
    let probe_spacing = 2.0 * window.half_width / (PROBE - 1) as f64;
    let at = |i: usize, k: usize, d: f64| {
        window.center + Complex64::new(-window.half_width + i as f64 * d, -window.half_width + k as f64 * d)
    };
    let envelope: Vec<(Complex64, f64)> =
        (0..PROBE * PROBE).map(|idx| at(idx / PROBE, idx % PROBE, probe_spacing)).map(|z| (z, g(z).norm())).collect();
    let peak = envelope.iter().fold(0.0_f64, |m, (_, v)| m.max(*v));
    if peak == 0.0 {
        return Ok(Complex64::default());
    }
    let mut dmax = 0.0_f64;
    for &(z, v) in &envelope {
        if v > 1e-12 * peak {
            // Pad by one probe cell so that the maximum between probes is covered.
            for dz in [Complex64::new(0.0, 0.0), Complex64::new(probe_spacing, probe_spacing)] {
                if let Some(d) = phase.derivative(z + dz) {
                    dmax = dmax.max(d.norm());
                }
            }
        }
    }
    // Envelope bandwidth: a few oscillations per probe cell at least.
    let k = (2.0 * dmax / h).max(4.0 * TAU / probe_spacing);
    let spacing = TAU / (points_per_wavelength * k);
    let n = (2.0 * window.half_width / spacing).ceil() as usize + 1;
    if n > MAX_QUADRATURE_SAMPLES {
        return Err(Error::precondition(format!("h = {h} needs {n} quadrature samples per axis")));
    }
    let d = 2.0 * window.half_width / (n - 1) as f64;
    let row = |i: usize| -> Complex64 {
        let wi = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut acc = Complex64::default();
        for k in 0..n {
            let z = at(i, k, d);
            let value = g(z);
            if value == Complex64::default() {
                continue;
            }
            if let Some(osc) = phase_factor(phase, z, h) {
                let wk = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                acc += value * osc * wk;
            }
        }
        acc * wi
    };
    let rows: Vec<Complex64> = (0..n).into_par_iter().map(row).collect();
    let total: Complex64 = rows.iter().sum();
    Ok(total * d * d)
}

/// `I(h) = ∫ e^{2i(ψ − ψ(p))/h} |a|² W e^{2σ} dA` by the trapezoid rule on `W`'s grid.
pub fn stationary_phase_pairing(w: &Field, phase: &MorsePhase, a: &RationalFunction, h: f64, model: &SurfaceModel) -> Complex64 {
    let grid = w.grid();
    w.values()
        .par_iter()
        .enumerate()
        .map(|(idx, &wv)| {
            let z = grid.point_at(idx);
            match (a.eval(z), phase_factor(phase, z, h)) {
                (Some(av), Some(osc)) => {
                    wv * av.norm_sqr() * (2.0 * model.sigma(z)).exp() * osc * grid.quadrature_weight(idx)
                }
                _ => Complex64::default(),
            }
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// Closed-form saddle constant `π |a(p)|² e^{2σ(p)} / |Φ″(p)|`.
pub fn saddle_constant(phase: &MorsePhase, a: &RationalFunction, model: &SurfaceModel) -> Result<f64> {
    let p = phase.base_point();
    let ap = a.eval(p).ok_or_else(|| Error::precondition("amplitude has a pole at the critical point"))?;
    let hess = phase.hessian_at_base().norm();
    if hess == 0.0 {
        return Err(Error::precondition("degenerate critical point"));
    }
    Ok(PI * ap.norm_sqr() * (2.0 * model.sigma(p)).exp() / hess)
}

/// Value at `h = 0` of the polynomial through `(h_k, y_k)` (Neville's scheme),
/// with the change between the last two extrapolation levels.
pub fn richardson(h: &[f64], y: &[Complex64]) -> Result<(Complex64, f64)> {
    if h.len() != y.len() || h.is_empty() {
        return Err(Error::invalid("extrapolation needs matching, non-empty samples"));
    }
    let n = h.len();
    let mut table = y.to_vec();
    let mut previous = table[n - 1];
    for level in 1..n {
        previous = table[n - 1];
        for i in (level..n).rev() {
            let (hi, hj) = (h[i], h[i - level]);
            table[i] = (hj * table[i] - hi * table[i - 1]) / (hj - hi);
        }
    }
    let best = table[n - 1];
    Ok((best, (best - previous).norm()))
}

/// Stationary-phase constant: saddle formula and brute-force oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPhaseConstant {
    pub saddle: f64,
    pub oracle: Complex64,
    pub h_values: Vec<f64>,
    /// `I(h)/(h G(p))` for the reference Gaussian `G`.
    pub oracle_ratios: Vec<Complex64>,
    pub relative_difference: f64,
    /// `relative_difference ≤ 1%`.
    pub agrees: bool,
}

/// Distance from `p` to the nearest other critical point or finite puncture, capped at 1.
fn clearance(phase: &MorsePhase, model: &SurfaceModel) -> f64 {
    let p = phase.base_point();
    phase
        .other_critical_points()
        .iter()
        .map(|q| (q - p).norm())
        .fold(model.distance_to_punctures(p), f64::min)
        .min(1.0)
}

/// Oracle: pair `|a|² G e^{2σ}` for a Gaussian `G` centred at `p`, extrapolate
/// `I(h)/(h G(p))` to `h = 0` and compare with [`saddle_constant`].
pub fn stationary_phase_constant(phase: &MorsePhase, a: &RationalFunction, model: &SurfaceModel) -> Result<StationaryPhaseConstant> {
    let saddle = saddle_constant(phase, a, model)?;
    let p = phase.base_point();
    let width = 0.12 * clearance(phase, model);
    let window = QuadratureWindow { center: p, half_width: 5.8 * width };
    let h_values: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|s| s * width * width).collect();
    let envelope = |z: Complex64| -> Complex64 {
        let g = (-(z - p).norm_sqr() / (width * width)).exp();
        match a.eval(z) {
            Some(av) => Complex64::new(av.norm_sqr() * g * (2.0 * model.sigma(z)).exp(), 0.0),
            None => Complex64::default(),
        }
    };
    let oracle_ratios = h_values
        .iter()
        .map(|&h| oscillatory_integral(envelope, phase, h, window, 2.0).map(|i| i / h))
        .collect::<Result<Vec<_>>>()?;
    let (oracle, _) = richardson(&h_values, &oracle_ratios)?;
    let relative_difference = (oracle - saddle).norm() / saddle;
    Ok(StationaryPhaseConstant {
        saddle,
        oracle,
        h_values,
        oracle_ratios,
        relative_difference,
        agrees: relative_difference <= CONSTANT_TOLERANCE,
    })
}

#[derive(Debug, Clone)]
pub struct IdentifyOptions {
    /// Energy used to build the `r̃₁₂` cross terms.
    pub lambda: f64,
    pub vanishing_order: usize,
    pub seed: u64,
    pub points_per_wavelength: f64,
    /// Replace the constructed amplitude.
    pub amplitude: Option<RationalFunction>,
    pub cross_terms: bool,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        Self { lambda: 1.0, vanishing_order: 3, seed: 0, points_per_wavelength: 2.0, amplitude: None, cross_terms: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationReport {
    pub p: Complex64,
    pub h_values: Vec<f64>,
    pub pairings: Vec<Complex64>,
    pub constant: Complex64,
    /// `I(h)/(C h)`.
    pub ratios: Vec<Complex64>,
    pub estimate: Complex64,
    pub extrapolation_spread: f64,
    pub truth: Complex64,
    /// `|estimate − truth| / |truth|`, or the absolute error when `truth = 0`.
    pub relative_error: f64,
    /// `h ∫ e^{2iψ/h}(ā r̃₁₂¹ + a conj(r̃₁₂²)) W e^{2σ}` per `h`; empty when not requested.
    pub cross_terms: Vec<Complex64>,
}

impl IdentificationReport {
    /// Log-log slope of `|I(h)|` against `h`.
    pub fn main_slope(&self) -> f64 {
        loglog_slope(&self.h_values, &self.pairings.iter().map(|c| c.norm()).collect::<Vec<_>>())
    }

    /// Log-log slope of the cross terms, `NaN` when absent.
    pub fn cross_slope(&self) -> f64 {
        if self.cross_terms.is_empty() {
            return f64::NAN;
        }
        loglog_slope(&self.h_values, &self.cross_terms.iter().map(|c| c.norm()).collect::<Vec<_>>())
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn difference<'a>(v1: &'a Potential, v2: &'a Potential, model: &SurfaceModel) -> impl Fn(Complex64) -> f64 + Sync + 'a {
    let model = model.clone();
    move |z| {
        let m = model.puncture_mask(z);
        if m == 0.0 {
            0.0
        } else {
            m * (v1.eval(z) - v2.eval(z))
        }
    }
}

/// Nearest point to `p` at which a Morse phase of class `j` can be built.
pub fn snap_probe(p: Complex64, model: &SurfaceModel, j: u8, seed: u64) -> Result<(Complex64, MorsePhase)> {
    let mut last = None;
    for ring in 0..6 {
        let r = if ring == 0 { 0.0 } else { 1e-3 * 2f64.powi(ring - 1) };
        let count = if ring == 0 { 1 } else { 8 };
        for k in 0..count {
            let q = p + Complex64::from_polar(r, TAU * k as f64 / 8.0);
            match construct_phase(q, model, j, seed) {
                Ok(phase) => return Ok((q, phase)),
                Err(e) => last = Some(e),
            }
        }
    }
    Err(last.unwrap_or_else(|| Error::PhaseConstruction("no constructible point near probe".into())))
}

/// Estimate `(V₁ − V₂)(p)` by extrapolating `I(h)/(C h)` over `h_values`.
pub fn pointwise_difference(
    v1: &Potential,
    v2: &Potential,
    p: Complex64,
    model: &SurfaceModel,
    j: u8,
    h_values: &[f64],
    opts: &IdentifyOptions,
) -> Result<IdentificationReport> {
    if h_values.len() < 2 || h_values.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::invalid("need at least two positive h values"));
    }
    let (p, phase) = snap_probe(p, model, j, opts.seed)?;
    let a = match &opts.amplitude {
        Some(a) => a.clone(),
        None => construct_amplitude(p, &phase.other_critical_points(), opts.vanishing_order)?,
    };
    let constant = saddle_constant(&phase, &a, model)?;
    let w = difference(v1, v2, model);
    let reach = v1.effective_radius().max(v2.effective_radius());
    let truth = Complex64::new(w(p), 0.0);
    let mut report = IdentificationReport {
        p,
        h_values: h_values.to_vec(),
        pairings: vec![Complex64::default(); h_values.len()],
        constant: Complex64::new(constant, 0.0),
        ratios: vec![Complex64::default(); h_values.len()],
        estimate: Complex64::default(),
        extrapolation_spread: 0.0,
        truth,
        relative_error: truth.norm(),
        cross_terms: Vec::new(),
    };
    if reach == 0.0 {
        return Ok(report);
    }
    let window = QuadratureWindow { center: Complex64::default(), half_width: reach };
    let weight = |z: Complex64| -> f64 { (2.0 * model.sigma(z)).exp() };
    for (k, &h) in h_values.iter().enumerate() {
        let main = |z: Complex64| match a.eval(z) {
            Some(av) => Complex64::new(av.norm_sqr() * w(z) * weight(z), 0.0),
            None => Complex64::default(),
        };
        report.pairings[k] = oscillatory_integral(main, &phase, h, window, opts.points_per_wavelength)?;
        report.ratios[k] = report.pairings[k] / (constant * h);
    }
    let (estimate, spread) = richardson(h_values, &report.ratios)?;
    if !estimate.re.is_finite() || !estimate.im.is_finite() {
        return Err(Error::NonConvergence { what: "extrapolation of I(h)/(Ch)".into(), residual: spread });
    }
    report.estimate = estimate;
    report.extrapolation_spread = spread;
    report.relative_error = if truth.norm() > 0.0 { (estimate - truth).norm() / truth.norm() } else { estimate.norm() };

    if opts.cross_terms {
        report.cross_terms = cross_terms(v1, v2, &phase, &a, model, h_values, window, opts)?;
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cross_terms(
    v1: &Potential,
    v2: &Potential,
    phase: &MorsePhase,
    a: &RationalFunction,
    model: &SurfaceModel,
    h_values: &[f64],
    window: QuadratureWindow,
    opts: &IdentifyOptions,
) -> Result<Vec<Complex64>> {
    let half = (window.half_width + phase.base_point().norm()) / TAPER_FLAT_FRACTION * 1.05;
    let grid = Grid::new(256, half)?;
    let negated = phase.negated();
    let quotient = |v: &Potential, ph: &MorsePhase| -> Result<Field> {
        let sampled = v.sample(grid, model).map(|z, x| x * (2.0 * model.sigma(z)).exp());
        let (b, _) = build_b(a, &sampled, opts.lambda, ph)?;
        build_r12_global(&b, ph)
    };
    let q1 = quotient(v1, phase)?;
    let q2 = quotient(v2, &negated)?;
    let w = difference(v1, v2, model);
    h_values
        .iter()
        .map(|&h| {
            let g = |z: Complex64| match a.eval(z) {
                Some(av) => {
                    let mixed = av.conj() * q1.interpolate(z) + av * q2.interpolate(z).conj();
                    mixed * (w(z) * (2.0 * model.sigma(z)).exp())
                }
                None => Complex64::default(),
            };
            oscillatory_integral(g, phase, h, window, opts.points_per_wavelength).map(|i| i * h)
        })
        .collect()
}

/// Writes `px,py,re_est,im_est,truth,rel_err`.
pub fn write_probe_csv<W: Write>(reports: &[IdentificationReport], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["px", "py", "re_est", "im_est", "truth", "rel_err"])?;
    for r in reports {
        wtr.write_record([
            format!("{:.12e}", r.p.re),
            format!("{:.12e}", r.p.im),
            format!("{:.12e}", r.estimate.re),
            format!("{:.12e}", r.estimate.im),
            format!("{:.12e}", r.truth.re),
            format!("{:.12e}", r.relative_error),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Work budget of [`uniqueness_chain`].
#[derive(Debug, Clone)]
pub struct ChainBudget {
    pub scattering_grid: Grid,
    pub m_max: usize,
    pub match_radius: f64,
    /// `h` schedule of the stationary-phase probes.
    pub probe_h: Vec<f64>,
    /// `h` schedule of the assembled CGO pairings (at the first probe).
    pub cgo_h: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CgoPairing {
    pub h: f64,
    /// `∫ W u₁ ū₂ e^{−2iψ(p)/h} dA` for assembled CGO solutions.
    pub pairing: Complex64,
    /// `C h W(p)`.
    pub prediction: Complex64,
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// `max |S₁ − S₂|` over entries.
    pub s_difference: f64,
    pub unitarity_defects: (f64, f64),
    /// Volume and boundary sides for `f₁ = f₂ = e₀`.
    pub identity: (Complex64, Complex64),
    pub cgo_pairings: Vec<CgoPairing>,
    pub probes: Vec<IdentificationReport>,
}

impl UniquenessReport {
    pub fn max_probe_error(&self) -> f64 {
        self.probes.iter().map(|r| r.relative_error).fold(0.0, f64::max)
    }
}

/// End-to-end chain on the plane: scattering matrices, the difference identity,
/// CGO pairings and the probe map of `(V₁ − V₂)(p)`.
pub fn uniqueness_chain(
    v1: &Potential,
    v2: &Potential,
    lambda: f64,
    probes: &[Complex64],
    budget: &ChainBudget,
) -> Result<UniquenessReport> {
    let model = SurfaceModel::plane();
    if !(lambda > 0.0) {
        return Err(Error::invalid("uniqueness chain needs λ > 0"));
    }
    if probes.is_empty() {
        return Err(Error::invalid("no probe points"));
    }
    let grid = budget.scattering_grid;
    let f1 = v1.sample(grid, &model);
    let f2 = v2.sample(grid, &model);
    let s1 = extract_s_matrix(&f1, lambda, budget.m_max, budget.match_radius)?;
    let s2 = extract_s_matrix(&f2, lambda, budget.m_max, budget.match_radius)?;
    let m = budget.m_max as i64;
    let mut s_difference = 0.0_f64;
    for mo in -m..=m {
        for mi in -m..=m {
            s_difference = s_difference.max((s1.entry(mo, mi) - s2.entry(mo, mi)).norm());
        }
    }
    let e0 = ModeVector::unit(budget.m_max, 0);
    let identity = scattering_difference_identity(&f1, &f2, lambda, &e0, &e0)?;

    let opts = IdentifyOptions { lambda, cross_terms: false, ..IdentifyOptions::default() };
    let reports = probes
        .iter()
        .map(|&p| pointwise_difference(v1, v2, p, &model, 2, &budget.probe_h, &opts))
        .collect::<Result<Vec<_>>>()?;

    let p0 = reports[0].p;
    let w = difference(v1, v2, &model);
    let mut cgo_pairings = Vec::with_capacity(budget.cgo_h.len());
    for &h in &budget.cgo_h {
        let cfg = CgoConfig::new(p0, lambda, h);
        let phase = construct_phase(p0, &model, 2, cfg.seed)?;
        let u1 = assemble_with_phase(&model, v1, &phase, &cfg)?;
        let u2 = assemble_with_phase(&model, v2, &phase.negated(), &cfg)?;
        let g = u1.grid();
        let (t1, t2) = (u1.amplitude_total(), u2.amplitude_total());
        let pairing: Complex64 = (0..g.len())
            .map(|i| {
                let z = g.point_at(i);
                match phase_factor(&phase, z, h) {
                    Some(osc) => t1.values()[i] * t2.values()[i].conj() * w(z) * osc * g.quadrature_weight(i),
                    None => Complex64::default(),
                }
            })
            .sum();
        let prediction = reports[0].constant * h * w(p0);
        cgo_pairings.push(CgoPairing { h, pairing, prediction });
    }
    Ok(UniquenessReport {
        s_difference,
        unitarity_defects: (s1.unitarity_defect(), s2.unitarity_defect()),
        identity,
        cgo_pairings,
        probes: reports,
    })
}

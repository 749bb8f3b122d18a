//! Phase labels, analytic critical lines, the interaction susceptibility,
//! and numerical detection of transitions along one-parameter paths.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::meanfield::{ground_state, MeanFieldSolution};
use crate::model::{linspace, ModelParams, ParamAxis};

/// Default tolerance for [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    Normal,
    Superradiant,
    Mott,
    Superfluid,
    Degenerate,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 5] = [
        PhaseLabel::Normal,
        PhaseLabel::Superradiant,
        PhaseLabel::Mott,
        PhaseLabel::Superfluid,
        PhaseLabel::Degenerate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhaseLabel::Normal => "Normal",
            PhaseLabel::Superradiant => "Superradiant",
            PhaseLabel::Mott => "Mott",
            PhaseLabel::Superfluid => "Superfluid",
            PhaseLabel::Degenerate => "Degenerate",
        }
    }

    /// One-letter code used in compact grid dumps.
    pub fn code(self) -> char {
        match self {
            PhaseLabel::Normal => 'N',
            PhaseLabel::Superradiant => 'R',
            PhaseLabel::Mott => 'M',
            PhaseLabel::Superfluid => 'F',
            PhaseLabel::Degenerate => 'D',
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhaseLabel {
    type Err = DickeError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| DickeError::Config(format!("unknown phase label `{s}`")))
    }
}

/// Critical detunings ±(u + v) bounding the superradiant lobe, ascending.
pub fn delta_critical(u: f64, v: f64) -> Result<(f64, f64)> {
    let uv = u + v;
    if uv < 0.0 {
        return Err(DickeError::NoSuperradiantLobe(uv));
    }
    Ok((-uv, uv))
}

/// Half-width in Δ of the region with two competing minima,
/// [|u+v|^{2/3} − Ω^{2/3}]^{3/2}.
///
/// Defined for u + v ≤ 0 with |u+v| ≥ Ω; at Ω = 0 it reduces to |u+v| for
/// either sign of u + v.
pub fn mott_boundary_delta(u: f64, v: f64, omega_rabi: f64) -> Option<f64> {
    let uv = u + v;
    if uv > 0.0 && omega_rabi > 0.0 {
        return None;
    }
    if uv.abs() < omega_rabi {
        return None;
    }
    let bracket = (uv.abs().cbrt().powi(2) - omega_rabi.cbrt().powi(2)).max(0.0);
    Some(bracket.powf(1.5))
}

/// Interaction strength at which the two-minimum region begins,
/// v_c = −u − [Ω^{2/3} + |Δ|^{2/3}]^{3/2}.
pub fn v_critical(u: f64, delta: f64, omega_rabi: f64) -> f64 {
    -u - (omega_rabi.cbrt().powi(2) + delta.abs().cbrt().powi(2)).powf(1.5)
}

/// Assigns a phase label to a mean-field solution.
///
/// Rules, in order:
/// 1. `Degenerate` when the energy is flat on the whole circle.
/// 2. For u + v < 0: `Superfluid` with two or more local minima, `Normal`
///    when |m/N| ≥ 1 − tol, otherwise `Mott`.
/// 3. For u + v ≥ 0: `Superradiant` when |m/N| < 1 − tol and the photon
///    density exceeds tol²·(λ/ω)², otherwise `Normal`.
pub fn classify(params: &ModelParams, sol: &MeanFieldSolution, tol: f64) -> PhaseLabel {
    if sol.flat {
        return PhaseLabel::Degenerate;
    }
    let polarized = sol.m_over_n.abs() >= 1.0 - tol;
    if params.u() + params.v < 0.0 {
        if sol.local_minima >= 2 {
            PhaseLabel::Superfluid
        } else if polarized {
            PhaseLabel::Normal
        } else {
            PhaseLabel::Mott
        }
    } else {
        let ratio = params.lambda / params.omega;
        if !polarized && sol.photon_density > tol * tol * ratio * ratio {
            PhaseLabel::Superradiant
        } else {
            PhaseLabel::Normal
        }
    }
}

/// Ground state and its label with the default tolerance.
pub fn solve_and_classify(params: &ModelParams) -> Result<(MeanFieldSolution, PhaseLabel)> {
    let sol = ground_state(params)?;
    Ok((sol, classify(params, &sol, CLASSIFY_TOL)))
}

/// Default stencil half-width 10⁻⁴·max(1, |v|).
pub fn default_dv(v: f64) -> f64 {
    1e-4 * v.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    /// ∂⟨J_z⟩/∂v from a central difference.
    pub value: f64,
    /// The stencil straddles a first-order jump in m/N.
    pub non_differentiable: bool,
}

/// Central difference [⟨J_z⟩(v+dv) − ⟨J_z⟩(v−dv)]/(2dv) with ⟨J_z⟩ = N s_z.
pub fn susceptibility_v(params: &ModelParams, dv: f64) -> Result<Susceptibility> {
    if !(dv > 0.0) || !dv.is_finite() {
        return Err(DickeError::Config(format!("susceptibility step must be positive, got {dv}")));
    }
    let n = params.n_atoms as f64;
    let lo = ground_state(&params.with(ParamAxis::V, params.v - dv))?;
    let hi = ground_state(&params.with(ParamAxis::V, params.v + dv))?;
    let value = n * (hi.point.s_z - lo.point.s_z) / (2.0 * dv);

    let cfg = DetectorConfig::default();
    let mut non_differentiable = false;
    if (hi.m_over_n - lo.m_over_n).abs() > cfg.jump_tol {
        let path = axis_path(*params, ParamAxis::V);
        let (_, jump) = bisect_jump(
            &path,
            Observable::MOverN,
            (params.v - dv, lo.m_over_n),
            (params.v + dv, hi.m_over_n),
            &cfg,
        )?;
        non_differentiable = jump > cfg.jump_tol;
    }
    Ok(Susceptibility {
        value,
        non_differentiable,
    })
}

/// Quantity monitored along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    MOverN,
    PhotonDensity,
    EnergyPerAtom,
    /// d(E₀/N)/dt along the path, from the Hellmann–Feynman derivatives.
    EnergyDerivative,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::MOverN,
        Observable::PhotonDensity,
        Observable::EnergyPerAtom,
        Observable::EnergyDerivative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::MOverN => "m_over_n",
            Observable::PhotonDensity => "photon_density",
            Observable::EnergyPerAtom => "energy_per_atom",
            Observable::EnergyDerivative => "energy_derivative",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = DickeError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| DickeError::Config(format!("unknown observable `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionOrder {
    First,
    Second,
    None,
}

impl TransitionOrder {
    pub fn name(self) -> &'static str {
        match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
            TransitionOrder::None => "none",
        }
    }
}

impl fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub location: f64,
    pub order: TransitionOrder,
    pub observable: Observable,
    /// Observable change across the bisected interval.
    pub jump: f64,
    /// Largest mismatch between one-sided difference quotients.
    pub kink: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub coarse_points: usize,
    pub min_bisections: usize,
    /// Bisection also stops once the interval cannot be split in floating point.
    pub max_bisections: usize,
    /// Absolute, in observable units.
    pub jump_tol: f64,
    /// Relative to (observable range)/(path width).
    pub kink_tol: f64,
    /// Halvings of the sampling gap used to re-fit a kink after the coarse fit.
    pub refine_levels: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            coarse_points: 201,
            min_bisections: 40,
            max_bisections: 200,
            jump_tol: 1e-3,
            kink_tol: 1e-3,
            refine_levels: 1,
        }
    }
}

/// The path t ↦ base with `axis` set to t.
pub fn axis_path(base: ModelParams, axis: ParamAxis) -> impl Fn(f64) -> ModelParams + Sync {
    move |t| base.with(axis, t)
}

fn observe<P>(path: &P, t: f64, observable: Observable) -> Result<f64>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let params = path(t).validate()?;
    let sol = ground_state(&params)?;
    Ok(match observable {
        Observable::MOverN => sol.m_over_n,
        Observable::PhotonDensity => sol.photon_density,
        Observable::EnergyPerAtom => sol.energy_per_atom,
        Observable::EnergyDerivative => {
            let h = 1e-6 * t.abs().max(1.0);
            let (a, b) = (path(t - h), path(t + h));
            let d = |x: f64, y: f64| (y - x) / (2.0 * h);
            let (sx, sz) = (sol.point.s_x, sol.point.s_z);
            sz * d(a.delta, b.delta) + sx * d(a.omega_rabi, b.omega_rabi) + sz * sz * d(a.v, b.v)
                - sx * sx * d(a.u(), b.u())
        }
    })
}

struct Scan {
    t: Vec<f64>,
    f: Vec<f64>,
    step: f64,
    /// Threshold on the kink measure.
    kink_threshold: f64,
}

fn coarse_scan<P>(path: &P, lo: f64, hi: f64, observable: Observable, cfg: &DetectorConfig) -> Result<Scan>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(DickeError::Config(format!("invalid path range [{lo}, {hi}]")));
    }
    if cfg.coarse_points < 9 {
        return Err(DickeError::Config("detector needs at least 9 coarse points".into()));
    }
    let t = linspace(lo, hi, cfg.coarse_points);
    let f = t
        .par_iter()
        .map(|&x| observe(path, x, observable))
        .collect::<Result<Vec<f64>>>()?;
    let width = hi - lo;
    let range = f.iter().copied().fold(f64::NEG_INFINITY, f64::max) - f.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Scan {
        step: width / (cfg.coarse_points - 1) as f64,
        t,
        f,
        kink_threshold: cfg.kink_tol * range / width,
    })
}

/// Repeatedly halves `[a, b]`, keeping the half with the larger change in the
/// observable. Returns the final midpoint and the change across it.
fn bisect_jump<P>(path: &P, observable: Observable, a: (f64, f64), b: (f64, f64), cfg: &DetectorConfig) -> Result<(f64, f64)>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let (mut a, mut b) = (a, b);
    for _ in 0..cfg.max_bisections.max(cfg.min_bisections) {
        let mid = 0.5 * (a.0 + b.0);
        if mid <= a.0 || mid >= b.0 {
            break;
        }
        let fm = observe(path, mid, observable)?;
        if (fm - a.1).abs() >= (b.1 - fm).abs() {
            b = (mid, fm);
        } else {
            a = (mid, fm);
        }
    }
    Ok((0.5 * (a.0 + b.0), (b.1 - a.1).abs()))
}

/// Largest mismatch among one-sided difference quotients at steps h and 10h.
fn kink_measure<P>(path: &P, observable: Observable, t: f64, h: f64) -> Result<f64>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let f = |x: f64| observe(path, x, observable);
    let f0 = f(t)?;
    let left1 = (f0 - f(t - h)?) / h;
    let right1 = (f(t + h)? - f0) / h;
    let left2 = (f0 - f(t - 10.0 * h)?) / (10.0 * h);
    let right2 = (f(t + 10.0 * h)? - f0) / (10.0 * h);
    Ok((right1 - left1).abs().max((left1 - left2).abs()).max((right1 - right2).abs()))
}

/// Quadratic through three points, as coefficients of s = t − origin.
fn quadratic(origin: f64, pts: &[(f64, f64); 3]) -> [f64; 3] {
    let [(x0, y0), (x1, y1), (x2, y2)] = pts.map(|(x, y)| (x - origin, y));
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c2 = (d12 - d01) / (x2 - x0);
    let c1 = d01 - c2 * (x0 + x1);
    let c0 = y0 - c1 * x0 - c2 * x0 * x0;
    [c2, c1, c0]
}

/// Root of the difference of two quadratics closest to s = 0 within `reach`.
fn nearest_crossing(left: [f64; 3], right: [f64; 3], reach: f64) -> Option<f64> {
    let d = [left[0] - right[0], left[1] - right[1], left[2] - right[2]];
    let roots = crate::poly::real_roots(&d, 1e-9);
    roots
        .into_iter()
        .filter(|s| s.abs() <= reach)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
}

/// Locates a kink near coarse node `i` as the crossing of quadratic fits to
/// either side, re-fitted at gaps step/2, step/4, ...
fn refine_kink<P>(path: &P, observable: Observable, scan: &Scan, i: usize, cfg: &DetectorConfig) -> Result<f64>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let n = scan.t.len();
    let mut center = scan.t[i];
    if i >= 4 && i + 4 < n {
        let pick = |k: usize| (scan.t[k], scan.f[k]);
        let left = quadratic(center, &[pick(i - 4), pick(i - 3), pick(i - 2)]);
        let right = quadratic(center, &[pick(i + 2), pick(i + 3), pick(i + 4)]);
        if let Some(s) = nearest_crossing(left, right, 2.0 * scan.step) {
            center += s;
        }
    }
    let mut gap = scan.step;
    for _ in 0..cfg.refine_levels {
        gap *= 0.5;
        let sample = |k: f64| -> Result<(f64, f64)> {
            let x = center + k * gap;
            Ok((x, observe(path, x, observable)?))
        };
        let left = quadratic(center, &[sample(-3.0)?, sample(-2.0)?, sample(-1.0)?]);
        let right = quadratic(center, &[sample(1.0)?, sample(2.0)?, sample(3.0)?]);
        match nearest_crossing(left, right, gap) {
            Some(s) => center += s,
            None => break,
        }
    }
    Ok(center)
}

fn argmax_by<I: Iterator<Item = (usize, f64)>>(it: I) -> Option<usize> {
    it.fold(None, |best: Option<(usize, f64)>, (k, v)| match best {
        Some((_, bv)) if bv >= v => best,
        _ => Some((k, v)),
    })
    .map(|(k, _)| k)
}

/// Analyzes the neighbourhood of coarse node `i`: jump bisection on the
/// steepest interval within `radius` nodes, kink fit at the sharpest node.
fn analyze<P>(path: &P, observable: Observable, scan: &Scan, i: usize, radius: usize, cfg: &DetectorConfig) -> Result<TransitionRecord>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let n = scan.t.len();
    let lo = i.saturating_sub(radius);
    let hi = (i + radius).min(n - 1);

    let j = argmax_by((lo..hi).map(|k| (k, (scan.f[k + 1] - scan.f[k]).abs()))).unwrap_or(lo);
    let (loc_a, jump) = bisect_jump(path, observable, (scan.t[j], scan.f[j]), (scan.t[j + 1], scan.f[j + 1]), cfg)?;

    let width = scan.t[n - 1] - scan.t[0];
    let h = 1e-6 * width;
    if jump > cfg.jump_tol {
        return Ok(TransitionRecord {
            location: loc_a,
            order: TransitionOrder::First,
            observable,
            jump,
            kink: kink_measure(path, observable, loc_a, h)?,
        });
    }

    let d2 = |k: usize| (scan.f[k + 1] - 2.0 * scan.f[k] + scan.f[k - 1]).abs();
    let k = argmax_by((lo.max(1)..hi.min(n - 2) + 1).map(|k| (k, d2(k)))).unwrap_or(i.clamp(1, n - 2));
    let loc_b = refine_kink(path, observable, scan, k, cfg)?;

    let kink_a = kink_measure(path, observable, loc_a, h)?;
    let kink_b = kink_measure(path, observable, loc_b, h)?;
    let (location, kink) = if kink_b >= kink_a {
        (loc_b, kink_b)
    } else {
        (loc_a, kink_a)
    };
    let order = if kink > scan.kink_threshold {
        TransitionOrder::Second
    } else {
        TransitionOrder::None
    };
    Ok(TransitionRecord {
        location,
        order,
        observable,
        jump,
        kink,
    })
}

/// Strongest transition of `observable` along `path` over `[lo, hi]`.
///
/// The steepest coarse interval is bisected; a refined change above
/// `jump_tol` makes the record first order. Otherwise the sharpest coarse
/// node is refined by intersecting one-sided quadratic fits, and a mismatch of
/// one-sided difference quotients above `kink_tol·range/width` makes it second
/// order.
pub fn detect_transition<P>(path: &P, range: (f64, f64), observable: Observable, cfg: &DetectorConfig) -> Result<TransitionRecord>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let scan = coarse_scan(path, range.0, range.1, observable, cfg)?;
    let n = scan.t.len();
    analyze(path, observable, &scan, n / 2, n, cfg)
}

/// Every transition of `observable` along `path`, ordered by location.
pub fn detect_transitions<P>(path: &P, range: (f64, f64), observable: Observable, cfg: &DetectorConfig) -> Result<Vec<TransitionRecord>>
where
    P: Fn(f64) -> ModelParams + Sync,
{
    let scan = coarse_scan(path, range.0, range.1, observable, cfg)?;
    let n = scan.t.len();
    let d1: Vec<f64> = (0..n - 1).map(|k| (scan.f[k + 1] - scan.f[k]).abs()).collect();
    let d2: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 || k == n - 1 {
                0.0
            } else {
                (scan.f[k + 1] - 2.0 * scan.f[k] + scan.f[k - 1]).abs()
            }
        })
        .collect();

    let d2_floor = 0.5 * scan.kink_threshold * scan.step;
    let mut candidates: Vec<usize> = Vec::new();
    for k in 1..n - 1 {
        if d2[k] > d2_floor && d2[k] >= d2[k - 1] && d2[k] >= d2[k + 1] {
            candidates.push(k);
        }
    }
    for k in 0..n - 1 {
        let left = if k > 0 { d1[k - 1] } else { 0.0 };
        let right = if k + 2 < n { d1[k + 1] } else { 0.0 };
        if d1[k] > cfg.jump_tol && d1[k] >= left && d1[k] >= right {
            candidates.push(k);
        }
    }
    candidates.sort_unstable();
    let mut merged: Vec<usize> = Vec::new();
    for k in candidates {
        match merged.last() {
            Some(&last) if k - last <= 3 => {}
            _ => merged.push(k),
        }
    }

    let mut records: Vec<TransitionRecord> = Vec::new();
    for k in merged {
        let rec = analyze(path, observable, &scan, k, 3, cfg)?;
        if rec.order == TransitionOrder::None {
            continue;
        }
        if records.iter().all(|r| (r.location - rec.location).abs() > 2.0 * scan.step) {
            records.push(rec);
        }
    }
    records.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(records)
}

/// An analytic critical line in the (Δ, v) plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub line_id: String,
    /// (Δ, v) vertices.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub u: f64,
    pub omega_rabi: f64,
    pub deltas: Vec<f64>,
    pub vs: Vec<f64>,
    /// `labels[iv][id]` is the label at (deltas[id], vs[iv]).
    pub labels: Vec<Vec<PhaseLabel>>,
    pub overlays: Vec<Overlay>,
}

const OVERLAY_POINTS: usize = 401;

/// Analytic overlays: the line v = −u, the lobe edges Δ = ±(u+v) and the
/// boundary v_c(Δ) of the two-minimum region.
pub fn overlays(u: f64, omega_rabi: f64, delta_range: (f64, f64), v_range: (f64, f64)) -> Vec<Overlay> {
    let mut out = vec![Overlay {
        line_id: "red_v_eq_minus_u".into(),
        points: vec![(delta_range.0, -u), (delta_range.1, -u)],
    }];
    if v_range.1 > -u {
        let vs = linspace((-u).max(v_range.0), v_range.1, OVERLAY_POINTS);
        for (id, sign) in [("lobe_minus", -1.0), ("lobe_plus", 1.0)] {
            out.push(Overlay {
                line_id: id.into(),
                points: vs.iter().map(|&v| (sign * (u + v), v)).collect(),
            });
        }
    }
    out.push(Overlay {
        line_id: "blue_astroid".into(),
        points: linspace(delta_range.0, delta_range.1, OVERLAY_POINTS)
            .into_iter()
            .map(|d| (d, v_critical(u, d, omega_rabi)))
            .collect(),
    });
    out
}

/// Labels on a (Δ, v) grid at fixed u and Ω, with analytic overlays.
pub fn phase_grid(
    u: f64,
    omega_rabi: f64,
    delta_range: (f64, f64),
    v_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<PhaseGrid> {
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(DickeError::Config("phase grid needs at least 2 nodes per axis".into()));
    }
    let deltas = linspace(delta_range.0, delta_range.1, resolution.0);
    let vs = linspace(v_range.0, v_range.1, resolution.1);
    let labels = vs
        .par_iter()
        .map(|&v| {
            deltas
                .iter()
                .map(|&d| solve_and_classify(&ModelParams::dimensionless(u, d, omega_rabi, v)).map(|(_, l)| l))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseGrid {
        u,
        omega_rabi,
        overlays: overlays(u, omega_rabi, delta_range, v_range),
        deltas,
        vs,
        labels,
    })
}

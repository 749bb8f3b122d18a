//! Thermodynamic-limit ground state of the extended Dicke model.
//!
//! Eliminating the photon displacement α at its stationary value leaves the
//! energy per atom as a function on the Bloch circle s_x² + s_z² = 1/4:
//!
//! ```text
//! e(s_x, s_z) = −u s_x² + Δ s_z + Ω s_x + v s_z²,     u = λ²/ω
//! ```
//!
//! With s_x = (η² − 1)/(2(η² + 1)) and s_z = η/(1 + η²) its stationary points
//! are the real roots of
//!
//! ```text
//! 2(u+v)η(1−η²) + 2Ωη(1+η²) + Δ(1−η⁴) = 0
//! ```
//!
//! plus the point (1/2, 0) at η = ±∞, which the quartic cannot represent.
//! [`ground_state`] minimizes over that full set; [`oracle_grid_minimum`] is an
//! independent brute-force scan of the circle used to cross-check it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::model::ModelParams;
use crate::poly;

/// Relative energy window within which two minima count as degenerate.
pub const TIE_TOL: f64 = 1e-10;
/// Bloch-space distance above which two points count as distinct.
pub const DISTINCT_TOL: f64 = 1e-4;
/// Coefficient magnitude (relative to the energy scale) below which the
/// stationarity equation is considered identically zero.
pub const FLAT_TOL: f64 = 1e-13;
/// Bound on the backward error of an accepted stationary root.
pub const ROOT_TOL: f64 = 1e-12;

/// Scaled collective spin (⟨J_x⟩/N, ⟨J_z⟩/N) of a fully polarized product state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub s_x: f64,
    pub s_z: f64,
}

impl BlochPoint {
    /// Point at polar angle θ measured from (−1/2, 0) towards +s_z.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            s_x: -0.5 * theta.cos(),
            s_z: 0.5 * theta.sin(),
        }
    }

    pub fn angle(&self) -> f64 {
        (2.0 * self.s_z).atan2(-2.0 * self.s_x)
    }

    /// η = tan(θ/2); ±∞ maps to (1/2, 0).
    pub fn from_eta(eta: f64) -> Self {
        if eta.is_infinite() {
            return Self { s_x: 0.5, s_z: 0.0 };
        }
        if eta.abs() <= 1.0 {
            let e2 = eta * eta;
            Self {
                s_x: (e2 - 1.0) / (2.0 * (e2 + 1.0)),
                s_z: eta / (1.0 + e2),
            }
        } else {
            let t = 1.0 / eta;
            let t2 = t * t;
            Self {
                s_x: (1.0 - t2) / (2.0 * (1.0 + t2)),
                s_z: t / (1.0 + t2),
            }
        }
    }

    pub fn eta(&self) -> f64 {
        let denom = 1.0 - 2.0 * self.s_x;
        if denom <= 0.0 {
            f64::INFINITY
        } else if self.s_x > 0.0 && self.s_z != 0.0 {
            // (1 + 2s_x)/(2s_z) avoids cancellation in 1 − 2s_x near η = ∞
            (1.0 + 2.0 * self.s_x) / (2.0 * self.s_z)
        } else {
            2.0 * self.s_z / denom
        }
    }

    /// The variable h of the printed landscape: h² − 1/2 = s_x, h√(1−h²) = s_z.
    pub fn h(&self) -> f64 {
        let h = (self.s_x + 0.5).max(0.0).sqrt();
        if self.s_z < 0.0 {
            -h
        } else {
            h
        }
    }

    pub fn from_h(h: f64) -> Self {
        Self {
            s_x: h * h - 0.5,
            s_z: h * (1.0 - h * h).max(0.0).sqrt(),
        }
    }

    pub fn norm_defect(&self) -> f64 {
        (self.s_x * self.s_x + self.s_z * self.s_z - 0.25).abs()
    }

    pub fn distance(&self, other: &BlochPoint) -> f64 {
        (self.s_x - other.s_x).hypot(self.s_z - other.s_z)
    }
}

/// Ground state of the mean-field energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub point: BlochPoint,
    pub eta: f64,
    /// Photon displacement; ⟨a⟩ = −√N α.
    pub alpha: f64,
    pub energy_per_atom: f64,
    /// Population imbalance 2⟨J_z⟩/N.
    pub m_over_n: f64,
    /// ⟨a†a⟩/N = α².
    pub photon_density: f64,
    /// |LHS of the stationarity quartic| at `eta`; for η = ±∞ the reversed
    /// polynomial's residual |Δ| is reported instead.
    pub residual: f64,
    /// Two distinct global minima within the tie tolerance.
    pub degenerate: bool,
    /// The energy is constant on the whole circle.
    pub flat: bool,
    /// Number of distinct local minima of the energy on the circle.
    pub local_minima: usize,
}

/// Coefficients of c4 η⁴ + c3 η³ + c2 η² + c1 η + c0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoeffs {
    pub fn as_array(&self) -> [f64; 5] {
        [self.c4, self.c3, self.c2, self.c1, self.c0]
    }

    pub fn scale(&self) -> f64 {
        self.as_array().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, eta: f64) -> f64 {
        poly::eval(&self.as_array(), eta)
    }
}

/// E₀(α, h)/N exactly as printed, for h ∈ [−1, 1].
pub fn energy_landscape(params: &ModelParams, alpha: f64, h: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&h) {
        return Err(DickeError::Domain(h));
    }
    let h2 = h * h;
    let p = params;
    Ok(p.omega * alpha * alpha - 2.0 * p.lambda * alpha * (h2 - 0.5)
        + p.delta * h * (1.0 - h2).sqrt()
        + p.omega_rabi * (h2 - 0.5)
        + p.v * h2 * (1.0 - h2))
}

/// Energy per atom after eliminating α: −u s_x² + Δ s_z + Ω s_x + v s_z².
pub fn reduced_energy(params: &ModelParams, point: &BlochPoint) -> f64 {
    let (sx, sz) = (point.s_x, point.s_z);
    -params.u() * sx * sx + params.delta * sz + params.omega_rabi * sx + params.v * sz * sz
}

/// Stationary photon displacement λ(η² − 1)/(2ω(η² + 1)) = (λ/ω) s_x.
pub fn alpha_star(params: &ModelParams, eta: f64) -> f64 {
    params.lambda / params.omega * BlochPoint::from_eta(eta).s_x
}

/// The stationarity quartic moved to one side.
pub fn stationarity_coeffs(params: &ModelParams) -> QuarticCoeffs {
    let uv = params.u() + params.v;
    let rabi = params.omega_rabi;
    QuarticCoeffs {
        c4: params.delta,
        c3: 2.0 * (uv - rabi),
        c2: 0.0,
        c1: -2.0 * (uv + rabi),
        c0: -params.delta,
    }
}

/// Left-hand side of the stationarity equation in its printed factored form.
pub fn stationarity_lhs(params: &ModelParams, eta: f64) -> f64 {
    let uv = params.u() + params.v;
    let e2 = eta * eta;
    2.0 * uv * eta * (1.0 - e2) + 2.0 * params.omega_rabi * eta * (1.0 + e2) + params.delta * (1.0 - e2 * e2)
}

/// Real stationary points on the circle, in η.
struct Stationary {
    finite: Vec<f64>,
    /// η = ±∞ is itself a root (c4 = 0).
    infinite: bool,
}

fn stationary_roots(coeffs: &QuarticCoeffs, flat_scale: f64) -> Result<Stationary> {
    let cs = coeffs.scale();
    if cs <= FLAT_TOL * flat_scale {
        return Err(DickeError::DegenerateManifold);
    }
    let forward = coeffs.as_array();
    let mut reversed = forward;
    reversed.reverse();

    // Roots with |η| <= 1 from the quartic, roots with |η| >= 1 from the
    // reversed polynomial in ζ = 1/η; each side is well conditioned there.
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut infinite = false;
    for (coeffs, inverted) in [(&forward, false), (&reversed, true)] {
        for z in poly::companion_roots(coeffs, 1e-8) {
            if z.im.abs() > 1e-3 * z.re.abs().max(1.0) || z.re.abs() > 1.05 {
                continue;
            }
            let (x, r) = poly::polish_multiple(coeffs, z.re, 100);
            if poly::backward_error(coeffs, x) > ROOT_TOL || x.abs() > 1.05 {
                continue;
            }
            if inverted {
                if x == 0.0 {
                    infinite = true;
                } else {
                    found.push((1.0 / x, r));
                }
            } else {
                found.push((x, r));
            }
        }
    }
    poly::merge_close(&mut found, 1e-5);
    let residual = |eta: f64| {
        if eta.abs() <= 1.0 {
            poly::backward_error(&forward, eta)
        } else {
            poly::backward_error(&reversed, 1.0 / eta)
        }
    };
    let refine = |cluster: &[(f64, f64)]| {
        let centroid = cluster.iter().map(|c| c.0).sum::<f64>() / cluster.len() as f64;
        if centroid.abs() <= 1.0 {
            poly::refine_cluster(&forward, cluster, ROOT_TOL)
        } else {
            let inv: Vec<(f64, f64)> = cluster.iter().rev().map(|&(x, r)| (1.0 / x, r)).collect();
            let (z, r) = poly::refine_cluster(&reversed, &inv, ROOT_TOL);
            (1.0 / z, r)
        }
    };
    poly::merge_multiple(&mut found, residual, ROOT_TOL, refine);
    Ok(Stationary {
        finite: found.into_iter().map(|(x, _)| x).collect(),
        infinite,
    })
}

/// All real roots of the stationarity quartic, sorted, multiplicities collapsed.
///
/// Fails with [`DickeError::DegenerateManifold`] when every coefficient vanishes.
pub fn solve_stationarity(coeffs: &QuarticCoeffs) -> Result<Vec<f64>> {
    Ok(stationary_roots(coeffs, 1.0)?.finite)
}

/// Second derivative of the energy with respect to the Bloch angle.
pub fn angular_curvature(params: &ModelParams, point: &BlochPoint) -> f64 {
    let uv = params.u() + params.v;
    let (sx, sz) = (point.s_x, point.s_z);
    2.0 * uv * (sx * sx - sz * sz) - params.delta * sz - params.omega_rabi * sx
}

fn is_local_minimum(params: &ModelParams, point: &BlochPoint) -> bool {
    let scale = params.energy_scale();
    let kappa = angular_curvature(params, point);
    if kappa.abs() > 1e-9 * scale {
        return kappa > 0.0;
    }
    // Flat to second order: compare neighbours directly.
    let theta = point.angle();
    let e0 = reduced_energy(params, point);
    let step = 1e-3;
    [theta - step, theta + step]
        .iter()
        .all(|&t| reduced_energy(params, &BlochPoint::from_angle(t)) >= e0)
}

fn distinct_points(points: &[BlochPoint]) -> usize {
    let mut reps: Vec<BlochPoint> = Vec::new();
    for p in points {
        if reps.iter().all(|r| r.distance(p) > DISTINCT_TOL) {
            reps.push(*p);
        }
    }
    reps.len()
}

/// Prefer s_z ≥ 0, then the smaller s_x, so ties resolve deterministically.
fn representative_order(a: &BlochPoint, b: &BlochPoint) -> std::cmp::Ordering {
    b.s_z.total_cmp(&a.s_z).then(a.s_x.total_cmp(&b.s_x))
}

fn residual_at(params: &ModelParams, eta: f64) -> f64 {
    if eta.is_finite() {
        stationarity_lhs(params, eta).abs()
    } else {
        params.delta.abs()
    }
}

fn assemble(params: &ModelParams, point: BlochPoint, eta: f64, degenerate: bool, flat: bool, local_minima: usize) -> MeanFieldSolution {
    let alpha = params.lambda / params.omega * point.s_x;
    MeanFieldSolution {
        point,
        eta,
        alpha,
        energy_per_atom: reduced_energy(params, &point),
        m_over_n: 2.0 * point.s_z,
        photon_density: alpha * alpha,
        residual: residual_at(params, eta),
        degenerate,
        flat,
        local_minima,
    }
}

fn flat_solution(params: &ModelParams) -> MeanFieldSolution {
    let point = BlochPoint { s_x: -0.5, s_z: 0.0 };
    assemble(params, point, 0.0, true, true, 0)
}

/// Global minimum of the mean-field energy over the full Bloch circle.
pub fn ground_state(params: &ModelParams) -> Result<MeanFieldSolution> {
    let params = params.validate()?;
    let scale = params.energy_scale();
    let coeffs = stationarity_coeffs(&params);
    let stationary = match stationary_roots(&coeffs, scale) {
        Ok(s) => s,
        Err(DickeError::DegenerateManifold) => return Ok(flat_solution(&params)),
        Err(e) => return Err(e),
    };

    let mut candidates: Vec<(f64, BlochPoint)> = stationary
        .finite
        .iter()
        .map(|&eta| (eta, BlochPoint::from_eta(eta)))
        .collect();
    candidates.push((f64::INFINITY, BlochPoint::from_eta(f64::INFINITY)));

    let is_min: Vec<bool> = candidates
        .iter()
        .map(|(eta, p)| (eta.is_finite() || stationary.infinite) && is_local_minimum(&params, p))
        .collect();
    let minima: Vec<BlochPoint> = candidates.iter().zip(&is_min).filter(|(_, &m)| m).map(|(c, _)| c.1).collect();
    let local_minima = distinct_points(&minima);

    // Ties are between local minima; the lowest candidate always qualifies.
    let energies: Vec<f64> = candidates.iter().map(|(_, p)| reduced_energy(&params, p)).collect();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let tied: Vec<(f64, BlochPoint)> = candidates
        .iter()
        .zip(&energies)
        .zip(&is_min)
        .filter(|((_, &e), &m)| e == e_min || (m && e <= e_min + TIE_TOL * scale))
        .map(|((c, _), _)| *c)
        .collect();
    let tied_points: Vec<BlochPoint> = tied.iter().map(|(_, p)| *p).collect();
    let degenerate = distinct_points(&tied_points) > 1;
    let (eta, point) = *tied
        .iter()
        .min_by(|a, b| representative_order(&a.1, &b.1))
        .expect("at least the point at infinity is a candidate");

    Ok(assemble(&params, point, eta, degenerate, false, local_minima.max(1)))
}

/// Brute-force minimum of [`reduced_energy`] over `n_points` equally spaced
/// angles, every discrete local minimum refined by bisection on a
/// finite-difference derivative to 1e-10 in angle.
pub fn oracle_grid_minimum(params: &ModelParams, n_points: usize) -> Result<MeanFieldSolution> {
    let params = params.validate()?;
    let n = n_points.max(1000);
    let scale = params.energy_scale();
    let step = 2.0 * PI / n as f64;
    let energy = |theta: f64| reduced_energy(&params, &BlochPoint::from_angle(theta));
    let grid: Vec<f64> = (0..n).map(|k| energy(k as f64 * step)).collect();

    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if hi - lo <= 1e-14 * scale {
        return Ok(flat_solution(&params));
    }

    let slope = |theta: f64| {
        let h = 1e-6;
        (energy(theta + h) - energy(theta - h)) / (2.0 * h)
    };
    let mut refined: Vec<(f64, f64)> = Vec::new();
    for k in 0..n {
        let prev = grid[(k + n - 1) % n];
        let next = grid[(k + 1) % n];
        if !(grid[k] <= prev && grid[k] < next) {
            continue;
        }
        let theta_k = k as f64 * step;
        let (mut a, mut b) = (theta_k - step, theta_k + step);
        if slope(a) <= 0.0 && slope(b) >= 0.0 {
            while b - a > 1e-10 {
                let mid = 0.5 * (a + b);
                if slope(mid) > 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
        }
        let theta = 0.5 * (a + b);
        let best = if energy(theta) <= grid[k] { theta } else { theta_k };
        refined.push((best, energy(best)));
    }

    let e_min = refined.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let tied: Vec<BlochPoint> = refined
        .iter()
        .filter(|r| r.1 <= e_min + TIE_TOL * scale)
        .map(|r| BlochPoint::from_angle(r.0))
        .collect();
    let all_minima: Vec<BlochPoint> = refined.iter().map(|r| BlochPoint::from_angle(r.0)).collect();
    let degenerate = distinct_points(&tied) > 1;
    let point = *tied
        .iter()
        .min_by(|a, b| representative_order(a, b))
        .expect("a periodic non-constant function has a minimum");
    let eta = point.eta();
    Ok(assemble(&params, point, eta, degenerate, false, distinct_points(&all_minima)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(u: f64, v: f64, rabi: f64, delta: f64) -> ModelParams {
        ModelParams::dimensionless(u, delta, rabi, v)
    }

    /// Energy minimum by plain dense sampling, no refinement.
    fn dense_scan(params: &ModelParams, n: usize) -> (f64, BlochPoint) {
        (0..n)
            .map(|k| BlochPoint::from_angle(2.0 * PI * k as f64 / n as f64))
            .map(|pt| (reduced_energy(params, &pt), pt))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    }

    #[test]
    fn landscape_examples() {
        let only_delta = ModelParams::new(1.0, 0.0, 1.0, 0.0, 0.0, 1);
        let h = 1.0 / 2f64.sqrt();
        assert_relative_eq!(energy_landscape(&only_delta, 0.0, h).unwrap(), 0.5, epsilon = 1e-15);

        let only_rabi = ModelParams::new(1.0, 0.0, 0.0, 2.0, 0.0, 1);
        assert_eq!(energy_landscape(&only_rabi, 0.0, 1.0).unwrap(), 1.0);

        let coupled = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 1);
        assert_eq!(energy_landscape(&coupled, 1.0, 1.0).unwrap(), 0.0);

        assert!(matches!(
            energy_landscape(&coupled, 0.0, 1.5),
            Err(DickeError::Domain(_))
        ));
    }

    #[test]
    fn reduced_energy_examples() {
        let pt = BlochPoint { s_x: -0.5, s_z: 0.0 };
        assert_relative_eq!(reduced_energy(&p(1.0, 0.0, 0.5, 0.0), &pt), -0.5, epsilon = 1e-15);
        // dense scan agrees that this is the minimum
        let (e, _) = dense_scan(&p(1.0, 0.0, 0.5, 0.0), 1_000_000);
        assert_relative_eq!(e, -0.5, epsilon = 1e-12);

        let pt = BlochPoint { s_x: -0.4, s_z: -0.3 };
        assert_relative_eq!(reduced_energy(&p(1.0, 0.0, 0.0, 0.6), &pt), -0.34, epsilon = 1e-15);

        let zero = ModelParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 1);
        for k in 0..16 {
            let pt = BlochPoint::from_angle(k as f64 * 0.4);
            assert_eq!(reduced_energy(&zero, &pt), 0.0);
        }
    }

    #[test]
    fn alpha_star_examples() {
        let params = ModelParams::new(100.0, 10.0, 0.0, 0.0, 0.0, 1);
        assert_eq!(alpha_star(&params, 1.0), 0.0);
        assert_eq!(alpha_star(&params, -1.0), 0.0);
        assert_relative_eq!(alpha_star(&params, 0.0), -0.05, epsilon = 1e-15);
        assert_relative_eq!(alpha_star(&params, -3.0), 0.04, epsilon = 1e-15);
        assert_relative_eq!(alpha_star(&params, f64::INFINITY), 0.05, epsilon = 1e-15);

        // the printed landscape is minimized over α at the same value
        for eta in [0.0, -3.0, 0.7] {
            let h = BlochPoint::from_eta(eta).h();
            let a = alpha_star(&params, eta);
            let e0 = energy_landscape(&params, a, h).unwrap();
            for da in [-1e-3, 1e-3] {
                assert!(energy_landscape(&params, a + da, h).unwrap() > e0);
            }
        }
    }

    #[test]
    fn stationarity_coeff_examples() {
        let c = stationarity_coeffs(&p(1.0, 0.0, 0.0, 0.6));
        assert_eq!(c.as_array(), [0.6, 2.0, 0.0, -2.0, -0.6]);
        let c = stationarity_coeffs(&p(1.0, 0.0, 0.3, 0.0));
        assert_eq!((c.c4, c.c0), (0.0, 0.0));
        let c = stationarity_coeffs(&p(1.0, -1.0, 0.5, 0.0));
        assert_eq!(c.as_array(), [0.0, -1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn expanded_quartic_matches_printed_form() {
        let params = p(1.3, -0.4, 0.7, 0.45);
        let c = stationarity_coeffs(&params);
        for k in -40..=40 {
            let eta = k as f64 * 0.25;
            let lhs = stationarity_lhs(&params, eta);
            assert!((c.eval(eta) + lhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    /// Sign changes of the printed quartic on a geometric grid over ±[1e-6, 1e6].
    fn sign_change_roots(params: &ModelParams) -> Vec<f64> {
        let mut grid: Vec<f64> = (0..=1200).map(|k| 10f64.powf(-6.0 + k as f64 * 0.01)).collect();
        let neg: Vec<f64> = grid.iter().rev().map(|x| -x).collect();
        grid = neg.into_iter().chain(std::iter::once(0.0)).chain(grid).collect();
        let f = |x: f64| stationarity_lhs(params, x);
        let mut roots = Vec::new();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            if f(a) == 0.0 {
                roots.push(a);
                continue;
            }
            if f(a) * f(b) < 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if f(a) * f(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        roots
    }

    #[test]
    fn solve_stationarity_superradiant_example() {
        let params = p(1.0, 0.0, 0.0, 0.6);
        let roots = solve_stationarity(&stationarity_coeffs(&params)).unwrap();
        let expected = [-3.0, -1.0, -1.0 / 3.0, 1.0];
        assert_eq!(roots.len(), 4);
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
            assert!(stationarity_lhs(&params, *r).abs() < 1e-12);
        }
        let scanned = sign_change_roots(&params);
        assert_eq!(scanned.len(), 4);
        for (r, s) in roots.iter().zip(scanned) {
            assert!((r - s).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_stationarity_degree_drops() {
        let roots = solve_stationarity(&stationarity_coeffs(&p(1.0, -1.0, 0.5, 0.0))).unwrap();
        assert_eq!(roots, vec![0.0]);
        let roots = solve_stationarity(&stationarity_coeffs(&p(1.0, 0.0, 0.0, 0.0))).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((r - e).abs() < 1e-14);
        }
        // Δ = 0 and u + v = Ω: linear
        let roots = solve_stationarity(&stationarity_coeffs(&p(1.0, -0.5, 0.5, 0.0))).unwrap();
        assert_eq!(roots, vec![0.0]);
    }

    #[test]
    fn solve_stationarity_flags_degenerate_manifold() {
        let c = stationarity_coeffs(&p(1.0, -1.0, 0.0, 0.0));
        assert!(matches!(solve_stationarity(&c), Err(DickeError::DegenerateManifold)));
    }

    #[test]
    fn ground_state_normal_phase() {
        let sol = ground_state(&p(1.0, 0.0, 0.0, 2.0)).unwrap();
        assert_relative_eq!(sol.eta, -1.0, epsilon = 1e-14);
        assert_relative_eq!(sol.point.s_z, -0.5, epsilon = 1e-15);
        assert_relative_eq!(sol.m_over_n, -1.0, epsilon = 1e-15);
        assert!(sol.alpha.abs() < 1e-14);
        assert!(sol.photon_density < 1e-28);
        assert_relative_eq!(sol.energy_per_atom, -1.0, epsilon = 1e-15);
        assert!(!sol.degenerate);
    }

    #[test]
    fn ground_state_superradiant_phase() {
        let params = ModelParams::new(100.0, 10.0, 0.6, 0.0, 0.0, 1);
        let sol = ground_state(&params).unwrap();
        assert_relative_eq!(sol.m_over_n, -0.6, epsilon = 1e-12);
        assert_relative_eq!(sol.point.s_x.abs(), 0.4, epsilon = 1e-12);
        assert_relative_eq!(sol.energy_per_atom, -0.34, epsilon = 1e-12);
        assert_relative_eq!(sol.photon_density, 0.0016, epsilon = 1e-14);
        assert!(sol.degenerate);
        assert_eq!(sol.local_minima, 2);

        let (e, pt) = dense_scan(&params, 1_000_000);
        assert!((e - sol.energy_per_atom).abs() < 1e-10);
        assert!((2.0 * pt.s_z - sol.m_over_n).abs() < 1e-5);
    }

    #[test]
    fn ground_state_superfluid_phase() {
        let params = p(1.0, -2.0, 0.5, -1e-6);
        let sol = ground_state(&params).unwrap();
        assert_relative_eq!(sol.m_over_n, 3f64.sqrt() / 2.0, epsilon = 1e-5);
        let (e, pt) = dense_scan(&params, 1_000_000);
        assert!((e - sol.energy_per_atom).abs() < 1e-10);
        assert!((2.0 * pt.s_z - sol.m_over_n).abs() < 1e-5);
    }

    #[test]
    fn ground_state_flat_manifold() {
        let sol = ground_state(&p(1.0, -1.0, 0.0, 0.0)).unwrap();
        assert!(sol.flat && sol.degenerate);
        assert_eq!(sol.point, BlochPoint { s_x: -0.5, s_z: 0.0 });
        let zero = ground_state(&ModelParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 1)).unwrap();
        assert!(zero.flat);
        assert_eq!(zero.energy_per_atom, 0.0);
    }

    #[test]
    fn ground_state_invariants_hold() {
        let params = ModelParams::new(3.0, 2.0, 0.37, 0.21, -0.8, 10);
        let sol = ground_state(&params).unwrap();
        let scale = params.energy_scale();
        assert!(sol.point.norm_defect() < 1e-12);
        assert!(sol.residual <= 1e-9 * scale);
        let expected = (params.lambda * sol.point.s_x / params.omega).powi(2);
        assert!((sol.photon_density - expected).abs() <= 1e-12 * expected);
        let landscape = energy_landscape(&params, sol.alpha, sol.point.h()).unwrap();
        assert!((landscape - sol.energy_per_atom).abs() <= 1e-12 * sol.energy_per_atom.abs());
    }

    #[test]
    fn oracle_examples() {
        for params in [p(1.0, 0.0, 0.0, 2.0), ModelParams::new(100.0, 10.0, 0.6, 0.0, 0.0, 1), p(1.0, -2.0, 0.5, -1e-6)] {
            let a = ground_state(&params).unwrap();
            let b = oracle_grid_minimum(&params, 4096).unwrap();
            assert!((a.energy_per_atom - b.energy_per_atom).abs() < 1e-8);
        }
        let flat = oracle_grid_minimum(&ModelParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 1), 1000).unwrap();
        assert!(flat.flat);
        assert_eq!(flat.energy_per_atom, 0.0);

        let mott = oracle_grid_minimum(&p(1.0, -1.0, 0.5, 0.0), 1000).unwrap();
        assert!((mott.point.s_x + 0.5).abs() < 1e-9);
        assert!((mott.energy_per_atom + 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_phase_onset_at_delta_equal_u() {
        for delta in [1.0, 1.2, 3.0, -1.0, -2.5] {
            let sol = ground_state(&p(1.0, 0.0, 0.0, delta)).unwrap();
            assert!(sol.photon_density <= 1e-28, "delta = {delta}: {}", sol.photon_density);
        }
        for delta in [0.99, 0.5, -0.3] {
            let sol = ground_state(&p(1.0, 0.0, 0.0, delta)).unwrap();
            assert!(sol.photon_density > 0.0);
        }
    }

    proptest! {
        #[test]
        fn eta_parametrization_is_on_circle(eta in -1e6f64..1e6) {
            let pt = BlochPoint::from_eta(eta);
            prop_assert!(pt.norm_defect() < 1e-12);
            let back = pt.eta();
            prop_assert!((back - eta).abs() <= 1e-9 * eta.abs().max(1.0));
        }

        #[test]
        fn landscape_matches_reduced_energy_on_printed_branch(
            u in 0.0f64..5.0, v in -5.0f64..5.0, rabi in 0.0f64..3.0, delta in -3.0f64..3.0,
            h2 in 0.5f64..1.0, sign in proptest::bool::ANY,
        ) {
            let params = p(u, v, rabi, delta);
            let h = if sign { h2.sqrt() } else { -h2.sqrt() };
            let pt = BlochPoint::from_h(h);
            let eta = pt.eta();
            let lhs = energy_landscape(&params, alpha_star(&params, eta), h).unwrap();
            let rhs = reduced_energy(&params, &BlochPoint::from_eta(eta));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn delta_mirror_symmetry_at_zero_rabi(
            u in 0.0f64..5.0, v in -5.0f64..5.0, delta in 0.01f64..3.0,
        ) {
            let a = ground_state(&p(u, v, 0.0, delta)).unwrap();
            let b = ground_state(&p(u, v, 0.0, -delta)).unwrap();
            prop_assert!((a.energy_per_atom - b.energy_per_atom).abs() <= 1e-12);
            prop_assert!((a.point.s_z + b.point.s_z).abs() <= 1e-8);
        }

        #[test]
        fn superradiant_closed_form(u in 0.2f64..5.0, v in -0.1f64..3.0, frac in -0.98f64..0.98) {
            prop_assume!(frac.abs() > 0.01);
            let uv = u + v;
            let delta = frac * uv;
            let params = ModelParams::new(2.0, (2.0 * u).sqrt(), delta, 0.0, v, 1);
            let sol = ground_state(&params).unwrap();
            prop_assert!((sol.m_over_n + delta / uv).abs() <= 1e-8);
            let ratio = params.lambda / params.omega;
            let expected = ratio * ratio * (0.25 - sol.point.s_z * sol.point.s_z);
            prop_assert!((sol.photon_density - expected).abs() <= 1e-8);
        }

        #[test]
        fn returned_root_is_stationary(
            u in 0.0f64..5.0, v in -5.0f64..5.0, rabi in 0.0f64..3.0, delta in -3.0f64..3.0,
        ) {
            let params = p(u, v, rabi, delta);
            let sol = ground_state(&params).unwrap();
            if sol.eta.is_finite() && !sol.flat {
                prop_assert!(sol.residual <= 1e-9 * params.energy_scale());
            }
        }
    }
}

//! Real roots of low-degree real polynomials.
//!
//! Coefficients are stored highest degree first. Roots come from the
//! eigenvalues of the companion matrix and are then polished with Newton
//! steps on the original coefficients.

use nalgebra::{Complex, DMatrix, Schur};

/// Horner evaluation.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Value and first derivative in one Horner pass.
pub fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// A root candidate from the companion matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRoot {
    pub re: f64,
    pub im: f64,
}

/// All roots of the polynomial as companion-matrix eigenvalues.
///
/// Leading coefficients with `|c| <= lead_tol * max|c|` are dropped, which
/// discards roots of magnitude beyond roughly `1 / lead_tol`. Trailing zeros
/// contribute exact zero roots.
pub fn companion_roots(coeffs: &[f64], lead_tol: f64) -> Vec<ComplexRoot> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let start = coeffs
        .iter()
        .position(|c| c.abs() > lead_tol * scale)
        .unwrap_or(coeffs.len());
    let mut c: Vec<f64> = coeffs[start..].to_vec();

    let mut roots = Vec::new();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
        roots.push(ComplexRoot { re: 0.0, im: 0.0 });
    }
    let degree = c.len().saturating_sub(1);
    match degree {
        0 => {}
        1 => roots.push(ComplexRoot {
            re: -c[1] / c[0],
            im: 0.0,
        }),
        _ => {
            let mut companion = DMatrix::<f64>::zeros(degree, degree);
            for k in 0..degree {
                companion[(0, k)] = -c[k + 1] / c[0];
            }
            for k in 1..degree {
                companion[(k, k - 1)] = 1.0;
            }
            match Schur::try_new(companion, f64::EPSILON, 10_000) {
                Some(schur) => {
                    for z in schur.complex_eigenvalues().iter() {
                        roots.push(ComplexRoot { re: z.re, im: z.im });
                    }
                }
                None => roots.extend(durand_kerner(&c)),
            }
        }
    }
    roots
}

/// Simultaneous Weierstrass iteration for all roots of a polynomial with
/// nonzero leading coefficient.
fn durand_kerner(c: &[f64]) -> Vec<ComplexRoot> {
    let degree = c.len() - 1;
    let monic: Vec<f64> = c.iter().map(|x| x / c[0]).collect();
    let radius = 1.0 + monic[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let seed = Complex::new(0.4, 0.9);
    let mut z: Vec<Complex<f64>> = (0..degree).map(|k| seed.powu(k as u32) * radius).collect();
    let eval_c = |x: Complex<f64>| monic.iter().fold(Complex::new(0.0, 0.0), |acc, &a| acc * x + a);
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let delta = eval_c(z[i]) / denom;
            z[i] -= delta;
            moved = moved.max(delta.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.into_iter().map(|w| ComplexRoot { re: w.re, im: w.im }).collect()
}

/// Damped Newton iteration: each step is halved until |p| decreases.
///
/// Returns the polished root and its residual |p(x)|.
pub fn polish(coeffs: &[f64], x0: f64, max_iter: usize) -> (f64, f64) {
    let mut x = x0;
    let mut r = eval(coeffs, x).abs();
    for _ in 0..max_iter {
        if r == 0.0 {
            break;
        }
        let (p, dp) = eval_with_derivative(coeffs, x);
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let mut step = p / dp;
        let mut accepted = false;
        for _ in 0..64 {
            let next = x - step;
            let rn = eval(coeffs, next).abs();
            if rn < r {
                x = next;
                r = rn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, r)
}

/// |p(x)| relative to Σ|c_k||x|^k, the size of the terms being summed.
///
/// This is the backward error of `x` as a root and is unchanged when the
/// coefficients are reversed and x is replaced by 1/x.
pub fn backward_error(coeffs: &[f64], x: f64) -> f64 {
    let magnitude = coeffs.iter().fold(0.0, |acc, &c| acc * x.abs() + c.abs());
    if magnitude == 0.0 {
        0.0
    } else {
        eval(coeffs, x).abs() / magnitude
    }
}

/// Coefficients of the derivative.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len().saturating_sub(1);
    coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (n - k) as f64)
        .collect()
}

/// Backward error of p′ below which a root of p is treated as multiple.
pub const MULTIPLE_TOL: f64 = 1e-6;

/// Polishes towards a root that may be double or triple.
///
/// Newton on p stalls at a multiple root, so Newton is also run on p′ and p″,
/// whose roots are simple there; among candidates that stay within
/// 10⁻³·max(1, |x0|) of the start, the one with the smallest |p| wins.
/// A point where p′ is not small in the backward sense is a simple root and
/// is returned as is, so nearby distinct roots are never swapped for a
/// critical point of p.
pub fn polish_multiple(coeffs: &[f64], x0: f64, max_iter: usize) -> (f64, f64) {
    let mut best = polish(coeffs, x0, max_iter);
    let d1 = derivative(coeffs);
    if d1.len() < 2 || backward_error(&d1, best.0) > MULTIPLE_TOL {
        return best;
    }
    let mut d = coeffs.to_vec();
    for _ in 0..2 {
        d = derivative(&d);
        if d.len() < 2 {
            break;
        }
        let (x, _) = polish(&d, x0, max_iter);
        let r = eval(coeffs, x).abs();
        if (x - x0).abs() <= 1e-3 * x0.abs().max(1.0) && r < best.1 {
            best = (x, r);
        }
    }
    best
}

/// Real roots with [`backward_error`] `<= tol`, sorted and with near-duplicates merged.
pub fn real_roots(coeffs: &[f64], tol: f64) -> Vec<f64> {
    let mut found: Vec<(f64, f64)> = companion_roots(coeffs, 0.0)
        .into_iter()
        .filter(|z| z.im.abs() <= 1e-3 * z.re.abs().max(1.0))
        .map(|z| polish_multiple(coeffs, z.re, 100))
        .filter(|&(x, _)| backward_error(coeffs, x) <= tol)
        .collect();
    merge_close(&mut found, 1e-6);
    merge_multiple(&mut found, |x| backward_error(coeffs, x), tol, |c| refine_cluster(coeffs, c, tol));
    found.into_iter().map(|(x, _)| x).collect()
}

/// Sorts `(root, residual)` pairs and collapses roots closer than
/// `rel * |x|`, keeping the smaller residual. Purely relative, so distinct
/// small roots survive; clusters around a multiple root are left to
/// [`merge_multiple`].
pub fn merge_close(roots: &mut Vec<(f64, f64)>, rel: f64) {
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(roots.len());
    for &(x, r) in roots.iter() {
        match merged.last_mut() {
            Some(last) if (x - last.0).abs() <= rel * x.abs().max(last.0.abs()) => {
                if r < last.1 {
                    *last = (x, r);
                }
            }
            _ => merged.push((x, r)),
        }
    }
    *roots = merged;
}

/// Collapses neighbouring roots whose midpoint still has `residual <= tol`.
///
/// A k-fold root splits into a cluster of width about ε^(1/k) under rounding;
/// the polynomial stays numerically zero across such a cluster but not between
/// genuinely distinct roots. Every cluster, including singletons, is reduced
/// to one root by `refine`. Input must be sorted.
pub fn merge_multiple<F, R>(roots: &mut Vec<(f64, f64)>, residual: F, tol: f64, refine: R)
where
    F: Fn(f64) -> f64,
    R: Fn(&[(f64, f64)]) -> (f64, f64),
{
    let mut clusters: Vec<Vec<(f64, f64)>> = Vec::new();
    for &(x, r) in roots.iter() {
        match clusters.last_mut() {
            Some(c) if residual(0.5 * (x + c[c.len() - 1].0)) <= tol => c.push((x, r)),
            _ => clusters.push(vec![(x, r)]),
        }
    }
    *roots = clusters
        .iter()
        .map(|c| refine(c))
        .collect();
}

/// Best single representative of a cluster of roots of `coeffs`.
///
/// Candidates are the members plus Newton roots of p′ and p″ started from the
/// centroid where p′ also vanishes to [`MULTIPLE_TOL`] and whose
/// [`backward_error`] is at most `tol`; the one minimizing |p| + |p′| + |p″| wins,
/// which favours the exact location of a multiple root.
pub fn refine_cluster(coeffs: &[f64], cluster: &[(f64, f64)], tol: f64) -> (f64, f64) {
    let centroid = cluster.iter().map(|c| c.0).sum::<f64>() / cluster.len() as f64;
    let lo = cluster[0].0.min(cluster[cluster.len() - 1].0);
    let hi = cluster[0].0.max(cluster[cluster.len() - 1].0);
    let margin = (hi - lo).max(1e-5 * centroid.abs().max(1.0));
    let mut candidates: Vec<f64> = cluster.iter().map(|c| c.0).collect();
    let d1 = derivative(coeffs);
    let mut d = coeffs.to_vec();
    for _ in 0..2 {
        d = derivative(&d);
        if d.len() < 2 {
            break;
        }
        let (x, _) = polish(&d, centroid, 100);
        let multiple = backward_error(&d1, x) <= MULTIPLE_TOL;
        if x >= lo - margin && x <= hi + margin && multiple && backward_error(coeffs, x) <= tol {
            candidates.push(x);
        }
    }
    let d2 = derivative(&d1);
    let score = |x: f64| eval(coeffs, x).abs() + eval(&d1, x).abs() + eval(&d2, x).abs();
    let best = candidates
        .into_iter()
        .min_by(|a, b| score(*a).total_cmp(&score(*b)))
        .unwrap_or(centroid);
    (best, eval(coeffs, best).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_expansion() {
        let c = [1.0, -6.0, 11.0, -6.0];
        assert_eq!(eval(&c, 2.0), 0.0);
        assert_eq!(eval_with_derivative(&c, 0.0), (-6.0, 11.0));
    }

    #[test]
    fn close_simple_roots_stay_distinct() {
        for eps in [1e-4, 1e-6, 1e-8] {
            let roots = real_roots(&[-2.0, 0.0, 2.0 * eps * eps, 0.0], 1e-12);
            assert_eq!(roots.len(), 3, "eps = {eps}: {roots:?}");
            assert!((roots[2] - eps).abs() < 1e-12 * eps.max(1e-3));
            assert_eq!(roots[1], 0.0);
        }
    }

    #[test]
    fn cubic_with_known_roots() {
        let roots = real_roots(&[1.0, -6.0, 11.0, -6.0], 1e-12);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn trailing_zeros_are_exact_roots() {
        let roots = real_roots(&[1.0, 0.0, -1.0, 0.0], 1e-12);
        assert_eq!(roots, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn triple_root_is_recovered_exactly() {
        // (x - 1)(x + 1)^3
        let roots = real_roots(&[1.0, 2.0, 0.0, -2.0, -1.0], 1e-12);
        assert_eq!(roots, vec![-1.0, 1.0]);
    }

    #[test]
    fn complex_pairs_are_rejected() {
        assert!(real_roots(&[1.0, 0.0, 1.0], 1e-12).is_empty());
    }

    #[test]
    fn double_root_survives() {
        // (x - 1)^2 (x + 2)
        let roots = real_roots(&[1.0, 0.0, -3.0, 2.0], 1e-12);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 2.0).abs() < 1e-12);
        assert!((roots[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn distinct_roots_are_not_pulled_together() {
        // -3x^3 + x: p'' vanishes at 0, which must not capture ±1/√3
        let c = [0.0, -3.0, 0.0, 1.0, 0.0];
        let (x, _) = polish_multiple(&c, 0.577, 100);
        assert!((x - 3f64.sqrt().recip()).abs() < 1e-12);
        assert_eq!(real_roots(&c, 1e-12).len(), 3);
    }

    #[test]
    fn weierstrass_fallback_finds_all_roots() {
        let mut roots: Vec<f64> = durand_kerner(&[2.0, -12.0, 22.0, -12.0]).iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        for (r, e) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - e).abs() < 1e-10);
        }
    }

    #[test]
    fn damped_newton_recovers_from_overshoot() {
        // −4x³ − c with c tiny: plain Newton from 2e-8 jumps far past the root
        let c = [-4.0, 0.0, 0.0, -3.6e-16];
        let (x, _) = polish(&c, 2.17e-8, 200);
        assert!((x - (-3.6e-16f64 / 4.0).cbrt()).abs() < 1e-18);
    }

    #[test]
    fn negligible_leading_coefficient_is_dropped() {
        let roots = companion_roots(&[1e-20, 1.0, -1.0], 1e-14);
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].re, 1.0);
    }
}

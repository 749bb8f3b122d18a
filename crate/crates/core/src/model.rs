//! Parameter records for the extended Dicke Hamiltonian
//!
//! ```text
//! H = ω a†a + (λ/√N) J_x (a† + a) + Δ J_z + Ω J_x + (v/N) J_z²
//! ```
//!
//! All frequencies are angular frequencies in units of 10⁶ rad/s ("MHz")
//! with ħ = 1. The trap estimator is the only place SI units appear.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Couplings of the extended Dicke Hamiltonian plus the atom number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cavity-mode frequency ω.
    pub omega: f64,
    /// Collective atom-field coupling λ.
    pub lambda: f64,
    /// Atomic detuning ω₀ = Δ.
    pub delta: f64,
    /// Effective Rabi frequency Ω of the classical drive, stored nonnegative.
    pub omega_rabi: f64,
    /// Atom-atom interaction strength v.
    pub v: f64,
    pub n_atoms: u64,
}

impl ModelParams {
    pub fn new(omega: f64, lambda: f64, delta: f64, omega_rabi: f64, v: f64, n_atoms: u64) -> Self {
        Self {
            omega,
            lambda,
            delta,
            omega_rabi,
            v,
            n_atoms,
        }
    }

    /// Parameters in units where ω = 1, so that λ = √u.
    pub fn dimensionless(u: f64, delta: f64, omega_rabi: f64, v: f64) -> Self {
        Self::new(1.0, u.sqrt(), delta, omega_rabi, v, 1)
    }

    pub fn validate(&self) -> Result<Self> {
        validate(*self)
    }

    /// Photon-mediated spin-spin coupling u = λ²/ω.
    pub fn u(&self) -> f64 {
        self.lambda * self.lambda / self.omega
    }

    /// Natural energy scale max(1, u + |v| + Ω + |Δ|) used for relative tolerances.
    pub fn energy_scale(&self) -> f64 {
        (self.u() + self.v.abs() + self.omega_rabi.abs() + self.delta.abs()).max(1.0)
    }

    pub fn with(&self, axis: ParamAxis, value: f64) -> Self {
        let mut p = *self;
        match axis {
            ParamAxis::Omega => p.omega = value,
            ParamAxis::Lambda => p.lambda = value,
            ParamAxis::Delta => p.delta = value,
            ParamAxis::OmegaRabi => p.omega_rabi = value,
            ParamAxis::V => p.v = value,
            ParamAxis::NAtoms => p.n_atoms = value.round().max(0.0) as u64,
        }
        p
    }

    pub fn get(&self, axis: ParamAxis) -> f64 {
        match axis {
            ParamAxis::Omega => self.omega,
            ParamAxis::Lambda => self.lambda,
            ParamAxis::Delta => self.delta,
            ParamAxis::OmegaRabi => self.omega_rabi,
            ParamAxis::V => self.v,
            ParamAxis::NAtoms => self.n_atoms as f64,
        }
    }
}

/// Checks every invariant of [`ModelParams`] and reports the first violation.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    let fields = [
        ("omega", params.omega),
        ("lambda", params.lambda),
        ("delta", params.delta),
        ("omega_rabi", params.omega_rabi),
        ("v", params.v),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(DickeError::NonFinite(name));
        }
    }
    if params.omega <= 0.0 {
        return Err(DickeError::NonpositiveCavityFrequency);
    }
    if params.n_atoms == 0 {
        return Err(DickeError::NoAtoms);
    }
    if params.lambda < 0.0 {
        return Err(DickeError::NegativeCoupling);
    }
    if params.omega_rabi < 0.0 {
        return Err(DickeError::NegativeRabi);
    }
    if !params.u().is_finite() {
        return Err(DickeError::NonFinite("u"));
    }
    Ok(params)
}

/// `n` equally spaced points on `[lo, hi]`, built outward from the midpoint
/// so that a range symmetric about zero yields exactly mirrored nodes.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        center + half * ((2 * i) as f64 - last) / last
                    }
                })
                .collect()
        }
    }
}

/// A field of [`ModelParams`] that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamAxis {
    Omega,
    Lambda,
    Delta,
    OmegaRabi,
    V,
    NAtoms,
}

impl ParamAxis {
    pub const ALL: [ParamAxis; 6] = [
        ParamAxis::Omega,
        ParamAxis::Lambda,
        ParamAxis::Delta,
        ParamAxis::OmegaRabi,
        ParamAxis::V,
        ParamAxis::NAtoms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamAxis::Omega => "omega",
            ParamAxis::Lambda => "lambda",
            ParamAxis::Delta => "delta",
            ParamAxis::OmegaRabi => "omega_rabi",
            ParamAxis::V => "v",
            ParamAxis::NAtoms => "n_atoms",
        }
    }
}

impl fmt::Display for ParamAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamAxis {
    type Err = DickeError;

    fn from_str(s: &str) -> Result<Self> {
        ParamAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| DickeError::Config(format!("`{s}` is not a ModelParams field")))
    }
}

/// u = λ²/ω.
pub fn coupling_u(params: &ModelParams) -> f64 {
    params.u()
}

/// Critical coupling λc = √(ω ω₀) of the standard Dicke limit.
pub fn lambda_critical(omega: f64, omega0: f64) -> Result<f64> {
    if omega <= 0.0 {
        return Err(DickeError::NonpositiveCavityFrequency);
    }
    if omega0 <= 0.0 {
        return Err(DickeError::UndefinedCriticalCoupling(omega0));
    }
    Ok((omega * omega0).sqrt())
}

/// Rabi frequency Ωc = |u + v| above which the first-order transition at Δ = 0 disappears.
pub fn omega_critical(u: f64, v: f64) -> f64 {
    (u + v).abs()
}

/// Trap and cavity description from which the Hamiltonian couplings are estimated.
///
/// Trap frequencies are in rad/s, lengths in m, mass in kg; the cavity and
/// coupling frequencies are angular MHz like the rest of the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    pub trap_freqs: [f64; 3],
    pub rho_intra: f64,
    pub rho_inter: f64,
    pub atom_mass: f64,
    pub n_atoms: u64,
    pub single_coupling: f64,
    pub cavity_freq: f64,
    pub g0_max: f64,
    pub gamma_excited: f64,
}

impl TrapSpec {
    /// ⁸⁷Rb in a cigar-shaped trap inside a high-finesse cavity; the default
    /// input of the `estimate` subcommand.
    pub fn rb87_example() -> Self {
        TrapSpec {
            trap_freqs: [2.0 * PI * 290.0, 2.0 * PI * 43.0, 2.0 * PI * 277.0],
            rho_intra: 4.2e-9,
            rho_inter: 9.7e-9,
            atom_mass: 1.45e-25,
            n_atoms: 50_000,
            single_coupling: 2.0 * PI * 10.0,
            cavity_freq: 2.51e9,
            g0_max: 2.0 * PI * 10.6,
            gamma_excited: 2.0 * PI * 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trap_freqs.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(DickeError::InvalidTrap("trap frequencies must be positive"));
        }
        if !(self.rho_intra.is_finite() && self.rho_inter.is_finite()) {
            return Err(DickeError::InvalidTrap("scattering lengths must be finite"));
        }
        if !(self.atom_mass.is_finite() && self.atom_mass > 0.0) {
            return Err(DickeError::InvalidTrap("atom mass must be positive"));
        }
        if self.n_atoms == 0 {
            return Err(DickeError::NoAtoms);
        }
        if !(self.single_coupling.is_finite() && self.single_coupling >= 0.0) {
            return Err(DickeError::InvalidTrap("single-atom coupling must be nonnegative"));
        }
        if !(self.cavity_freq.is_finite() && self.cavity_freq > 0.0) {
            return Err(DickeError::NonpositiveCavityFrequency);
        }
        if !(self.g0_max.is_finite() && self.g0_max > 0.0) {
            return Err(DickeError::InvalidTrap("g0 must be positive"));
        }
        if !(self.gamma_excited.is_finite() && self.gamma_excited > 0.0) {
            return Err(DickeError::InvalidTrap("gamma must be positive"));
        }
        Ok(())
    }
}

/// Couplings estimated from a [`TrapSpec`].
///
/// `v` comes from carrying out the Gaussian overlap integrals; `v_printed` is
/// the closed form N(ρ₁ − ρ₁,₂)/(√(2π) d_x d_y d_z m) that is smaller by a
/// factor of two. Both are angular MHz; the `_cyclic` variants divide by 2π
/// for readers who take "MHz" to mean ν rather than ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapEstimate {
    pub v: f64,
    pub v_printed: f64,
    pub v_cyclic: f64,
    pub v_printed_cyclic: f64,
    pub lambda: f64,
    pub u: f64,
    pub n_crit: f64,
    pub omega_critical: f64,
    /// Oscillator lengths d_x, d_y, d_z in m.
    pub oscillator_lengths: [f64; 3],
}

pub fn estimate_from_trap(spec: &TrapSpec) -> Result<TrapEstimate> {
    spec.validate()?;
    let m = spec.atom_mass;
    let d = spec.trap_freqs.map(|w| (HBAR / (m * w)).sqrt());
    let volume = d[0] * d[1] * d[2];
    let n = spec.n_atoms as f64;

    // ∫|φ|⁴ = ∫|φ₁|²|φ₂|² = 1 / ((2π)^{3/2} d_x d_y d_z) for the Gaussian ansatz,
    // and η₁ − χ = (4πħ²/m)(ρ₁ − ρ₁,₂) ∫|φ|⁴ as an energy; divide by ħ for rad/s.
    let overlap = 1.0 / ((2.0 * PI).powf(1.5) * volume);
    let eta_minus_chi = 4.0 * PI * HBAR * (spec.rho_intra - spec.rho_inter) / m * overlap;
    let v = n * eta_minus_chi * 1e-6;
    let v_printed = n * HBAR * (spec.rho_intra - spec.rho_inter) / ((2.0 * PI).sqrt() * volume * m) * 1e-6;

    let lambda = 2.0 * spec.single_coupling * n.sqrt();
    let u = lambda * lambda / spec.cavity_freq;
    let n_crit = spec.gamma_excited * spec.gamma_excited / (2.0 * spec.g0_max * spec.g0_max);

    Ok(TrapEstimate {
        v,
        v_printed,
        v_cyclic: v / (2.0 * PI),
        v_printed_cyclic: v_printed / (2.0 * PI),
        lambda,
        u,
        n_crit,
        omega_critical: omega_critical(u, v),
        oscillator_lengths: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn rb87_trap() -> TrapSpec {
        TrapSpec::rb87_example()
    }

    #[test]
    fn validate_reports_first_violation() {
        let ok = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 10);
        assert_eq!(validate(ok).unwrap(), ok);

        let err = validate(ModelParams { omega: 0.0, ..ok }).unwrap_err();
        assert_eq!(err.to_string(), "nonpositive cavity frequency");
        let err = validate(ModelParams { n_atoms: 0, ..ok }).unwrap_err();
        assert_eq!(err.to_string(), "no atoms");
        assert!(validate(ModelParams { lambda: -1.0, ..ok }).is_err());
        assert!(validate(ModelParams { v: f64::NAN, ..ok }).is_err());
    }

    #[test]
    fn coupling_u_examples() {
        let p = ModelParams::new(2.51e9, 2.81e4, 0.0, 0.0, 0.0, 1);
        assert_relative_eq!(coupling_u(&p), 0.3146, max_relative = 1e-3);
        assert_eq!(coupling_u(&ModelParams { lambda: 0.0, ..p }), 0.0);
        assert_eq!(coupling_u(&ModelParams::new(100.0, 10.0, 0.0, 0.0, 0.0, 1)), 1.0);
    }

    #[test]
    fn lambda_critical_examples() {
        assert_eq!(lambda_critical(4.0, 1.0).unwrap(), 2.0);
        assert_eq!(lambda_critical(1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(lambda_critical(2.51e9, 0.3146).unwrap(), 2.81e4, max_relative = 1e-3);
        assert!(matches!(
            lambda_critical(1.0, 0.0),
            Err(DickeError::UndefinedCriticalCoupling(_))
        ));
    }

    #[test]
    fn omega_critical_examples() {
        assert_eq!(omega_critical(1.0, -2.0), 1.0);
        assert_eq!(omega_critical(1.0, -1.0), 0.0);
        assert_eq!(omega_critical(0.315, 0.0), 0.315);
    }

    #[test]
    fn trap_estimates_match_quoted_values() {
        let est = estimate_from_trap(&rb87_trap()).unwrap();
        assert_relative_eq!(est.lambda, 2.81e4, max_relative = 5e-3);
        assert_relative_eq!(est.u, 0.315, max_relative = 1e-2);
        assert_relative_eq!(est.n_crit, 0.04, max_relative = 1e-2);
        assert_relative_eq!(est.v, -0.238, max_relative = 5e-2);
        assert_relative_eq!(est.v_printed, est.v / 2.0, max_relative = 1e-12);
        assert_relative_eq!(est.v_cyclic, est.v / (2.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn equal_scattering_lengths_give_no_interaction() {
        let spec = TrapSpec {
            rho_inter: 4.2e-9,
            ..rb87_trap()
        };
        assert_eq!(estimate_from_trap(&spec).unwrap().v, 0.0);
    }

    #[test]
    fn invalid_trap_is_rejected() {
        let spec = TrapSpec {
            atom_mass: 0.0,
            ..rb87_trap()
        };
        assert!(estimate_from_trap(&spec).is_err());
    }

    proptest! {
        #[test]
        fn u_is_homogeneous(lambda in 0.0f64..1e3, omega in 1e-3f64..1e3, s in 1e-3f64..1e3) {
            let p = ModelParams::new(omega, lambda, 0.0, 0.0, 0.0, 1);
            let q = ModelParams::new(omega * s * s, lambda * s, 0.0, 0.0, 0.0, 1);
            prop_assert!((p.u() - q.u()).abs() <= 1e-12 * p.u().max(1e-300));
        }

        #[test]
        fn lambda_critical_inverts_u(lambda in 1e-3f64..1e4, omega in 1e-3f64..1e9) {
            let u = lambda * lambda / omega;
            let back = lambda_critical(omega, u).unwrap();
            prop_assert!((back - lambda).abs() <= 1e-12 * lambda);
        }

        #[test]
        fn v_is_linear_in_n_and_scattering_difference(
            n in 1u64..1_000_000,
            k in 1u64..8,
            diff in -2e-8f64..2e-8,
        ) {
            let base = TrapSpec { n_atoms: n, rho_intra: 5e-9, rho_inter: 5e-9 - diff, ..rb87_trap() };
            let scaled = TrapSpec { n_atoms: n * k, ..base };
            let flipped = TrapSpec { rho_inter: 5e-9 + diff, ..base };
            let v0 = estimate_from_trap(&base).unwrap().v;
            let v1 = estimate_from_trap(&scaled).unwrap().v;
            let v2 = estimate_from_trap(&flipped).unwrap().v;
            prop_assert!((v1 - k as f64 * v0).abs() <= 1e-9 * v1.abs().max(1e-300));
            prop_assert!((v2 + v0).abs() <= 1e-9 * v0.abs().max(1e-300));
        }

        #[test]
        fn n_crit_is_scale_invariant(g0 in 1e-2f64..1e3, gamma in 1e-2f64..1e3, s in 1e-3f64..1e3) {
            let a = TrapSpec { g0_max: g0, gamma_excited: gamma, ..rb87_trap() };
            let b = TrapSpec { g0_max: g0 * s, gamma_excited: gamma * s, ..rb87_trap() };
            let na = estimate_from_trap(&a).unwrap().n_crit;
            let nb = estimate_from_trap(&b).unwrap().n_crit;
            prop_assert!((na - nb).abs() <= 1e-12 * na);
        }
    }
}

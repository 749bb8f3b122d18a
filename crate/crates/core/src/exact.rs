//! Finite-N exact diagonalization of the extended Dicke Hamiltonian in a
//! truncated Fock ⊗ Dicke basis.
//!
//! States |n, m⟩ with photon number n ≤ n_max and J_z eigenvalue
//! m ∈ {−N/2, …, N/2} are stored photon-major at index n·(N+1) + (m + N/2).
//! Small problems are diagonalized densely; above [`DENSE_LIMIT`] a restarted
//! Lanczos iteration with full reorthogonalization is used.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::model::ModelParams;

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;
/// Default ceiling on the basis dimension.
pub const DEFAULT_DIMENSION_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpinBasis {
    pub n_max: usize,
    pub n_atoms: u64,
}

impl FockSpinBasis {
    pub fn new(n_max: usize, n_atoms: u64) -> Self {
        Self { n_max, n_atoms }
    }

    /// Accepts a signed cutoff, as read from user input.
    pub fn try_new(n_max: i64, n_atoms: u64) -> Result<Self> {
        if n_max < 0 {
            return Err(DickeError::NegativeCutoff);
        }
        if n_atoms == 0 {
            return Err(DickeError::NoAtoms);
        }
        Ok(Self::new(n_max as usize, n_atoms))
    }

    /// Collective spin j = N/2.
    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    pub fn spin_states(&self) -> usize {
        self.n_atoms as usize + 1
    }

    pub fn dimension(&self) -> usize {
        (self.n_max + 1) * self.spin_states()
    }

    /// Index of |n, m = k − j⟩ for k ∈ 0..=N.
    pub fn index(&self, n: usize, k: usize) -> usize {
        n * self.spin_states() + k
    }

    pub fn state(&self, index: usize) -> (usize, usize) {
        (index / self.spin_states(), index % self.spin_states())
    }

    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.j()
    }

    /// ⟨k+1|J₊|k⟩ = √((j − m)(j + m + 1)) = √((N − k)(k + 1)).
    fn spin_ladder(&self, k: usize) -> f64 {
        (((self.n_atoms as usize - k) * (k + 1)) as f64).sqrt()
    }
}

/// Real symmetric matrix in compressed sparse row form, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(c, v)| self.get(c, i) == v))
    }
}

pub fn build_hamiltonian(params: &ModelParams, basis: &FockSpinBasis) -> Result<SparseSymmetric> {
    build_hamiltonian_with_budget(params, basis, DEFAULT_DIMENSION_BUDGET)
}

pub fn build_hamiltonian_with_budget(
    params: &ModelParams,
    basis: &FockSpinBasis,
    budget: usize,
) -> Result<SparseSymmetric> {
    let params = params.validate()?;
    if basis.n_atoms != params.n_atoms {
        return Err(DickeError::Config(format!(
            "basis has N = {} but parameters have N = {}",
            basis.n_atoms, params.n_atoms
        )));
    }
    let dim = basis.dimension();
    if dim > budget {
        return Err(DickeError::BasisTooLarge { dim, budget });
    }

    let n_atoms = params.n_atoms as f64;
    let joint = params.lambda / n_atoms.sqrt() / 2.0;
    let drive = params.omega_rabi / 2.0;
    let spins = basis.spin_states();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(7 * dim);
    let mut vals = Vec::with_capacity(7 * dim);
    row_ptr.push(0);
    for n in 0..=basis.n_max {
        for k in 0..spins {
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(7);
            let mut push = |c: usize, v: f64| {
                if v != 0.0 {
                    entries.push((c, v));
                }
            };
            // Off-diagonal elements are computed from the lower (n, k) of each
            // pair so that H[i][j] and H[j][i] are bitwise identical.
            let photon = |lo: usize| ((lo + 1) as f64).sqrt();
            if n > 0 {
                if k > 0 {
                    push(basis.index(n - 1, k - 1), joint * basis.spin_ladder(k - 1) * photon(n - 1));
                }
                if k + 1 < spins {
                    push(basis.index(n - 1, k + 1), joint * basis.spin_ladder(k) * photon(n - 1));
                }
            }
            if k > 0 {
                push(basis.index(n, k - 1), drive * basis.spin_ladder(k - 1));
            }
            let m = basis.m(k);
            let diag = params.omega * n as f64 + params.delta * m + params.v / n_atoms * m * m;
            entries.push((basis.index(n, k), diag));
            let mut push = |c: usize, v: f64| {
                if v != 0.0 {
                    entries.push((c, v));
                }
            };
            if k + 1 < spins {
                push(basis.index(n, k + 1), drive * basis.spin_ladder(k));
            }
            if n < basis.n_max {
                if k > 0 {
                    push(basis.index(n + 1, k - 1), joint * basis.spin_ladder(k - 1) * photon(n));
                }
                if k + 1 < spins {
                    push(basis.index(n + 1, k + 1), joint * basis.spin_ladder(k) * photon(n));
                }
            }
            for (c, v) in entries {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
    }
    Ok(SparseSymmetric {
        dim,
        row_ptr,
        cols,
        vals,
    })
}

/// Lowest eigenpair of a Hamiltonian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    /// Unit eigenvector; sign fixed so its largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    /// Second-lowest eigenvalue (a Ritz estimate on the iterative path).
    pub next_energy: Option<f64>,
    /// ‖Hx − Ex‖.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to the matrix norm bound.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 120,
            max_restarts: 300,
            tol: 1e-10,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual_norm(h: &SparseSymmetric, x: &[f64], energy: f64) -> f64 {
    let mut hx = vec![0.0; x.len()];
    h.matvec(x, &mut hx);
    hx.iter().zip(x).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt()
}

/// Dense lowest eigenpair.
pub fn dense_ground(h: &SparseSymmetric) -> Eigenpair {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energy = eig.eigenvalues[order[0]];
    let mut vector: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let n = norm(&vector);
    vector.iter_mut().for_each(|x| *x /= n);
    fix_sign(&mut vector);
    let residual = residual_norm(h, &vector, energy);
    Eigenpair {
        energy,
        vector,
        next_energy: order.get(1).map(|&i| eig.eigenvalues[i]),
        residual,
    }
}

/// Deterministic start vector with nonzero weight in every symmetry sector.
fn start_vector(dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75 * 7.0).sin())
        .collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Explicitly restarted Lanczos with full reorthogonalization.
pub fn lanczos_ground(h: &SparseSymmetric, opts: &LanczosOptions) -> Result<Eigenpair> {
    let dim = h.dim();
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let m = opts.krylov_dim.min(dim).max(1);
    let mut start = start_vector(dim);
    let mut last_residual = f64::INFINITY;
    let mut w = vec![0.0; dim];

    for _ in 0..opts.max_restarts.max(1) {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut diag: Vec<f64> = Vec::with_capacity(m);
        let mut off: Vec<f64> = Vec::with_capacity(m);
        loop {
            let k = basis.len() - 1;
            h.matvec(&basis[k], &mut w);
            let a = dot(&w, &basis[k]);
            diag.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if basis.len() == m || b <= 1e-14 * scale {
                break;
            }
            off.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let k = diag.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = diag[i];
            if i + 1 < k {
                t[(i, i + 1)] = off[i];
                t[(i + 1, i)] = off[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let theta = eig.eigenvalues[order[0]];
        let y = eig.eigenvectors.column(order[0]);

        let mut x = vec![0.0; dim];
        for (coef, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(a, b)| *a += coef * b);
        }
        let n = norm(&x);
        x.iter_mut().for_each(|a| *a /= n);
        let residual = residual_norm(h, &x, theta);
        last_residual = residual;
        if residual <= opts.tol * scale || k == dim {
            fix_sign(&mut x);
            return Ok(Eigenpair {
                energy: theta,
                vector: x,
                next_energy: order.get(1).map(|&i| eig.eigenvalues[i]),
                residual,
            });
        }
        start = x;
    }
    Err(DickeError::NoConvergence {
        iterations: opts.max_restarts * m,
        residual: last_residual,
    })
}

/// Dense below [`DENSE_LIMIT`], Lanczos above.
pub fn ground_eigenpair(h: &SparseSymmetric) -> Result<Eigenpair> {
    if h.dim() <= DENSE_LIMIT {
        Ok(dense_ground(h))
    } else {
        lanczos_ground(h, &LanczosOptions::default())
    }
}

/// Ground-state observables at a finite atom number and photon cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub energy: f64,
    pub energy_per_atom: f64,
    /// ⟨a†a⟩.
    pub photon_number: f64,
    pub jz: f64,
    pub jx: f64,
    /// ⟨Π⟩ with Π = exp(iπ(a†a + J_z + N/2)).
    pub parity: f64,
    pub n_max_used: usize,
    pub converged: bool,
    /// E₁ − E₀.
    pub gap: f64,
    pub dimension: usize,
    pub n_atoms: u64,
}

impl ExactSolution {
    pub fn photon_density(&self) -> f64 {
        self.photon_number / self.n_atoms()
    }

    /// 2⟨J_z⟩/N.
    pub fn m_over_n(&self) -> f64 {
        2.0 * self.jz / self.n_atoms()
    }

    fn n_atoms(&self) -> f64 {
        self.n_atoms as f64
    }
}

fn observables(basis: &FockSpinBasis, pair: &Eigenpair, n_atoms: f64) -> ExactSolution {
    let psi = &pair.vector;
    let spins = basis.spin_states();
    let (mut photons, mut jz, mut jx, mut parity) = (0.0, 0.0, 0.0, 0.0);
    for n in 0..=basis.n_max {
        for k in 0..spins {
            let amp = psi[basis.index(n, k)];
            let w = amp * amp;
            photons += w * n as f64;
            jz += w * basis.m(k);
            parity += if (n + k) % 2 == 0 { w } else { -w };
            if k + 1 < spins {
                jx += amp * psi[basis.index(n, k + 1)] * basis.spin_ladder(k);
            }
        }
    }
    ExactSolution {
        energy: pair.energy,
        energy_per_atom: pair.energy / n_atoms,
        photon_number: photons,
        jz,
        jx,
        parity,
        n_max_used: basis.n_max,
        converged: false,
        gap: pair.next_energy.map_or(f64::NAN, |e| e - pair.energy),
        dimension: basis.dimension(),
        n_atoms: basis.n_atoms,
    }
}

/// Ground state at a fixed photon cutoff; `converged` is left false.
pub fn solve_fixed_cutoff(params: &ModelParams, n_max: usize, budget: usize) -> Result<ExactSolution> {
    let basis = FockSpinBasis::new(n_max, params.n_atoms);
    let h = build_hamiltonian_with_budget(params, &basis, budget)?;
    let pair = ground_eigenpair(&h)?;
    Ok(observables(&basis, &pair, params.n_atoms as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffOptions {
    pub eps: f64,
    pub n_max_start: usize,
    pub dimension_budget: usize,
}

impl Default for CutoffOptions {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            n_max_start: 4,
            dimension_budget: DEFAULT_DIMENSION_BUDGET,
        }
    }
}

/// Doubles the cutoff until E₀ changes by less than `eps·max(1, |E₀|)` and
/// ⟨a†a⟩ < 0.8·n_max; returns the observables at the accepted cutoff.
pub fn converge_cutoff(params: &ModelParams, eps: f64, n_max_start: usize) -> Result<ExactSolution> {
    converge_cutoff_with(
        params,
        &CutoffOptions {
            eps,
            n_max_start,
            ..CutoffOptions::default()
        },
    )
}

pub fn converge_cutoff_with(params: &ModelParams, opts: &CutoffOptions) -> Result<ExactSolution> {
    if !(opts.eps > 0.0) {
        return Err(DickeError::Config("eps must be positive".into()));
    }
    let params = params.validate()?;
    let mut n = opts.n_max_start;
    let mut current = solve_fixed_cutoff(&params, n, opts.dimension_budget)?;
    loop {
        let next_n = (2 * n).max(n + 1);
        if FockSpinBasis::new(next_n, params.n_atoms).dimension() > opts.dimension_budget {
            return Ok(current);
        }
        let next = solve_fixed_cutoff(&params, next_n, opts.dimension_budget)?;
        let settled = (current.energy - next.energy).abs() < opts.eps * current.energy.abs().max(1.0);
        if settled && current.photon_number < 0.8 * n as f64 {
            current.converged = true;
            return Ok(current);
        }
        n = next_n;
        current = next;
    }
}

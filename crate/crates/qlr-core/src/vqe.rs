//! Orbital-optimized variational minimization of the UCC energy.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::ops::{apply_hamiltonian, dense_of, spin_square};
use crate::fock::{build_pool, enumerate_basis, expmv, rdm, reference_state, ClusterParameters, DeterminantBasis};
use crate::fock::{ExcitationPool, GeneratorPattern, StateVector};
use crate::integrals::IntegralSet;
use crate::linalg::hermitian_eig;
use crate::partition::{ActiveHamiltonian, SpacePartition};
use crate::rotation::{build_rotation_pool, orbital_gradient, rotate_integrals, rotation_matrix};
use crate::rotation::{KappaParameters, RotationPool, RotationScheme};
use crate::C64;

/// Basis, operator pool and generator pattern of one active space and rank.
#[derive(Debug, Clone)]
pub struct AnsatzContext {
    pub basis: DeterminantBasis,
    pub pool: ExcitationPool,
    pub pattern: GeneratorPattern,
    pub reference: StateVector,
}

impl AnsatzContext {
    pub fn new(part: &SpacePartition, rank: usize) -> Result<Self> {
        let basis = enumerate_basis(part)?;
        let pool = build_pool(part, rank)?;
        let pattern = GeneratorPattern::new(&pool, &basis);
        let reference = reference_state(&basis);
        Ok(AnsatzContext { basis, pool, pattern, reference })
    }

    pub fn n_params(&self) -> usize {
        self.pool.len()
    }

    /// `exp(-t(theta)) |CSF>`.
    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        if theta.len() != self.pool.len() {
            return Err(Error::Dimension(alloc::format!("{} amplitudes for a pool of {}", theta.len(), self.pool.len())));
        }
        expmv(&self.pattern.generator(theta), -1.0, &self.reference)
    }

    /// Active energy `<psi|H_act|psi>`, without the frozen part.
    pub fn active_energy(&self, ham: &ActiveHamiltonian, theta: &[f64]) -> Result<f64> {
        let psi = self.state(theta)?;
        Ok(psi.dotc(&apply_hamiltonian(&self.basis, ham, &psi)).re)
    }

    pub fn energy(&self, ham: &ActiveHamiltonian, theta: &[f64]) -> Result<f64> {
        Ok(self.active_energy(ham, theta)? + ham.e_frozen)
    }

    /// Central finite-difference amplitude gradient.
    pub fn theta_gradient_fd(&self, ham: &ActiveHamiltonian, theta: &[f64], step: f64) -> Result<Vec<f64>> {
        let mut g = vec![0.0; theta.len()];
        let mut t = theta.to_vec();
        for n in 0..theta.len() {
            t[n] = theta[n] + step;
            let ep = self.active_energy(ham, &t)?;
            t[n] = theta[n] - step;
            let em = self.active_energy(ham, &t)?;
            t[n] = theta[n];
            g[n] = (ep - em) / (2.0 * step);
        }
        Ok(g)
    }

    /// Exact amplitude gradient from the Frechet derivative of the exponential.
    pub fn theta_gradient_analytic(&self, ham: &ActiveHamiltonian, theta: &[f64]) -> Result<Vec<f64>> {
        let dim = self.basis.len();
        let t = self.pattern.generator(theta);
        // A = -t is real antisymmetric; M = iA is Hermitian with A = V diag(-i lambda) V^dagger
        let td = t.to_dense();
        let m = DMatrix::from_fn(dim, dim, |i, j| C64::new(0.0, -td[(i, j)]));
        let (lam, v) = hermitian_eig(&m);
        let mu: Vec<C64> = lam.iter().map(|l| C64::new(0.0, -l)).collect();
        let emu: Vec<C64> = mu.iter().map(|z| z.exp()).collect();
        let b = v.adjoint() * &self.reference;
        let psi = &v * DVector::from_fn(dim, |k, _| emu[k] * b[k]);
        let a = v.adjoint() * apply_hamiltonian(&self.basis, ham, &psi);
        let s = DMatrix::from_fn(dim, dim, |j, k| {
            let d = mu[j] - mu[k];
            let phi = if d.norm() < 1e-8 {
                emu[k] * (C64::new(1.0, 0.0) + d * 0.5 + d * d / 6.0)
            } else {
                (emu[j] - emu[k]) / d
            };
            a[j].conj() * phi * b[k]
        });
        let q = v.map(|z| z.conj()) * s * v.transpose();
        Ok(self
            .pattern
            .g
            .iter()
            .map(|g| {
                let mut acc = 0.0;
                for (r, c, x) in g.triplets() {
                    let (r, c) = (r as usize, c as usize);
                    acc += x * (q[(r, c)] - q[(c, r)]).re;
                }
                -2.0 * acc
            })
            .collect())
    }
}

/// Total energy `e_frozen + <CSF|U^dagger H_act U|CSF>` for integrals already rotated.
pub fn energy(ints: &IntegralSet, part: &SpacePartition, rank: usize, theta: &[f64]) -> Result<f64> {
    let ctx = AnsatzContext::new(part, rank)?;
    ctx.energy(&ActiveHamiltonian::new(ints, part), theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeOptions {
    /// Infinity-norm threshold on both gradients.
    pub grad_tol: f64,
    /// Threshold on the energy change of the last accepted step.
    pub energy_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub analytic_theta: bool,
    /// Run an amplitude-only stage before the joint stage.
    pub theta_stage: bool,
    pub optimize_orbitals: bool,
    /// Initial kick over the naive rotation pool of the canonical partition.
    pub initial_kappa: Option<Vec<f64>>,
    pub initial_theta: Option<Vec<f64>>,
}

impl Default for VqeOptions {
    fn default() -> Self {
        VqeOptions {
            grad_tol: 1e-7,
            energy_tol: 1e-9,
            max_iter: 1000,
            fd_step: 1e-5,
            analytic_theta: false,
            theta_stage: true,
            optimize_orbitals: true,
            initial_kappa: None,
            initial_theta: None,
        }
    }
}

/// Optimized ground state in the canonical orbital layout.
#[derive(Debug, Clone)]
pub struct GroundStateRecord {
    /// Canonical partition (inactive, active, virtual contiguous).
    pub partition: SpacePartition,
    /// Canonical orbital `k` is input orbital `permutation[k]`.
    pub permutation: Vec<usize>,
    /// Integrals in the optimized orbitals, canonical order.
    pub integrals: IntegralSet,
    /// Accumulated rotation: optimized orbital `k` is `sum_p orbitals[(p, k)]` canonical orbital `p`.
    pub orbitals: DMatrix<f64>,
    pub rank: usize,
    pub theta: ClusterParameters,
    pub energy: f64,
    pub state: StateVector,
    pub converged: bool,
    pub theta_gradient_norm: f64,
    pub kappa_gradient_norm: f64,
    pub iterations: usize,
}

impl GroundStateRecord {
    pub fn active_hamiltonian(&self) -> ActiveHamiltonian {
        ActiveHamiltonian::new(&self.integrals, &self.partition)
    }

    /// One-electron integrals from input orbitals into the optimized orbitals.
    pub fn transform_property(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let perm = &self.permutation;
        let n = perm.len();
        let p = DMatrix::from_fn(n, n, |a, b| m[(perm[a], perm[b])]);
        self.orbitals.transpose() * p * &self.orbitals
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

struct Problem<'a> {
    ctx: &'a AnsatzContext,
    part: &'a SpacePartition,
    rot: RotationPool,
    opts: &'a VqeOptions,
}

impl Problem<'_> {
    fn energy_at(&self, ints: &IntegralSet, theta: &[f64], kappa: &[f64]) -> Result<f64> {
        let r;
        let ints = if kappa.iter().any(|k| *k != 0.0) {
            r = rotate_integrals(ints, &self.rot, &KappaParameters { kappa: kappa.to_vec() });
            &r
        } else {
            ints
        };
        self.ctx.energy(&ActiveHamiltonian::new(ints, self.part), theta)
    }

    fn gradient(&self, ints: &IntegralSet, theta: &[f64], with_kappa: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let ham = ActiveHamiltonian::new(ints, self.part);
        let gt = if self.opts.analytic_theta {
            self.ctx.theta_gradient_analytic(&ham, theta)?
        } else {
            self.ctx.theta_gradient_fd(&ham, theta, self.opts.fd_step)?
        };
        let gk = if with_kappa && !self.rot.is_empty() {
            let psi = self.ctx.state(theta)?;
            let d = rdm(&self.ctx.basis, &psi, 2);
            orbital_gradient(ints, self.part, &self.rot, &d)
        } else {
            vec![0.0; self.rot.len()]
        };
        Ok((gt, gk))
    }
}

struct StageResult {
    converged: bool,
    iterations: usize,
}

/// BFGS with Armijo backtracking over `(theta, kappa)`; kappa is folded into the
/// integrals after every accepted step.
fn bfgs_stage(
    prob: &Problem,
    ints: &mut IntegralSet,
    orbitals: &mut DMatrix<f64>,
    theta: &mut Vec<f64>,
    with_kappa: bool,
) -> Result<StageResult> {
    let nt = theta.len();
    let nk = if with_kappa { prob.rot.len() } else { 0 };
    let n = nt + nk;
    let opts = prob.opts;
    let mut e = prob.energy_at(ints, theta, &[])?;
    let (gt, gk) = prob.gradient(ints, theta, with_kappa)?;
    let mut g: Vec<f64> = gt.into_iter().chain(gk.into_iter().take(nk)).collect();
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut first = true;
    let mut de = f64::INFINITY;
    for it in 0..opts.max_iter {
        if inf_norm(&g) < opts.grad_tol && (de.abs() < opts.energy_tol || it == 0) {
            return Ok(StageResult { converged: true, iterations: it });
        }
        let gv = DVector::from_column_slice(&g);
        let mut p = -(&hinv * &gv);
        let mut slope = p.dot(&gv);
        if slope >= 0.0 {
            hinv = DMatrix::identity(n, n);
            p = -gv.clone();
            slope = p.dot(&gv);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        // energy differences below this are rounding noise
        let noise = 64.0 * f64::EPSILON * e.abs().max(1.0);
        for _ in 0..60 {
            let st: Vec<f64> = (0..nt).map(|k| theta[k] + alpha * p[k]).collect();
            let sk: Vec<f64> = (0..nk).map(|k| alpha * p[nt + k]).collect();
            let et = prob.energy_at(ints, &st, &sk)?;
            // past the noise floor only the gradient carries information, so Armijo is relaxed
            if et <= e + 1e-4 * alpha * slope || (-alpha * slope < noise && et <= e + noise) {
                accepted = Some((st, sk, et));
                break;
            }
            alpha *= 0.5;
        }
        let Some((st, sk, et)) = accepted else {
            log::warn!("line search failed at iteration {} with gradient {:e}", it, inf_norm(&g));
            return Ok(StageResult { converged: inf_norm(&g) < opts.grad_tol, iterations: it });
        };
        if nk > 0 && sk.iter().any(|x| *x != 0.0) {
            let kp = KappaParameters { kappa: sk.clone() };
            let x = rotation_matrix(ints.n_orb, &prob.rot, &kp);
            *ints = crate::rotation::transform_integrals(ints, &x);
            *orbitals = &*orbitals * x;
        }
        *theta = st;
        de = et - e;
        e = et;
        let (gt, gk) = prob.gradient(ints, theta, with_kappa)?;
        let gn: Vec<f64> = gt.into_iter().chain(gk.into_iter().take(nk)).collect();
        let s = &p * alpha;
        let y = DVector::from_column_slice(&gn) - gv;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() {
            if first {
                hinv *= sy / y.dot(&y);
                first = false;
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy^T + hy s^T) + (rho^2 yHy + rho) s s^T
            hinv -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            hinv += &s * s.transpose() * (rho * rho * yhy + rho);
        }
        g = gn;
    }
    Ok(StageResult { converged: inf_norm(&g) < opts.grad_tol && de.abs() < opts.energy_tol, iterations: opts.max_iter })
}

/// Two-stage oo-UCC optimization: amplitudes first, then amplitudes with orbitals.
pub fn optimize(ints: &IntegralSet, part: &SpacePartition, rank: usize, opts: &VqeOptions) -> Result<GroundStateRecord> {
    let permutation = part.canonical_permutation();
    let cpart = part.canonical();
    let mut cur = ints.permuted(&permutation);
    let ctx = AnsatzContext::new(&cpart, rank)?;
    let rot = build_rotation_pool(&cpart, RotationScheme::Naive);
    let n = ints.n_orb;
    let mut orbitals = DMatrix::<f64>::identity(n, n);
    if let Some(k0) = &opts.initial_kappa {
        if k0.len() != rot.len() {
            return Err(Error::Dimension(alloc::format!("initial kappa has {} entries for {} rotations", k0.len(), rot.len())));
        }
        let x = rotation_matrix(n, &rot, &KappaParameters { kappa: k0.clone() });
        cur = crate::rotation::transform_integrals(&cur, &x);
        orbitals = x;
    }
    let mut theta = match &opts.initial_theta {
        Some(t) if t.len() == ctx.n_params() => t.clone(),
        Some(t) => return Err(Error::Dimension(alloc::format!("initial theta has {} entries for {} operators", t.len(), ctx.n_params()))),
        None => vec![0.0; ctx.n_params()],
    };
    let prob = Problem { ctx: &ctx, part: &cpart, rot, opts };
    let mut iterations = 0;
    let mut converged = true;
    let joint = opts.optimize_orbitals && !prob.rot.is_empty();
    if opts.theta_stage || !joint {
        let r = bfgs_stage(&prob, &mut cur, &mut orbitals, &mut theta, false)?;
        iterations += r.iterations;
        converged = r.converged;
    }
    if joint {
        let r = bfgs_stage(&prob, &mut cur, &mut orbitals, &mut theta, true)?;
        iterations += r.iterations;
        converged = r.converged;
    }
    let (gt, gk) = prob.gradient(&cur, &theta, joint)?;
    let state = ctx.state(&theta)?;
    let ham = ActiveHamiltonian::new(&cur, &cpart);
    let energy = state.dotc(&apply_hamiltonian(&ctx.basis, &ham, &state)).re + ham.e_frozen;
    Ok(GroundStateRecord {
        partition: cpart,
        permutation,
        integrals: cur,
        orbitals,
        rank,
        theta: ClusterParameters { theta, rank },
        energy,
        state,
        converged,
        theta_gradient_norm: inf_norm(&gt),
        kappa_gradient_norm: inf_norm(&gk),
        iterations,
    })
}

/// Singlet eigenpairs of the active Hamiltonian (energies include the frozen part).
pub fn casci(ints: &IntegralSet, part: &SpacePartition) -> Result<Vec<(f64, StateVector)>> {
    let basis = enumerate_basis(part)?;
    let ham = ActiveHamiltonian::new(ints, part);
    let h = dense_of(basis.len(), |x| apply_hamiltonian(&basis, &ham, x));
    let (vals, vecs) = hermitian_eig(&h);
    let mut out = Vec::new();
    for (k, &e) in vals.iter().enumerate() {
        let v: StateVector = vecs.column(k).into_owned();
        if spin_square(&basis, &v) < 1e-6 {
            out.push((e + ham.e_frozen, v));
        }
    }
    Ok(out)
}

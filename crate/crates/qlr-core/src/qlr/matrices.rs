//! Response matrices `A`, `B`, `Sigma`, `Delta` for the eight operator parametrizations.
//!
//! Rows and columns list the orbital rotations first, then the active-space
//! excitations. Literal elements are evaluated for row index >= column index and
//! mirrored, `A` and `Sigma` by conjugate transpose and `B` by transpose.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::ext::{ExtEngine, ExtState, Key};
use super::{Method, MethodId};
use crate::error::{Error, Result};
use crate::fock::{build_pool, reference_state, ExcitationPool};
use crate::linalg::hermitian_violation;
use crate::rotation::{build_rotation_pool, RotationPool};
use crate::vqe::GroundStateRecord;
use crate::C64;

/// Tolerance of the Hermiticity check on Hamiltonian matrices between trial vectors.
pub const HERMITIAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Orbital rotation `(p, q)` in canonical orbital numbering.
    Rotation(usize, usize),
    /// Active-space excitation operator `n` of the pool.
    Excitation(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrices {
    pub method: MethodId,
    pub a: DMatrix<C64>,
    pub b: DMatrix<C64>,
    pub sigma: DMatrix<C64>,
    pub delta: DMatrix<C64>,
    pub rotations: Vec<(usize, usize)>,
    pub n_excitations: usize,
    /// Frobenius norm of the discarded `B^{Gq}` block of a Hermitified method.
    pub herm_diagnostic: Option<f64>,
}

impl ResponseMatrices {
    pub fn n_rotations(&self) -> usize {
        self.rotations.len()
    }

    pub fn dim(&self) -> usize {
        self.rotations.len() + self.n_excitations
    }

    pub fn row_kind(&self, i: usize) -> RowKind {
        let nq = self.rotations.len();
        if i < nq {
            RowKind::Rotation(self.rotations[i].0, self.rotations[i].1)
        } else {
            RowKind::Excitation(i - nq)
        }
    }
}

fn zeros(r: usize, c: usize) -> DMatrix<C64> {
    DMatrix::zeros(r, c)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Ground state, CSF and operator applications shared by every block.
pub(crate) struct Workspace<'a> {
    pub eng: ExtEngine<'a>,
    pub psi: ExtState,
    pub csf: ExtState,
    pub e0: f64,
    pub rot: RotationPool,
    pub n_g: usize,
}

impl<'a> Workspace<'a> {
    pub fn new(rec: &'a GroundStateRecord, pool: &'a ExcitationPool, rot: RotationPool) -> Result<Self> {
        if pool.len() != rec.theta.theta.len() || rec.theta.rank != rec.rank {
            return Err(Error::Dimension(alloc::format!(
                "record holds {} rank-{} amplitudes for a rank-{} pool of {}",
                rec.theta.theta.len(),
                rec.theta.rank,
                rec.rank,
                pool.len()
            )));
        }
        let eng = ExtEngine::new(&rec.integrals, &rec.partition, pool, &rec.theta.theta);
        let k = eng.k;
        let psi = eng.embed(&rec.state);
        let csf = eng.embed(&reference_state(eng.basis(k, k)));
        Ok(Workspace { eng, psi, csf, e0: rec.energy, rot, n_g: pool.len() })
    }

    pub fn n_q(&self) -> usize {
        self.rot.len()
    }

    /// `q_l |x>` with `q_pq = E_pq / sqrt 2`.
    pub fn q(&self, l: usize, x: &ExtState) -> ExtState {
        let (p, q) = self.rot.pairs[l];
        let mut y = self.eng.apply_e(p, q, x);
        y.scale(re(FRAC_1_SQRT_2));
        y
    }

    pub fn qd(&self, l: usize, x: &ExtState) -> ExtState {
        let (p, q) = self.rot.pairs[l];
        let mut y = self.eng.apply_e(q, p, x);
        y.scale(re(FRAC_1_SQRT_2));
        y
    }

    pub fn g(&self, n: usize, x: &ExtState) -> ExtState {
        self.eng.apply_g(n, false, x)
    }

    pub fn gd(&self, n: usize, x: &ExtState) -> ExtState {
        self.eng.apply_g(n, true, x)
    }

    pub fn u(&self, x: &ExtState) -> Result<ExtState> {
        self.eng.apply_u(x, false)
    }

    pub fn ud(&self, x: &ExtState) -> Result<ExtState> {
        self.eng.apply_u(x, true)
    }

    /// `P_K H |y>` for the union `K` of the keys of `xs`.
    pub fn h_onto(&self, xs: &[&ExtState], y: &ExtState) -> ExtState {
        let keys: BTreeSet<Key> = xs.iter().flat_map(|x| x.keys().copied()).collect();
        let keys: Vec<Key> = keys.into_iter().collect();
        self.eng.h_apply(y, &keys)
    }

    /// `<x_i|H|y_j>`.
    pub fn hmat(&self, xs: &[ExtState], ys: &[ExtState]) -> DMatrix<C64> {
        let refs: Vec<&ExtState> = xs.iter().collect();
        let mut m = zeros(xs.len(), ys.len());
        for (j, y) in ys.iter().enumerate() {
            let hy = self.h_onto(&refs, y);
            for (i, x) in xs.iter().enumerate() {
                m[(i, j)] = x.dot(&hy);
            }
        }
        m
    }

    pub fn smat(xs: &[ExtState], ys: &[ExtState]) -> DMatrix<C64> {
        DMatrix::from_fn(xs.len(), ys.len(), |i, j| xs[i].dot(&ys[j]))
    }

    /// `<x_ij|H|0>` for a grid of vectors, sharing one projected `H|0>`.
    pub fn h_to_psi(&self, grid: &[Vec<ExtState>]) -> DMatrix<C64> {
        let refs: Vec<&ExtState> = grid.iter().flatten().collect();
        let hpsi = self.h_onto(&refs, &self.psi);
        let cols = grid.first().map_or(0, |r| r.len());
        DMatrix::from_fn(grid.len(), cols, |i, j| grid[i][j].dot(&hpsi))
    }

    /// `<x_ij|U^dagger H|0>`, i.e. `<U x_ij|H|0>`, without applying `U` to each vector.
    pub fn uh_to_psi(&self, grid: &[Vec<ExtState>]) -> Result<DMatrix<C64>> {
        let refs: Vec<&ExtState> = grid.iter().flatten().collect();
        let xi = self.ud(&self.h_onto(&refs, &self.psi))?;
        let cols = grid.first().map_or(0, |r| r.len());
        Ok(DMatrix::from_fn(grid.len(), cols, |i, j| grid[i][j].dot(&xi)))
    }

    /// The reference-sector part of `U^dagger H |0>`.
    pub fn xi_closed(&self) -> Result<ExtState> {
        let key = self.eng.reference_key();
        self.ud(&self.eng.h_apply(&self.psi, &[key]))
    }
}

fn check_hermitian(m: &DMatrix<C64>, block: &'static str) -> Result<()> {
    let v = hermitian_violation(m);
    if v > HERMITIAN_TOL {
        return Err(Error::NonHermitian { block, violation: v });
    }
    Ok(())
}

/// Hamiltonian matrix over one set of trial vectors, checked for Hermiticity.
fn hgram(ws: &Workspace<'_>, xs: &[ExtState], block: &'static str) -> Result<DMatrix<C64>> {
    let m = ws.hmat(xs, xs);
    check_hermitian(&m, block)?;
    Ok(m)
}

struct Blocks {
    aqq: DMatrix<C64>,
    bqq: DMatrix<C64>,
    sqq: DMatrix<C64>,
    agq: DMatrix<C64>,
    bgq: DMatrix<C64>,
    agg: DMatrix<C64>,
    bgg: DMatrix<C64>,
    sgg: DMatrix<C64>,
    /// `<q' U G c|H|0>`, the Hadamard-class part of `B^{Gq}`.
    hadamard: Option<DMatrix<C64>>,
}

fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Rotations acting on the ground state, with the naive double commutators.
fn q_naive(ws: &Workspace<'_>, qv: &[ExtState]) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    let nq = qv.len();
    let hqq = hgram(ws, qv, "rotation")?;
    let down: Vec<Vec<ExtState>> = (0..nq).map(|l| (0..nq).map(|m| ws.qd(m, &qv[l])).collect()).collect();
    let up: Vec<Vec<ExtState>> = (0..nq).map(|l| (0..nq).map(|m| ws.q(m, &qv[l])).collect()).collect();
    let a = hqq - ws.h_to_psi(&down);
    let b = -ws.h_to_psi(&up);
    Ok((a, b, Workspace::smat(qv, qv)))
}

/// Rotations projected onto the ground state.
fn q_proj(ws: &Workspace<'_>, qv: &[ExtState]) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    let nq = qv.len();
    let s = Workspace::smat(qv, qv);
    let a = hgram(ws, qv, "rotation")? - &s * re(ws.e0);
    Ok((a, zeros(nq, nq), s))
}

/// `U G_n |CSF>` vectors.
fn transferred(ws: &Workspace<'_>, gc: &[ExtState]) -> Result<Vec<ExtState>> {
    gc.iter().map(|x| ws.u(x)).collect()
}

/// Diagonal `GG` blocks for state-transfer excitations.
fn gg_st(ws: &Workspace<'_>, uv: &[ExtState]) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    let n = uv.len();
    let a = hgram(ws, uv, "excitation")? - identity(n) * re(ws.e0);
    Ok((a, zeros(n, n), identity(n)))
}

/// Diagonal `GG` blocks for self-consistent excitations.
fn gg_sc(ws: &Workspace<'_>, uv: &[ExtState], gc: &[ExtState]) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    let n = uv.len();
    let xi = ws.xi_closed()?;
    let gxi: Vec<ExtState> = (0..n).map(|m| ws.g(m, &xi)).collect();
    let gdxi: Vec<ExtState> = (0..n).map(|m| ws.gd(m, &xi)).collect();
    let a = hgram(ws, uv, "excitation")? - Workspace::smat(gc, &gxi);
    let b = -Workspace::smat(gc, &gdxi);
    Ok((a, b, identity(n)))
}

/// Diagonal `GG` blocks for projected excitations.
fn gg_proj(ws: &Workspace<'_>, g: &[ExtState]) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    let n = g.len();
    let e0 = re(ws.e0);
    let key = ws.eng.reference_key();
    let hpsi = ws.eng.h_apply(&ws.psi, &[key]);
    let gs: Vec<C64> = g.iter().map(|x| x.dot(&ws.psi)).collect();
    let gh: Vec<C64> = g.iter().map(|x| x.dot(&hpsi)).collect();
    let s = Workspace::smat(g, g);
    let h = hgram(ws, g, "excitation")?;
    let a = DMatrix::from_fn(n, n, |i, j| {
        h[(i, j)] - s[(i, j)] * e0 - gs[i] * gh[j].conj() + gs[i] * gs[j].conj() * e0
    });
    let b = DMatrix::from_fn(n, n, |i, j| gh[i] * gs[j] - gs[i] * gs[j] * e0);
    let sig = DMatrix::from_fn(n, n, |i, j| s[(i, j)] - gs[i] * gs[j].conj());
    Ok((a, b, sig))
}

fn assemble(ws: &Workspace<'_>, method: MethodId) -> Result<Blocks> {
    let nq = ws.n_q();
    let ng = ws.n_g;
    let psi = &ws.psi;
    let csf = &ws.csf;
    let m = method.method;
    let qpsi: Vec<ExtState> = (0..nq).map(|l| ws.q(l, psi)).collect();
    let gc: Vec<ExtState> = (0..ng).map(|n| ws.g(n, csf)).collect();
    let blocks = match m {
        Method::Naive => {
            let (aqq, bqq, sqq) = q_naive(ws, &qpsi)?;
            let g: Vec<ExtState> = (0..ng).map(|n| ws.g(n, psi)).collect();
            let gdv: Vec<ExtState> = (0..ng).map(|n| ws.gd(n, psi)).collect();
            let key = ws.eng.reference_key();
            let hpsi = ws.eng.h_apply(psi, &[key]);
            let ghp: Vec<ExtState> = (0..ng).map(|n| ws.g(n, &hpsi)).collect();
            let gdhp: Vec<ExtState> = (0..ng).map(|n| ws.gd(n, &hpsi)).collect();
            let hgg = hgram(ws, &g, "excitation")?;
            let hdd = hgram(ws, &gdv, "excitation")?;
            let hgd = ws.hmat(&g, &gdv);
            let agg = DMatrix::from_fn(ng, ng, |i, j| {
                hgg[(i, j)] - g[i].dot(&ghp[j]) - gdhp[j].dot(&gdv[i]) + hdd[(j, i)]
            });
            let bgg = DMatrix::from_fn(ng, ng, |i, j| {
                hgd[(i, j)] - g[i].dot(&gdhp[j]) - ghp[j].dot(&gdv[i]) + hgd[(j, i)]
            });
            let sgg = Workspace::smat(&g, &g) - Workspace::smat(&gdv, &gdv).transpose();
            let hgq = ws.hmat(&g, &qpsi);
            let hqd = ws.hmat(&qpsi, &gdv);
            let q_gd: Vec<Vec<ExtState>> = (0..ng).map(|n| (0..nq).map(|l| ws.q(l, &gdv[n])).collect()).collect();
            let q_g: Vec<Vec<ExtState>> = (0..ng).map(|n| (0..nq).map(|l| ws.q(l, &g[n])).collect()).collect();
            let agq = hgq - ws.h_to_psi(&q_gd).map(|z| z.conj());
            let bgq = hqd.transpose() - ws.h_to_psi(&q_g);
            Blocks { aqq, bqq, sqq, agq, bgq, agg, bgg, sgg, hadamard: None }
        }
        Method::St | Method::Sc | Method::StProj => {
            let (aqq, bqq, sqq) = if m == Method::StProj { q_proj(ws, &qpsi)? } else { q_naive(ws, &qpsi)? };
            let uv = transferred(ws, &gc)?;
            let (agg, bgg, sgg) = if m == Method::Sc { gg_sc(ws, &uv, &gc)? } else { gg_st(ws, &uv)? };
            let agq = ws.hmat(&uv, &qpsi);
            let q_u: Vec<Vec<ExtState>> = (0..ng).map(|n| (0..nq).map(|l| ws.q(l, &uv[n])).collect()).collect();
            let had = ws.h_to_psi(&q_u);
            let bgq = if m == Method::StProj { zeros(ng, nq) } else { -&had };
            Blocks { aqq, bqq, sqq, agq, bgq, agg, bgg, sgg, hadamard: Some(had) }
        }
        Method::Proj | Method::AllProj => {
            let (aqq, bqq, sqq) = if m == Method::Proj { q_naive(ws, &qpsi)? } else { q_proj(ws, &qpsi)? };
            let g: Vec<ExtState> = (0..ng).map(|n| ws.g(n, psi)).collect();
            let (agg, bgg, sgg) = gg_proj(ws, &g)?;
            let hgq = ws.hmat(&g, &qpsi);
            let (agq, bgq) = if m == Method::Proj {
                let gs: Vec<C64> = g.iter().map(|x| x.dot(psi)).collect();
                let hq = ws.h_to_psi(core::slice::from_ref(&qpsi));
                let q_g: Vec<Vec<ExtState>> = (0..ng).map(|n| (0..nq).map(|l| ws.q(l, &g[n])).collect()).collect();
                let qgh = ws.h_to_psi(&q_g);
                let agq = DMatrix::from_fn(ng, nq, |n, l| hgq[(n, l)] - gs[n] * hq[(0, l)].conj());
                let bgq = DMatrix::from_fn(ng, nq, |n, l| -qgh[(n, l)] + hq[(0, l)] * gs[n]);
                (agq, bgq)
            } else {
                (hgq, zeros(ng, nq))
            };
            Blocks { aqq, bqq, sqq, agq, bgq, agg, bgg, sgg, hadamard: None }
        }
        Method::AllSt | Method::AllSc => {
            let qc: Vec<ExtState> = (0..nq).map(|l| ws.q(l, csf)).collect();
            let wv = transferred(ws, &qc)?;
            let uv = transferred(ws, &gc)?;
            let hww = hgram(ws, &wv, "rotation")?;
            let agq = ws.hmat(&uv, &wv);
            if m == Method::AllSt {
                let (agg, bgg, sgg) = gg_st(ws, &uv)?;
                Blocks {
                    aqq: hww - identity(nq) * re(ws.e0),
                    bqq: zeros(nq, nq),
                    sqq: identity(nq),
                    agq,
                    bgq: zeros(ng, nq),
                    agg,
                    bgg,
                    sgg,
                    hadamard: None,
                }
            } else {
                let (agg, bgg, sgg) = gg_sc(ws, &uv, &gc)?;
                let down: Vec<Vec<ExtState>> = (0..nq).map(|l| (0..nq).map(|k| ws.qd(k, &qc[l])).collect()).collect();
                let up: Vec<Vec<ExtState>> = (0..nq).map(|l| (0..nq).map(|k| ws.q(k, &qc[l])).collect()).collect();
                let q_gc: Vec<Vec<ExtState>> = (0..ng).map(|n| (0..nq).map(|l| ws.q(l, &gc[n])).collect()).collect();
                Blocks {
                    aqq: hww - ws.uh_to_psi(&down)?,
                    bqq: -ws.uh_to_psi(&up)?,
                    sqq: identity(nq),
                    agq,
                    bgq: -ws.uh_to_psi(&q_gc)?,
                    agg,
                    bgg,
                    sgg,
                    hadamard: None,
                }
            }
        }
    };
    Ok(blocks)
}

/// Lower triangle of `m` mirrored by conjugate transpose (or plain transpose).
fn mirror(m: &DMatrix<C64>, conj: bool) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            m[(i, j)]
        } else if conj {
            m[(j, i)].conj()
        } else {
            m[(j, i)]
        }
    })
}

fn stack(qq: &DMatrix<C64>, gq: &DMatrix<C64>, gg: &DMatrix<C64>, conj: bool) -> DMatrix<C64> {
    let nq = qq.nrows();
    let ng = gg.nrows();
    let mut m = zeros(nq + ng, nq + ng);
    m.view_mut((0, 0), (nq, nq)).copy_from(&mirror(qq, conj));
    m.view_mut((nq, nq), (ng, ng)).copy_from(&mirror(gg, conj));
    m.view_mut((nq, 0), (ng, nq)).copy_from(gq);
    let top = if conj { gq.adjoint() } else { gq.transpose() };
    m.view_mut((0, nq), (nq, ng)).copy_from(&top);
    m
}

/// `X|0>` and `X^dagger|0>` for every row operator of `method`.
fn images(ws: &Workspace<'_>, method: Method) -> Result<(Vec<ExtState>, Vec<ExtState>)> {
    let psi = &ws.psi;
    let csf = &ws.csf;
    let onto_psi = |w: &ExtState| {
        let mut v = psi.clone();
        v.scale(w.dot(psi));
        v
    };
    let (mut fwd, mut adj) = (Vec::new(), Vec::new());
    for l in 0..ws.n_q() {
        match method {
            Method::AllSc => {
                fwd.push(ws.u(&ws.q(l, csf))?);
                adj.push(ws.u(&ws.qd(l, csf))?);
            }
            Method::AllSt => {
                let w = ws.u(&ws.q(l, csf))?;
                adj.push(onto_psi(&w));
                fwd.push(w);
            }
            Method::AllProj | Method::StProj => {
                let w = ws.q(l, psi);
                adj.push(onto_psi(&w));
                fwd.push(w);
            }
            _ => {
                fwd.push(ws.q(l, psi));
                adj.push(ws.qd(l, psi));
            }
        }
    }
    for n in 0..ws.n_g {
        match method {
            Method::Naive => {
                fwd.push(ws.g(n, psi));
                adj.push(ws.gd(n, psi));
            }
            Method::Sc | Method::AllSc => {
                fwd.push(ws.u(&ws.g(n, csf))?);
                adj.push(ws.u(&ws.gd(n, csf))?);
            }
            Method::Proj | Method::AllProj => {
                let mut w = ws.g(n, psi);
                let mean = psi.dot(&w);
                w.axpy(-mean, psi);
                let mut d = onto_psi(&ws.g(n, psi));
                d.axpy(-mean.conj(), psi);
                fwd.push(w);
                adj.push(d);
            }
            _ => {
                let w = ws.u(&ws.g(n, csf))?;
                adj.push(onto_psi(&w));
                fwd.push(w);
            }
        }
    }
    Ok((fwd, adj))
}

/// `Delta_ij = <0|[X_i^dagger, X_j^dagger]|0>`, evaluated rather than assumed zero.
fn delta_matrix(ws: &Workspace<'_>, method: Method) -> Result<DMatrix<C64>> {
    let (fwd, adj) = images(ws, method)?;
    let n = fwd.len();
    let mut d = zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = fwd[i].dot(&adj[j]) - fwd[j].dot(&adj[i]);
            d[(i, j)] = v;
            d[(j, i)] = -v;
        }
    }
    Ok(d)
}

/// Response matrices of `method` at the ground state `rec`.
///
/// Hamiltonian matrices between trial vectors are checked for Hermiticity to
/// [`HERMITIAN_TOL`] as a guard against kernel errors.
pub fn build_matrices(method: MethodId, rec: &GroundStateRecord) -> Result<ResponseMatrices> {
    let pool = build_pool(&rec.partition, rec.rank)?;
    let rot = build_rotation_pool(&rec.partition, method.method.rotation_scheme());
    let ws = Workspace::new(rec, &pool, rot)?;
    let bl = assemble(&ws, method)?;
    let nq = ws.n_q();
    let ng = ws.n_g;
    let mut out = ResponseMatrices {
        method: MethodId::plain(method.method),
        a: stack(&bl.aqq, &bl.agq, &bl.agg, true),
        b: stack(&bl.bqq, &bl.bgq, &bl.bgg, false),
        sigma: stack(&bl.sqq, &zeros(ng, nq), &bl.sgg, true),
        delta: delta_matrix(&ws, method.method)?,
        rotations: ws.rot.pairs.clone(),
        n_excitations: ng,
        herm_diagnostic: None,
    };
    if method.herm {
        let had = bl.hadamard.ok_or_else(|| Error::Method(alloc::format!("{} has no Hadamard-class Gq block", method.method.name())))?;
        out = apply_herm(out, &had);
    }
    Ok(out)
}

fn apply_herm(mut m: ResponseMatrices, had: &DMatrix<C64>) -> ResponseMatrices {
    let nq = m.n_rotations();
    let ng = m.n_excitations;
    let mut agq = m.a.view((nq, 0), (ng, nq)).into_owned();
    agq += had;
    m.a.view_mut((nq, 0), (ng, nq)).copy_from(&agq);
    m.a.view_mut((0, nq), (nq, ng)).copy_from(&agq.adjoint());
    // equals the norm of the dropped mixed B block for SC and ST
    m.herm_diagnostic = Some(had.norm());
    m.b.view_mut((nq, 0), (ng, nq)).fill(C64::new(0.0, 0.0));
    m.b.view_mut((0, nq), (nq, ng)).fill(C64::new(0.0, 0.0));
    m.method.herm = true;
    m
}

/// Approximate Hermitification of already built SC, ST or ST-proj matrices.
///
/// The mixed block becomes `<CSF|G^dagger U^dagger (H q + q^dagger H)|0>` and the
/// mixed `B` block is dropped; its Frobenius norm is kept as the diagnostic.
pub fn hermitify(m: &ResponseMatrices, rec: &GroundStateRecord) -> Result<ResponseMatrices> {
    if !m.method.method.supports_herm() {
        return Err(Error::Method(alloc::format!("{} has no Hadamard-class Gq block", m.method.method.name())));
    }
    if m.method.herm {
        return Ok(m.clone());
    }
    let pool = build_pool(&rec.partition, rec.rank)?;
    let ws = Workspace::new(rec, &pool, build_rotation_pool(&rec.partition, m.method.method.rotation_scheme()))?;
    let gc: Vec<ExtState> = (0..ws.n_g).map(|n| ws.g(n, &ws.csf)).collect();
    let uv = transferred(&ws, &gc)?;
    let q_u: Vec<Vec<ExtState>> = (0..ws.n_g).map(|n| (0..ws.n_q()).map(|l| ws.q(l, &uv[n])).collect()).collect();
    Ok(apply_herm(m.clone(), &ws.h_to_psi(&q_u)))
}

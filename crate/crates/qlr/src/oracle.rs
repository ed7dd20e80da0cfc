//! Brute-force reference: every operator as an explicit full-space matrix or map.
//!
//! Nothing here goes through the block-sparse engine of the core crate. The
//! determinant space, the sign conventions, the Hamiltonian, `U = exp(-t)` and the
//! double commutators are rebuilt from scratch on the full Fock space with a fixed
//! number of alpha and beta electrons. Practical up to a few thousand determinants.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qlr_core::fock::{ExcitationPool, GOperator};
use qlr_core::qlr::solve::isotropic;
use qlr_core::qlr::{build_matrices, oscillator_strengths, polarizability, property_gradient, solve, Method, MethodId};
use qlr_core::rotation::{build_rotation_pool, RotationPool};
use qlr_core::vqe::GroundStateRecord;
use qlr_core::{IntegralSet, OneElectronOperatorSet, C64};

type V = DVector<f64>;

/// All determinants with `na` alpha and `nb` beta electrons in `n` orbitals.
pub struct FullSpace {
    pub n: usize,
    pub dets: Vec<(u64, u64)>,
    index: HashMap<(u64, u64), usize>,
}

fn strings(n: usize, k: usize) -> Vec<u64> {
    (0u64..(1u64 << n)).filter(|s| s.count_ones() as usize == k).collect()
}

/// `a_p^dagger a_q` on one spin string, with the phase of the reordered creators.
fn hop(s: u64, p: usize, q: usize) -> Option<(u64, f64)> {
    if s & (1 << q) == 0 {
        return None;
    }
    let t = s & !(1 << q);
    if t & (1 << p) != 0 {
        return None;
    }
    let below = |x: u64, k: usize| (x & ((1u64 << k) - 1)).count_ones();
    let n = below(s, q) + below(t, p);
    Some((t | (1 << p), if n % 2 == 0 { 1.0 } else { -1.0 }))
}

impl FullSpace {
    pub fn new(n: usize, na: usize, nb: usize) -> Self {
        let mut dets = Vec::new();
        for &a in &strings(n, na) {
            for &b in &strings(n, nb) {
                dets.push((a, b));
            }
        }
        let index = dets.iter().enumerate().map(|(i, d)| (*d, i)).collect();
        FullSpace { n, dets, index }
    }

    pub fn dim(&self) -> usize {
        self.dets.len()
    }

    pub fn find(&self, a: u64, b: u64) -> usize {
        self.index[&(a, b)]
    }

    /// `E_pq |x>`.
    pub fn e(&self, p: usize, q: usize, x: &V) -> V {
        let mut y = V::zeros(self.dim());
        for (j, &(a, b)) in self.dets.iter().enumerate() {
            let c = x[j];
            if c == 0.0 {
                continue;
            }
            if let Some((a2, s)) = hop(a, p, q) {
                y[self.find(a2, b)] += s * c;
            }
            if let Some((b2, s)) = hop(b, p, q) {
                y[self.find(a, b2)] += s * c;
            }
        }
        y
    }

    /// `E_pq` on a sparse vector of `(index, coefficient)` pairs.
    pub fn e_sparse(&self, p: usize, q: usize, x: &[(usize, f64)]) -> Vec<(usize, f64)> {
        let mut y = Vec::new();
        for &(j, c) in x {
            let (a, b) = self.dets[j];
            if let Some((a2, s)) = hop(a, p, q) {
                y.push((self.find(a2, b), s * c));
            }
            if let Some((b2, s)) = hop(b, p, q) {
                y.push((self.find(a, b2), s * c));
            }
        }
        y
    }

    /// Dense matrix of `sum_pq h_pq E_pq + 1/2 sum g_pqrs (E_pq E_rs - d_qr E_ps) + e_core`.
    pub fn hamiltonian(&self, ints: &IntegralSet) -> DMatrix<f64> {
        let n = self.n;
        let dim = self.dim();
        let mut k = ints.h.clone();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    k[(p, q)] -= 0.5 * ints.g.get(p, r, r, q);
                }
            }
        }
        let mut h = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            h[(j, j)] += ints.e_core;
            let unit = [(j, 1.0)];
            let singles: Vec<Vec<(usize, f64)>> = (0..n * n).map(|pq| self.e_sparse(pq / n, pq % n, &unit)).collect();
            for p in 0..n {
                for q in 0..n {
                    for &(i, c) in &singles[p * n + q] {
                        h[(i, j)] += k[(p, q)] * c;
                    }
                    let mut t = Vec::new();
                    for rs in 0..n * n {
                        let v = ints.g.get(p, q, rs / n, rs % n);
                        if v != 0.0 {
                            t.extend(singles[rs].iter().map(|&(i, c)| (i, 0.5 * v * c)));
                        }
                    }
                    for (i, c) in self.e_sparse(p, q, &t) {
                        h[(i, j)] += c;
                    }
                }
            }
        }
        h
    }

    /// `S^2` applied to `x`.
    pub fn spin_square(&self, x: &V) -> V {
        let n = self.n;
        let mut y = V::zeros(self.dim());
        for (j, &(a, b)) in self.dets.iter().enumerate() {
            let c = x[j];
            if c == 0.0 {
                continue;
            }
            let sz = 0.5 * (a.count_ones() as f64 - b.count_ones() as f64);
            // S- S+ + Sz^2 + Sz, with S+ = sum a^dagger_pa a_pb
            y[j] += c * (sz * sz + sz);
            for p in 0..n {
                for q in 0..n {
                    // S- S+ = sum_pq a^dagger_qb a_qa a^dagger_pa a_pb
                    if b & (1 << p) == 0 || a & (1 << p) != 0 {
                        continue;
                    }
                    let (b1, s1) = annihilate(b, p);
                    let (a1, s2) = create(a, p);
                    // alpha string precedes beta string: a beta operator passes every alpha electron
                    let ph = s1 * s2 * if a.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    if a1 & (1 << q) == 0 || b1 & (1 << q) != 0 {
                        continue;
                    }
                    let (a2, s3) = annihilate(a1, q);
                    let (b2, s4) = create(b1, q);
                    let ph2 = s3 * s4 * if a2.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    y[self.find(a2, b2)] += c * ph * ph2;
                }
            }
        }
        y
    }
}

fn annihilate(s: u64, k: usize) -> (u64, f64) {
    let n = (s & ((1u64 << k) - 1)).count_ones();
    (s & !(1 << k), if n % 2 == 0 { 1.0 } else { -1.0 })
}

fn create(s: u64, k: usize) -> (u64, f64) {
    let n = (s & ((1u64 << k) - 1)).count_ones();
    (s | (1 << k), if n % 2 == 0 { 1.0 } else { -1.0 })
}

/// Full-space data attached to one ground-state record.
pub struct Oracle<'a> {
    pub rec: &'a GroundStateRecord,
    pub space: FullSpace,
    pub h: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub psi: V,
    pub csf: V,
    pub hpsi: V,
    pub pool: ExcitationPool,
    ni: usize,
}

/// A linear map together with its adjoint.
pub struct Op<'o> {
    fwd: Box<dyn Fn(&V) -> V + 'o>,
    adj: Box<dyn Fn(&V) -> V + 'o>,
}

impl Op<'_> {
    pub fn apply(&self, x: &V) -> V {
        (self.fwd)(x)
    }

    pub fn apply_adj(&self, x: &V) -> V {
        (self.adj)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Plain,
    Sc,
    St,
    Proj,
    /// `M |0><0|` without the mean subtraction.
    Rho,
}

fn forms(m: Method) -> (Form, Form) {
    match m {
        Method::Naive => (Form::Plain, Form::Plain),
        Method::Sc => (Form::Sc, Form::Plain),
        Method::St => (Form::St, Form::Plain),
        Method::Proj => (Form::Proj, Form::Plain),
        Method::AllSc => (Form::Sc, Form::Sc),
        Method::AllSt => (Form::St, Form::St),
        Method::AllProj => (Form::Proj, Form::Rho),
        Method::StProj => (Form::St, Form::Rho),
    }
}

/// Response matrices in the oracle: `(A, B, Sigma, Delta)` with the lower-triangle convention.
pub struct OracleMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub delta: DMatrix<f64>,
}

impl<'a> Oracle<'a> {
    pub fn new(rec: &'a GroundStateRecord) -> Self {
        let ints = &rec.integrals;
        let half = ints.n_elec / 2;
        let space = FullSpace::new(ints.n_orb, half, half);
        let h = space.hamiltonian(ints);
        let pool = qlr_core::fock::build_pool(&rec.partition, rec.rank).expect("pool");
        let ni = rec.partition.n_inactive();
        let mut me = Oracle {
            rec,
            u: DMatrix::zeros(0, 0),
            psi: V::zeros(0),
            csf: V::zeros(0),
            hpsi: V::zeros(0),
            space,
            h,
            pool,
            ni,
        };
        let dim = me.space.dim();
        let mut t = DMatrix::zeros(dim, dim);
        for (n, th) in rec.theta.theta.iter().enumerate() {
            for term in &me.pool.ops[n].terms {
                for j in 0..dim {
                    let mut y = vec![(j, 1.0)];
                    for &(p, q) in term.ops.iter().rev() {
                        y = me.space.e_sparse(p + ni, q + ni, &y);
                    }
                    // G - G^dagger, the adjoint entries by transposition
                    for (i, c) in y {
                        t[(i, j)] += th * term.coef * c;
                        t[(j, i)] -= th * term.coef * c;
                    }
                }
            }
        }
        me.u = (-t).exp();
        let occ = (1u64 << half) - 1;
        let mut csf = V::zeros(dim);
        csf[me.space.find(occ, occ)] = 1.0;
        me.psi = &me.u * &csf;
        me.hpsi = &me.h * &me.psi;
        me.csf = csf;
        me
    }

    fn term(&self, op: &GOperator, adjoint: bool, x: &V) -> V {
        let mut out = V::zeros(x.len());
        for t in &op.terms {
            let mut y = x.clone();
            if adjoint {
                for &(p, q) in &t.ops {
                    y = self.space.e(q + self.ni, p + self.ni, &y);
                }
            } else {
                for &(p, q) in t.ops.iter().rev() {
                    y = self.space.e(p + self.ni, q + self.ni, &y);
                }
            }
            out += y * t.coef;
        }
        out
    }

    pub fn g_full(&self, n: usize, x: &V) -> V {
        self.term(&self.pool.ops[n], false, x)
    }

    pub fn gd_full(&self, n: usize, x: &V) -> V {
        self.term(&self.pool.ops[n], true, x)
    }

    /// Ground state of `rec` embedded in the full space, for comparison with `psi`.
    pub fn embedded_record_state(&self) -> V {
        let part = &self.rec.partition;
        let ni = part.n_inactive();
        let nact = part.n_active();
        let k = part.n_act_occ();
        let basis = qlr_core::fock::DeterminantBasis::new(nact, k, k).unwrap();
        let inact = (1u64 << ni) - 1;
        let mut v = V::zeros(self.space.dim());
        for i in 0..basis.len() {
            let (a, b) = basis.det(i);
            v[self.space.find(inact | (a << ni), inact | (b << ni))] = self.rec.state[i].re;
        }
        v
    }

    fn wrap<'o>(&'o self, form: Form, m: Op<'o>) -> Op<'o> {
        match form {
            Form::Plain => m,
            Form::Sc => {
                let m = std::rc::Rc::new(m);
                let m2 = m.clone();
                Op {
                    fwd: Box::new(move |x| &self.u * m.apply(&(self.u.transpose() * x))),
                    adj: Box::new(move |x| &self.u * m2.apply_adj(&(self.u.transpose() * x))),
                }
            }
            Form::St => {
                let w = &self.u * m.apply(&self.csf);
                let w2 = w.clone();
                Op {
                    fwd: Box::new(move |x| &w * self.psi.dot(x)),
                    adj: Box::new(move |x| &self.psi * w2.dot(x)),
                }
            }
            Form::Proj | Form::Rho => {
                let mpsi = m.apply(&self.psi);
                let mean = if form == Form::Proj { self.psi.dot(&mpsi) } else { 0.0 };
                let mpsi2 = mpsi.clone();
                Op {
                    fwd: Box::new(move |x| &mpsi * self.psi.dot(x) - x * mean),
                    adj: Box::new(move |x| &self.psi * mpsi2.dot(x) - x * mean),
                }
            }
        }
    }

    fn q_op(&self, pair: (usize, usize)) -> Op<'_> {
        let (p, q) = pair;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Op { fwd: Box::new(move |x| self.space.e(p, q, x) * s), adj: Box::new(move |x| self.space.e(q, p, x) * s) }
    }

    fn g_op(&self, n: usize) -> Op<'_> {
        Op { fwd: Box::new(move |x| self.g_full(n, x)), adj: Box::new(move |x| self.gd_full(n, x)) }
    }

    pub fn rotation_pool(&self, method: Method) -> RotationPool {
        build_rotation_pool(&self.rec.partition, method.rotation_scheme())
    }

    /// Transformed operators of `method`: rotations first, then excitations.
    pub fn operators(&self, method: Method) -> Vec<Op<'_>> {
        let (rf, qf) = forms(method);
        let rot = self.rotation_pool(method);
        let mut ops: Vec<Op<'_>> = rot.pairs.iter().map(|&pq| self.wrap(qf, self.q_op(pq))).collect();
        ops.extend((0..self.pool.len()).map(|n| self.wrap(rf, self.g_op(n))));
        ops
    }

    /// Generic double-commutator matrices, lower triangle evaluated and mirrored.
    pub fn matrices(&self, method: Method) -> OracleMatrices {
        let ops = self.operators(method);
        let n = ops.len();
        let psi = &self.psi;
        let hpsi = &self.hpsi;
        let x0: Vec<V> = ops.iter().map(|o| o.apply(psi)).collect();
        let xd0: Vec<V> = ops.iter().map(|o| o.apply_adj(psi)).collect();
        let hx0: Vec<V> = x0.iter().map(|v| &self.h * v).collect();
        let hxd0: Vec<V> = xd0.iter().map(|v| &self.h * v).collect();
        let yh: Vec<V> = ops.iter().map(|o| o.apply(hpsi)).collect();
        let ydh: Vec<V> = ops.iter().map(|o| o.apply_adj(hpsi)).collect();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, n);
        let mut s = DMatrix::zeros(n, n);
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let y = &ops[j];
                let y_xd = y.apply(&xd0[i]);
                let yd_xd = y.apply_adj(&xd0[i]);
                a[(i, j)] = x0[i].dot(&hx0[j]) - x0[i].dot(&yh[j]) - hpsi.dot(&y_xd) + xd0[j].dot(&hxd0[i]);
                b[(i, j)] = x0[i].dot(&hxd0[j]) - x0[i].dot(&ydh[j]) - hpsi.dot(&yd_xd) + x0[j].dot(&hxd0[i]);
                s[(i, j)] = x0[i].dot(&x0[j]) - xd0[j].dot(&xd0[i]);
                d[(i, j)] = x0[i].dot(&xd0[j]) - x0[j].dot(&xd0[i]);
                if i != j {
                    a[(j, i)] = a[(i, j)];
                    b[(j, i)] = b[(i, j)];
                    s[(j, i)] = s[(i, j)];
                    d[(j, i)] = -d[(i, j)];
                }
            }
        }
        OracleMatrices { a, b, sigma: s, delta: d }
    }

    /// `-sum d_pq E_pq` applied to `x`, `d` in the orbitals of the record.
    pub fn dipole_apply(&self, d: &DMatrix<f64>, x: &V) -> V {
        let n = self.space.n;
        let mut out = V::zeros(x.len());
        for p in 0..n {
            for q in 0..n {
                if d[(p, q)] != 0.0 {
                    out -= self.space.e(p, q, x) * d[(p, q)];
                }
            }
        }
        out
    }

    /// `(<0|[X_l, mu]|0>, <0|[X_l^dagger, mu]|0>)`.
    pub fn gradient(&self, method: Method, d: &DMatrix<f64>) -> (V, V) {
        let ops = self.operators(method);
        let mpsi = self.dipole_apply(d, &self.psi);
        let top = V::from_iterator(ops.len(), ops.iter().map(|o| o.apply_adj(&self.psi).dot(&mpsi) - mpsi.dot(&o.apply(&self.psi))));
        let bottom = V::from_iterator(ops.len(), ops.iter().map(|o| o.apply(&self.psi).dot(&mpsi) - mpsi.dot(&o.apply_adj(&self.psi))));
        (top, bottom)
    }
}

/// Excitation energies, with the residue of each state computed from the explicit
/// operator `O_k = sum Z_l X_l^dagger + Y_l X_l`.
pub struct OracleSpectrum {
    pub omega: Vec<f64>,
    /// `sum_g |<0|[mu_g, O_k]|0>|^2 / <0|[O_k, O_k^dagger]|0>` per state.
    pub residue: Vec<f64>,
}

impl OracleSpectrum {
    pub fn oscillator_strengths(&self) -> Vec<f64> {
        self.omega.iter().zip(&self.residue).map(|(w, r)| 2.0 / 3.0 * w * r).collect()
    }

    /// Isotropic static polarizability from the residues.
    pub fn static_isotropic(&self) -> f64 {
        self.omega.iter().zip(&self.residue).map(|(w, r)| 2.0 / 3.0 * r / w).sum()
    }
}

/// Solves the response eigenproblem with real arithmetic and evaluates residues
/// through explicit operator algebra.
pub fn spectrum(or: &Oracle<'_>, method: Method, m: &OracleMatrices, dipoles: &[DMatrix<f64>; 3]) -> OracleSpectrum {
    let n = m.a.nrows();
    let e2 = {
        let mut e = DMatrix::zeros(2 * n, 2 * n);
        e.view_mut((0, 0), (n, n)).copy_from(&m.a);
        e.view_mut((0, n), (n, n)).copy_from(&m.b);
        e.view_mut((n, 0), (n, n)).copy_from(&m.b);
        e.view_mut((n, n), (n, n)).copy_from(&m.a);
        e
    };
    let s2 = {
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n)).copy_from(&m.sigma);
        s.view_mut((0, n), (n, n)).copy_from(&m.delta);
        s.view_mut((n, 0), (n, n)).copy_from(&(-&m.delta));
        s.view_mut((n, n), (n, n)).copy_from(&(-&m.sigma));
        s
    };
    // restrict to the non-null part of the metric
    let eig = SymmetricEigen::new(s2.clone());
    let keep: Vec<usize> = (0..2 * n).filter(|&k| eig.eigenvalues[k].abs() > 1e-10).collect();
    let x = DMatrix::from_fn(2 * n, keep.len(), |i, c| eig.eigenvectors[(i, keep[c])] / eig.eigenvalues[keep[c]].abs().sqrt());
    let jd: Vec<f64> = keep.iter().map(|&k| eig.eigenvalues[k].signum()).collect();
    let mut red = x.transpose() * &e2 * &x;
    for (r, s) in jd.iter().enumerate() {
        red.row_mut(r).scale_mut(*s);
    }
    let vals = red.complex_eigenvalues();
    let mut omegas: Vec<f64> = vals.iter().filter(|z| z.im.abs() < 1e-8 && z.re > 1e-8).map(|z| z.re).collect();
    omegas.sort_by(|a, b| a.total_cmp(b));
    omegas.dedup_by(|a, b| (*a - *b).abs() < 1e-8 * b.abs().max(1.0));
    let ops = or.operators(method);
    let mus: Vec<V> = dipoles.iter().map(|d| or.dipole_apply(d, &or.psi)).collect();
    let mut out = OracleSpectrum { omega: Vec::new(), residue: Vec::new() };
    let mut jmat = DMatrix::zeros(keep.len(), keep.len());
    for (r, s) in jd.iter().enumerate() {
        jmat[(r, r)] = *s;
    }
    for w in omegas {
        // null space of (E2' - w J)
        let shifted = x.transpose() * &e2 * &x - &jmat * w;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.unwrap();
        let smax = svd.singular_values.max().max(1.0);
        // O_k |0> and O_k^dagger |0> for every null vector
        let mut images: Vec<(V, V)> = Vec::new();
        for (k, sv) in svd.singular_values.iter().enumerate() {
            if *sv > 1e-7 * smax {
                continue;
            }
            let beta = &x * vt.row(k).transpose();
            let (z, y) = (beta.rows(0, n).into_owned(), beta.rows(n, n).into_owned());
            let mut o = V::zeros(or.psi.len());
            let mut od = V::zeros(or.psi.len());
            for (l, op) in ops.iter().enumerate() {
                let xpsi = op.apply(&or.psi);
                let xdpsi = op.apply_adj(&or.psi);
                o += &xdpsi * z[l] + &xpsi * y[l];
                od += &xpsi * z[l] + &xdpsi * y[l];
            }
            images.push((o, od));
        }
        // metric <0|[O_k, O_l^dagger]|0> on the null space; the residue is basis invariant
        let m = images.len();
        let metric = DMatrix::from_fn(m, m, |k, l| images[k].1.dot(&images[l].1) - images[l].0.dot(&images[k].0));
        let me = SymmetricEigen::new(metric);
        let keep: Vec<usize> = (0..m).filter(|&k| me.eigenvalues[k] > 1e-8).collect();
        if keep.is_empty() {
            continue;
        }
        let mut residue = 0.0;
        for mpsi in &mus {
            let t = V::from_iterator(m, images.iter().map(|(o, od)| mpsi.dot(o) - od.dot(mpsi)));
            for &k in &keep {
                let c = me.eigenvectors.column(k).dot(&t);
                residue += c * c / me.eigenvalues[k];
            }
        }
        out.omega.push(w);
        out.residue.push(residue);
    }
    out
}

/// Singlet FCI levels of `ints` with transition dipoles from the ground state.
pub struct Fci {
    pub energies: Vec<f64>,
    /// `sum_g |<0|mu_g|k>|^2` for each excited singlet.
    pub dipole_sq: Vec<f64>,
}

pub fn fci(ints: &IntegralSet, dipoles: &[DMatrix<f64>; 3]) -> Fci {
    let half = ints.n_elec / 2;
    let space = FullSpace::new(ints.n_orb, half, half);
    let h = space.hamiltonian(ints);
    let e = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..space.dim()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let mut states = Vec::new();
    for &k in &order {
        let v: V = e.eigenvectors.column(k).into_owned();
        if v.dot(&space.spin_square(&v)) < 1e-6 {
            states.push((e.eigenvalues[k], v));
        }
    }
    let n = ints.n_orb;
    let mu = |d: &DMatrix<f64>, x: &V| -> V {
        let mut out = V::zeros(x.len());
        for p in 0..n {
            for q in 0..n {
                if d[(p, q)] != 0.0 {
                    out -= space.e(p, q, x) * d[(p, q)];
                }
            }
        }
        out
    };
    let g = &states[0].1;
    let mg: Vec<V> = dipoles.iter().map(|d| mu(d, g)).collect();
    Fci {
        energies: states.iter().map(|s| s.0).collect(),
        dipole_sq: states.iter().map(|(_, v)| mg.iter().map(|m| m.dot(v).powi(2)).sum()).collect(),
    }
}

/// Largest deviations between the core engine and the oracle for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub method: Method,
    /// Over `A`, `B`, `Sigma` and `Delta`.
    pub matrices: f64,
    pub gradient: f64,
    pub omega: f64,
    pub strength: f64,
    /// Relative deviation of the isotropic static polarizability.
    pub polarizability: f64,
    pub n_states: usize,
}

impl MethodComparison {
    pub fn worst(&self) -> f64 {
        self.matrices.max(self.gradient).max(self.omega).max(self.strength).max(self.polarizability)
    }
}

fn max_dev(a: &DMatrix<C64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - C64::new(*y, 0.0)).norm()))
}

/// Groups `(omega, f)` into frequency clusters, summing the strengths.
pub fn clusters(omega: &[f64], f: &[f64]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (&w, &s) in omega.iter().zip(f) {
        match out.last_mut() {
            Some(last) if (w - last.0).abs() < 1e-8 * w.abs().max(1.0) => last.1 += s,
            _ => out.push((w, s)),
        }
    }
    out
}

/// Runs one method through both the core engine and the oracle.
pub fn compare(or: &Oracle<'_>, method: Method, ops: &OneElectronOperatorSet) -> Result<MethodComparison, qlr_core::Error> {
    let rec = or.rec;
    let id = MethodId::plain(method);
    let core = build_matrices(id, rec)?;
    let om = or.matrices(method);
    let matrices = max_dev(&core.a, &om.a).max(max_dev(&core.b, &om.b)).max(max_dev(&core.sigma, &om.sigma)).max(max_dev(&core.delta, &om.delta));
    let labels = ["x", "y", "z"];
    let dip: [DMatrix<f64>; 3] = labels.map(|l| rec.transform_property(&ops.get_or_zero(l)));
    let grads = [
        property_gradient(id, rec, ops, "x")?,
        property_gradient(id, rec, ops, "y")?,
        property_gradient(id, rec, ops, "z")?,
    ];
    let mut gradient: f64 = 0.0;
    for (g, d) in grads.iter().zip(&dip) {
        let (top, bottom) = or.gradient(method, d);
        for i in 0..top.len() {
            gradient = gradient.max((g.top[i] - C64::new(top[i], 0.0)).norm()).max((g.bottom[i] - C64::new(bottom[i], 0.0)).norm());
        }
    }
    let sol = solve(&core)?;
    let f = oscillator_strengths(&sol, &grads);
    let mine = clusters(&sol.omega, &f);
    let reference = spectrum(or, method, &om, &dip);
    let theirs: Vec<(f64, f64)> = reference.omega.iter().copied().zip(reference.oscillator_strengths()).collect();
    let (mut omega, mut strength) = (0.0f64, 0.0f64);
    if mine.len() != theirs.len() {
        omega = f64::INFINITY;
    } else {
        for (a, b) in mine.iter().zip(&theirs) {
            omega = omega.max((a.0 - b.0).abs());
            strength = strength.max((a.1 - b.1).abs());
        }
    }
    let alpha = isotropic(&polarizability(&sol, &grads, 0.0)?);
    let alpha_ref = reference.static_isotropic();
    Ok(MethodComparison {
        method,
        matrices,
        gradient,
        omega,
        strength,
        polarizability: (alpha - alpha_ref).abs() / alpha_ref.abs().max(1.0),
        n_states: mine.len(),
    })
}

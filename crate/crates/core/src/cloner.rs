//! The economical cloning machine: shift isometry, Choi operator, channel
//! application and completion of the isometry to a unitary.
//!
//! Joint indices on output (x) input are `out_rank * sym_dim(N, d) + in_rank`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::states::{embed_product, make_equatorial, occupation_phase, PhaseVector};
use crate::symspace::{
    enumerate_occupations, occupation_rank, sym_dim, OccupationVector, SymVector,
};

pub type Matrix = DMatrix<Complex64>;

/// Largest side length of a dense Choi matrix we are willing to build.
pub const MAX_CHOI_SIDE: usize = 20_000;

const ISOMETRY_TOL: f64 = 1e-10;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// An `N -> N + k d` economical cloner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClonerSpec {
    d: usize,
    n_in: usize,
    k: usize,
}

impl ClonerSpec {
    pub fn new(d: usize, n_in: usize, k: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("qudit dimension must be at least 2, got {d}"));
        }
        if n_in == 0 {
            return domain("a cloner needs at least one input copy");
        }
        n_in.checked_add(k.checked_mul(d).ok_or_else(|| Error::Overflow("k * d".into()))?)
            .ok_or_else(|| Error::Overflow("n_in + k * d".into()))?;
        Ok(Self { d, n_in, k })
    }

    /// The spec with `m_out = n_in + k d`; fails when `m_out - n_in` is not a
    /// non-negative multiple of `d`.
    pub fn from_outputs(d: usize, n_in: usize, m_out: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("qudit dimension must be at least 2, got {d}"));
        }
        match m_out.checked_sub(n_in) {
            Some(excess) if excess % d == 0 => Self::new(d, n_in, excess / d),
            _ => domain(format!(
                "m_out = {m_out} is not of the form n_in + k*d with n_in = {n_in}, d = {d}"
            )),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m_out(&self) -> usize {
        self.n_in + self.k * self.d
    }

    /// The block `(k, ..., k)` carrying the whole weight of the optimal map.
    pub fn uniform_block(&self) -> OccupationVector {
        OccupationVector::uniform(self.d, self.k).expect("d >= 2 checked on construction")
    }
}

/// The isometry `|{n}> -> |{n} + block>` from `N` to `N + block.total()`
/// particles.
pub fn block_isometry(n_in: usize, block: &OccupationVector) -> Result<Matrix> {
    let d = block.d();
    let m_out = n_in + block.total();
    let inputs = enumerate_occupations(n_in, d)?;
    let mut v = Matrix::from_element(sym_dim(m_out, d)?, inputs.len(), zero());
    for (col, occ) in inputs.iter().enumerate() {
        v[(occupation_rank(&occ.add(block)?), col)] = one();
    }
    Ok(v)
}

/// The optimal economical cloner: adds `k` particles to every level.
pub fn shift_isometry(spec: &ClonerSpec) -> Matrix {
    block_isometry(spec.n_in, &spec.uniform_block()).expect("spec validated on construction")
}

/// `V v` for a symmetric input vector.
pub fn apply_isometry(v_mat: &Matrix, input: &SymVector, m_out: usize) -> Result<SymVector> {
    if v_mat.ncols() != input.amplitudes().len() {
        return domain(format!(
            "isometry expects {} input amplitudes, got {}",
            v_mat.ncols(),
            input.amplitudes().len()
        ));
    }
    let x = DVector::from_column_slice(input.amplitudes());
    let y = v_mat * x;
    SymVector::new(m_out, input.d(), y.as_slice().to_vec())
}

/// Clones `N` copies of the equatorial state with the given phases.
pub fn clone(spec: &ClonerSpec, phases: &PhaseVector) -> Result<SymVector> {
    if phases.d() != spec.d {
        return domain(format!(
            "phases describe d={} but the cloner acts on d={}",
            phases.d(),
            spec.d
        ));
    }
    let input = embed_product(&make_equatorial(phases), spec.n_in)?;
    apply_isometry(&shift_isometry(spec), &input, spec.m_out())
}

fn check_block(d: usize, n_in: usize, m_out: usize, block: &OccupationVector) -> Result<()> {
    if block.d() != d {
        return domain(format!("block {block} has {} levels, expected {d}", block.d()));
    }
    if n_in + block.total() != m_out {
        return domain(format!(
            "block {block} has total {}, expected m_out - n_in = {}",
            block.total(),
            m_out as i64 - n_in as i64
        ));
    }
    Ok(())
}

fn choi_side(d: usize, n_in: usize, m_out: usize) -> Result<(usize, usize)> {
    let dim_m = sym_dim(m_out, d)?;
    let dim_n = sym_dim(n_in, d)?;
    match dim_m.checked_mul(dim_n) {
        Some(side) if side <= MAX_CHOI_SIDE => Ok((dim_m, dim_n)),
        _ => Err(Error::Resource(format!(
            "Choi matrix side {dim_m} x {dim_n} exceeds {MAX_CHOI_SIDE}"
        ))),
    }
}

/// `|r_m> = sum_{n} |{m} + {n}> (x) |{n}>`, unnormalized.
pub fn choi_block_vector(
    d: usize,
    n_in: usize,
    m_out: usize,
    block: &OccupationVector,
) -> Result<DVector<Complex64>> {
    check_block(d, n_in, m_out, block)?;
    let (dim_m, dim_n) = choi_side(d, n_in, m_out)?;
    let mut r = DVector::from_element(dim_m * dim_n, zero());
    for (i, occ) in enumerate_occupations(n_in, d)?.iter().enumerate() {
        r[occupation_rank(&occ.add(block)?) * dim_n + i] = one();
    }
    Ok(r)
}

/// Choi operator of a phase-covariant cloner, a convex sum of rank-one
/// blocks.
#[derive(Debug, Clone)]
pub struct ChoiOperator {
    d: usize,
    n_in: usize,
    m_out: usize,
    matrix: Matrix,
    block_weights: BTreeMap<OccupationVector, f64>,
}

/// `R = sum_m p_m |r_m><r_m|`. Weights must be non-negative and sum to one.
pub fn choi_operator(
    d: usize,
    n_in: usize,
    m_out: usize,
    weights: &BTreeMap<OccupationVector, f64>,
) -> Result<ChoiOperator> {
    if weights.is_empty() {
        return domain("at least one block weight is required");
    }
    let mut total = 0.0;
    for (block, &p) in weights {
        check_block(d, n_in, m_out, block)?;
        if !(p.is_finite() && p >= 0.0) {
            return domain(format!("weight {p} of block {block} is not a probability"));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return domain(format!("block weights sum to {total}, expected 1"));
    }
    let (dim_m, dim_n) = choi_side(d, n_in, m_out)?;
    let side = dim_m * dim_n;
    let inputs = enumerate_occupations(n_in, d)?;

    let mut matrix = Matrix::from_element(side, side, zero());
    for (block, &p) in weights.iter().filter(|(_, &p)| p > 0.0) {
        let support: Vec<usize> = inputs
            .iter()
            .enumerate()
            .map(|(i, occ)| Ok(occupation_rank(&occ.add(block)?) * dim_n + i))
            .collect::<Result<_>>()?;
        for &a in &support {
            for &b in &support {
                matrix[(a, b)] += Complex64::new(p, 0.0);
            }
        }
    }
    Ok(ChoiOperator {
        d,
        n_in,
        m_out,
        matrix,
        block_weights: weights.clone(),
    })
}

/// The rank-one Choi operator of the optimal `N -> N + k d` cloner.
pub fn optimal_choi(spec: &ClonerSpec) -> Result<ChoiOperator> {
    let weights = BTreeMap::from([(spec.uniform_block(), 1.0)]);
    choi_operator(spec.d, spec.n_in, spec.m_out(), &weights)
}

impl ChoiOperator {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn m_out(&self) -> usize {
        self.m_out
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn block_weights(&self) -> &BTreeMap<OccupationVector, f64> {
        &self.block_weights
    }

    fn dim_n(&self) -> usize {
        sym_dim(self.n_in, self.d).expect("validated on construction")
    }

    /// Partial trace over the output factor; the identity for a
    /// trace-preserving map.
    pub fn trace_over_output(&self) -> Matrix {
        let dim_n = self.dim_n();
        let dim_m = self.matrix.nrows() / dim_n;
        Matrix::from_fn(dim_n, dim_n, |i, j| {
            (0..dim_m)
                .map(|a| self.matrix[(a * dim_n + i, a * dim_n + j)])
                .sum()
        })
    }

    /// Largest entry of `[R, U(phi)^{(x) M} (x) U*(phi)^{(x) N}]`.
    ///
    /// The rotation is diagonal in the joint occupation basis, so the
    /// commutator entry at `(x, y)` is `R_xy (D_y - D_x)`.
    pub fn commutator_max(&self, phases: &PhaseVector) -> Result<f64> {
        if phases.d() != self.d {
            return domain("phase vector dimension does not match the Choi operator");
        }
        let outs = enumerate_occupations(self.m_out, self.d)?;
        let ins = enumerate_occupations(self.n_in, self.d)?;
        let diag: Vec<Complex64> = outs
            .iter()
            .flat_map(|o| {
                let po = occupation_phase(phases, o.counts());
                ins.iter().map(move |i| {
                    Complex64::from_polar(1.0, po - occupation_phase(phases, i.counts()))
                })
            })
            .collect();
        let mut worst: f64 = 0.0;
        for (x, dx) in diag.iter().enumerate() {
            for (y, dy) in diag.iter().enumerate() {
                let r = self.matrix[(x, y)];
                if r != zero() {
                    worst = worst.max((r * (dy - dx)).norm());
                }
            }
        }
        Ok(worst)
    }

    /// Smallest eigenvalue of the Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of blocks with non-zero weight, which is also the rank.
    pub fn rank(&self) -> usize {
        self.block_weights.values().filter(|&&p| p > 0.0).count()
    }
}

fn hermitian_deviation(m: &Matrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `C(rho) = Tr_N[(1_M (x) rho^T) R]`, with the transpose taken in the
/// canonical occupation basis.
pub fn apply_choi(choi: &ChoiOperator, rho: &Matrix) -> Result<Matrix> {
    let dim_n = choi.dim_n();
    if rho.nrows() != dim_n || rho.ncols() != dim_n {
        return domain(format!(
            "input must be {dim_n} x {dim_n}, got {} x {}",
            rho.nrows(),
            rho.ncols()
        ));
    }
    if hermitian_deviation(rho) > 1e-10 {
        return domain("input density matrix is not Hermitian");
    }
    let tr = rho.trace();
    if (tr - one()).norm() > 1e-10 {
        return domain(format!("input density matrix has trace {tr}"));
    }
    let dim_m = choi.matrix.nrows() / dim_n;
    let r = &choi.matrix;
    // out[a, a'] = sum_{n, n''} rho[n'', n] R[(a, n''), (a', n)]
    Ok(Matrix::from_fn(dim_m, dim_m, |a, ap| {
        let mut acc = zero();
        for n2 in 0..dim_n {
            for n in 0..dim_n {
                let rv = r[(a * dim_n + n2, ap * dim_n + n)];
                if rv != zero() {
                    acc += rho[(n2, n)] * rv;
                }
            }
        }
        acc
    }))
}

/// Completes an isometry to a unitary whose leading columns are `v`.
///
/// Remaining columns come from Gram-Schmidt on the canonical basis vectors in
/// rank order, orthogonalized twice for stability.
pub fn extend_to_unitary(v: &Matrix) -> Result<Matrix> {
    let (rows, cols) = v.shape();
    if cols > rows {
        return domain(format!("a {rows} x {cols} matrix cannot be an isometry"));
    }
    let gram = v.adjoint() * v;
    let dev = (gram - Matrix::identity(cols, cols))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if dev > ISOMETRY_TOL {
        return domain(format!("input is not an isometry: max |V'V - 1| = {dev:e}"));
    }

    let mut basis: Vec<DVector<Complex64>> = v.column_iter().map(|c| c.into_owned()).collect();
    for seed in 0..rows {
        if basis.len() == rows {
            break;
        }
        let mut w = DVector::from_element(rows, zero());
        w[seed] = one();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        // the seed lies (numerically) in the current span
        if norm > 1e-8 {
            basis.push(w / Complex64::new(norm, 0.0));
        }
    }
    if basis.len() != rows {
        return Err(Error::Domain(
            "Gram-Schmidt completion failed to reach full rank".into(),
        ));
    }
    Ok(Matrix::from_columns(&basis))
}

/// Largest entry of `U'U - 1`.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - Matrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

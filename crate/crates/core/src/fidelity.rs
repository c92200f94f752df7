//! Single-qudit and global cloning fidelities, by simulation and in closed
//! form.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::cloner::{clone, ClonerSpec, Matrix};
use crate::error::{domain, Error, Result};
use crate::states::{embed_product, make_equatorial, PhaseVector};
use crate::symspace::{
    enumerate_occupations, ln_multinomial, multinomial, occupation_rank, OccupationVector,
    SymVector,
};

/// Maximum allowed gap between simulated and closed-form fidelities.
pub const CROSS_CHECK_TOL: f64 = 1e-10;

const NORM_TOL: f64 = 1e-10;

/// One-body reduced density matrix of a symmetric `M`-qudit state.
///
/// Entry `(a, b)` is `<a| rho_1 |b> = <Psi| c_b^dag c_a |Psi> / M`: a particle
/// is moved from level `a` to level `b` and the overlap with the original
/// state is taken. This orientation agrees with the explicit partial trace
/// in [`crate::verify::oracle_partial_trace`].
pub fn reduced_onebody(v: &SymVector) -> Result<Matrix> {
    if !v.is_normalized(NORM_TOL) {
        return domain(format!(
            "reduced state needs a normalized input, squared norm is {}",
            v.norm_sqr()
        ));
    }
    let (m, d) = (v.n(), v.d());
    if m == 0 {
        return domain("reduced state of zero particles is undefined");
    }
    let amps = v.amplitudes();
    let mut rho = Matrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for (occ, psi) in v.iter() {
        if psi.norm_sqr() == 0.0 {
            continue;
        }
        for a in 0..d {
            let Some(minus_a) = occ.lowered(a) else {
                continue;
            };
            let na = occ.counts()[a] as f64;
            for b in 0..d {
                let target = minus_a.raised(b);
                let nb = target.counts()[b] as f64;
                let phi = amps[occupation_rank(&target)];
                rho[(a, b)] += phi.conj() * psi * (na * nb).sqrt();
            }
        }
    }
    Ok(rho / Complex64::new(m as f64, 0.0))
}

fn expectation(rho: &Matrix, state: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, ca) in state.iter().enumerate() {
        for (b, cb) in state.iter().enumerate() {
            acc += ca.conj() * rho[(a, b)] * cb;
        }
    }
    acc.re
}

/// `<psi(phi)| Tr_{M-1}[clone] |psi(phi)>`.
pub fn single_fidelity_sim(spec: &ClonerSpec, phases: &PhaseVector) -> Result<f64> {
    let out = clone(spec, phases)?;
    let rho = reduced_onebody(&out)?;
    Ok(expectation(&rho, make_equatorial(phases).amplitudes()))
}

/// `|<psi(phi)^{(x) M} | clone>|^2`.
pub fn global_fidelity_sim(spec: &ClonerSpec, phases: &PhaseVector) -> Result<f64> {
    let out = clone(spec, phases)?;
    let ideal = embed_product(&make_equatorial(phases), spec.m_out())?;
    Ok(ideal.inner(&out)?.norm_sqr())
}

/// Closed form for `1 -> k d + 1`: `1/d + (d-1)(M+d-1)/(M d^2)`.
pub fn closed_single_1m(d: usize, k: usize) -> Result<f64> {
    if d < 2 || k < 1 {
        return domain(format!("need d >= 2 and k >= 1, got d={d}, k={k}"));
    }
    let (df, mf) = (d as f64, (k * d + 1) as f64);
    Ok(1.0 / df + (df - 1.0) * (mf + df - 1.0) / (mf * df * df))
}

/// `weight / d^power` where `weight = scale * multinomial(occ)`, computed
/// exactly when everything fits and through logarithms otherwise.
pub(crate) fn weight_over_power(occ: &OccupationVector, scale: usize, d: usize, power: usize) -> f64 {
    let pow = (d as f64).powi(power as i32);
    if let Ok(w) = multinomial(occ) {
        let v = w as f64 * scale as f64 / pow;
        if v.is_finite() && pow.is_finite() {
            return v;
        }
    }
    (ln_multinomial(occ) + (scale as f64).ln() - power as f64 * (d as f64).ln()).exp()
}

/// `sum_{n: |n| = N-1} sum_{i != j} (N! / prod n!) f(n_i, n_j) / d^{N+1}`,
/// accumulated from the smallest term upward.
fn off_diagonal_sum(d: usize, n_in: usize, f: impl Fn(usize, usize) -> f64) -> Result<f64> {
    let mut terms = Vec::new();
    for occ in enumerate_occupations(n_in - 1, d)? {
        // N! / prod n! = N * (N-1)! / prod n!
        let w = weight_over_power(&occ, n_in, d, n_in + 1);
        let c = occ.counts();
        for i in 0..d {
            for j in (0..d).filter(|&j| j != i) {
                terms.push(w * f(c[i], c[j]));
            }
        }
    }
    terms.sort_by(f64::total_cmp);
    Ok(terms.into_iter().sum())
}

fn check_dn(d: usize, n_in: usize) -> Result<()> {
    if d < 2 || n_in < 1 {
        return domain(format!("need d >= 2 and N >= 1, got d={d}, N={n_in}"));
    }
    Ok(())
}

/// Closed-form single-qudit fidelity of the optimal `N -> N + k d` cloner.
pub fn closed_single_nm(d: usize, n_in: usize, k: usize) -> Result<f64> {
    check_dn(d, n_in)?;
    let m = (n_in + k * d) as f64;
    let kf = k as f64;
    let s = off_diagonal_sum(d, n_in, |ni, nj| {
        let (ni, nj) = (ni as f64, nj as f64);
        ((ni + kf + 1.0) * (nj + kf + 1.0) / ((ni + 1.0) * (nj + 1.0))).sqrt()
    })?;
    Ok(1.0 / d as f64 + s / m)
}

/// Large-`M` limit of [`closed_single_nm`]: optimal estimation of `d - 1`
/// phases from `N` copies.
pub fn phase_estimation_fidelity(d: usize, n_in: usize) -> Result<f64> {
    check_dn(d, n_in)?;
    let s = off_diagonal_sum(d, n_in, |ni, nj| {
        1.0 / (((ni + 1) * (nj + 1)) as f64).sqrt()
    })?;
    Ok(1.0 / d as f64 + s / d as f64)
}

/// Global fidelity of the optimal cloner,
/// `(sum_n sqrt(C(M; n + k) C(N; n)))^2 / d^{M+N}`.
pub fn closed_global_nm(d: usize, n_in: usize, k: usize) -> Result<f64> {
    check_dn(d, n_in)?;
    let spec = ClonerSpec::new(d, n_in, k)?;
    let shift = spec.uniform_block();
    let half = 0.5 * (spec.m_out() + n_in) as f64 * (d as f64).ln();
    let mut terms = Vec::new();
    for occ in enumerate_occupations(n_in, d)? {
        let out = occ.add(&shift)?;
        terms.push((0.5 * (ln_weight(&out) + ln_weight(&occ)) - half).exp());
    }
    terms.sort_by(f64::total_cmp);
    let amp: f64 = terms.into_iter().sum();
    Ok(amp * amp)
}

pub(crate) fn ln_weight(occ: &OccupationVector) -> f64 {
    match multinomial(occ) {
        Ok(w) => (w as f64).ln(),
        Err(_) => ln_multinomial(occ),
    }
}

/// Single-qudit fidelity of the optimal universal (SU(d)-covariant)
/// `N -> M` cloner, the standard closed form from the cloning literature.
/// Used only as a comparison baseline.
pub fn universal_fidelity(d: usize, n_in: usize, m_out: usize) -> Result<f64> {
    if d < 2 || n_in < 1 || m_out < n_in {
        return domain(format!(
            "need d >= 2 and M >= N >= 1, got d={d}, N={n_in}, M={m_out}"
        ));
    }
    let (n, m, df) = (n_in as f64, m_out as f64, d as f64);
    Ok(n / m + (m - n) * (n + 1.0) / (m * (n + df)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Simulation,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub d: usize,
    pub n_in: usize,
    pub m_out: usize,
    pub k: usize,
    pub f_single: f64,
    pub f_global: f64,
    /// Phase-estimation asymptote for the same `d` and `N`.
    pub f_limit: f64,
    pub method: Method,
    /// Closed-form single-qudit value a simulation was checked against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_single_closed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_global_closed: Option<f64>,
}

impl FidelityReport {
    pub fn closed_form(spec: &ClonerSpec) -> Result<Self> {
        Ok(Self {
            d: spec.d(),
            n_in: spec.n_in(),
            m_out: spec.m_out(),
            k: spec.k(),
            f_single: closed_single_nm(spec.d(), spec.n_in(), spec.k())?,
            f_global: closed_global_nm(spec.d(), spec.n_in(), spec.k())?,
            f_limit: phase_estimation_fidelity(spec.d(), spec.n_in())?,
            method: Method::ClosedForm,
            f_single_closed: None,
            f_global_closed: None,
        })
    }

    /// Simulates the cloner and cross-checks against the closed forms; a gap
    /// above [`CROSS_CHECK_TOL`] is an error.
    pub fn simulated(spec: &ClonerSpec, phases: &PhaseVector) -> Result<Self> {
        let closed = Self::closed_form(spec)?;
        let f_single = single_fidelity_sim(spec, phases)?;
        let f_global = global_fidelity_sim(spec, phases)?;
        let gap = (f_single - closed.f_single)
            .abs()
            .max((f_global - closed.f_global).abs());
        if gap > CROSS_CHECK_TOL {
            return Err(Error::Inconsistent(format!(
                "simulation and closed form differ by {gap:e} for d={}, N={}, k={}",
                spec.d(),
                spec.n_in(),
                spec.k()
            )));
        }
        Ok(Self {
            f_single,
            f_global,
            method: Method::Simulation,
            f_single_closed: Some(closed.f_single),
            f_global_closed: Some(closed.f_global),
            ..closed
        })
    }
}

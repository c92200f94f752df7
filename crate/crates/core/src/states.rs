//! Equatorial qudit states, the multi-phase rotation and product-state
//! embeddings into the symmetric subspace.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::symspace::{enumerate_occupations, multinomial_f64, SymVector};

/// The `d - 1` free phases of an equatorial state. Level 0 carries phase 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    /// Builds a phase vector, reducing every angle into `[0, 2pi)`.
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return domain("a phase vector needs at least one phase (d >= 2)");
        }
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return domain(format!("phase {bad} is not finite"));
        }
        let phases = phases
            .into_iter()
            .map(|p| {
                let r = p.rem_euclid(TAU);
                // rem_euclid can round up to exactly TAU for tiny negative inputs
                if r >= TAU {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        Ok(Self { phases })
    }

    pub fn zeros(d: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("qudit dimension must be at least 2, got {d}"));
        }
        Self::new(vec![0.0; d - 1])
    }

    /// Parses comma-separated radians and checks the count against `d`.
    pub fn parse_for(s: &str, d: usize) -> Result<Self> {
        let pv: Self = s.parse()?;
        if pv.d() != d {
            return domain(format!(
                "expected {} phases for d={d}, got {}",
                d - 1,
                pv.phases.len()
            ));
        }
        Ok(pv)
    }

    pub fn d(&self) -> usize {
        self.phases.len() + 1
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Phase of level `level`, with level 0 fixed at zero.
    pub fn phase(&self, level: usize) -> f64 {
        if level == 0 {
            0.0
        } else {
            self.phases[level - 1]
        }
    }

    pub fn negated(&self) -> Self {
        Self::new(self.phases.iter().map(|p| -p).collect()).expect("finite phases stay finite")
    }
}

impl FromStr for PhaseVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let phases = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Domain(format!("bad phase {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(phases)
    }
}

/// A normalized single-qudit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    amplitudes: Vec<Complex64>,
}

impl QuditState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return domain("a qudit needs at least 2 levels");
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("qudit state has squared norm {norm}, expected 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|level>`.
    pub fn basis(d: usize, level: usize) -> Result<Self> {
        if level >= d {
            return domain(format!("level {level} out of range for d={d}"));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); d];
        amplitudes[level] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn d(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// `(1, e^{i phi_1}, ..., e^{i phi_{d-1}}) / sqrt(d)`.
pub fn make_equatorial(phases: &PhaseVector) -> QuditState {
    let d = phases.d();
    let s = 1.0 / (d as f64).sqrt();
    let amplitudes = (0..d)
        .map(|l| Complex64::from_polar(s, phases.phase(l)))
        .collect();
    QuditState { amplitudes }
}

/// The reference state with all phases zero.
pub fn reference_state(d: usize) -> Result<QuditState> {
    Ok(make_equatorial(&PhaseVector::zeros(d)?))
}

/// `|c>^{(x) n}` written in the symmetric basis.
///
/// The amplitude on `{n_i}` is `sqrt(n! / prod n_i!) * prod c_i^{n_i}`.
pub fn embed_product(state: &QuditState, n: usize) -> Result<SymVector> {
    if n == 0 {
        return domain("embedding needs at least one copy");
    }
    let d = state.d();
    let c = state.amplitudes();
    let amplitudes = enumerate_occupations(n, d)?
        .iter()
        .map(|occ| {
            let mono: Complex64 = occ
                .counts()
                .iter()
                .zip(c)
                .map(|(&k, ci)| ci.powu(k as u32))
                .product();
            mono * multinomial_f64(occ).sqrt()
        })
        .collect();
    SymVector::new(n, d, amplitudes)
}

/// Applies `U(phi)^{(x) n}`: the amplitude on `{n_i}` picks up
/// `exp(i sum_j n_j phi_j)`.
pub fn apply_phases_sym(phases: &PhaseVector, v: &SymVector) -> Result<SymVector> {
    if phases.d() != v.d() {
        return domain(format!(
            "phase vector for d={} applied to a d={} state",
            phases.d(),
            v.d()
        ));
    }
    let amplitudes = v
        .iter()
        .map(|(occ, a)| a * Complex64::from_polar(1.0, occupation_phase(phases, occ.counts())))
        .collect();
    SymVector::new(v.n(), v.d(), amplitudes)
}

/// `sum_j counts_j * phi_j`.
pub(crate) fn occupation_phase(phases: &PhaseVector, counts: &[usize]) -> f64 {
    counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &c)| c as f64 * phases.phase(j))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symspace::{expand_to_full, OccupationVector, DEFAULT_ORACLE_CAP};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn overlap(a: &SymVector, b: &SymVector) -> f64 {
        a.inner(b).unwrap().norm_sqr()
    }

    fn max_diff(a: &SymVector, b: &SymVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Dense tensor power of a single-qudit state, site 0 most significant.
    fn full_product(c: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..n {
            out = out.iter().flat_map(|a| c.iter().map(move |b| a * b)).collect();
        }
        out
    }

    #[test]
    fn equatorial_examples() {
        let s = make_equatorial(&PhaseVector::new(vec![0.0]).unwrap());
        let h = 1.0 / 2f64.sqrt();
        assert!(s.amplitudes().iter().all(|a| (a - Complex64::new(h, 0.0)).norm() < 1e-15));

        let s = make_equatorial(&PhaseVector::new(vec![PI, 0.0]).unwrap());
        let t = 1.0 / 3f64.sqrt();
        let expected = [t, -t, t];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_vector_reduces_and_validates() {
        let p = PhaseVector::new(vec![-PI / 2.0, 5.0 * PI]).unwrap();
        assert!((p.phases()[0] - 1.5 * PI).abs() < 1e-12);
        assert!((p.phases()[1] - PI).abs() < 1e-12);
        assert!(PhaseVector::new(vec![f64::NAN]).is_err());
        assert!(PhaseVector::new(vec![]).is_err());
        assert!(PhaseVector::new(vec![-1e-300]).unwrap().phases()[0] < TAU);
    }

    #[test]
    fn phase_vector_parsing() {
        let p = PhaseVector::parse_for("0.7, 1.9", 3).unwrap();
        assert_eq!(p.phases(), &[0.7, 1.9]);
        assert!(PhaseVector::parse_for("0.7", 3).is_err());
        assert!(PhaseVector::parse_for("0.7,abc", 3).is_err());
        assert!("".parse::<PhaseVector>().is_err());
    }

    #[test]
    fn embed_reference_pair_of_qubits() {
        let v = embed_product(&reference_state(2).unwrap(), 2).unwrap();
        let expected = [0.5, 1.0 / 2f64.sqrt(), 0.5];
        for (a, e) in v.amplitudes().iter().zip(expected) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_basis_state() {
        for n in 1..=4 {
            let v = embed_product(&QuditState::basis(3, 0).unwrap(), n).unwrap();
            let top = OccupationVector::new(vec![n, 0, 0]).unwrap();
            assert_eq!(v.amplitude(&top), Complex64::new(1.0, 0.0));
            assert!((v.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn embed_overlap_matches_full_space_oracle() {
        for d in 2..=3 {
            for n in 1..=4 {
                let psi0 = reference_state(d).unwrap();
                let full_psi = full_product(psi0.amplitudes(), n);
                let emb = embed_product(&psi0, n).unwrap();
                for occ in enumerate_occupations(n, d).unwrap() {
                    let basis = expand_to_full(&SymVector::basis(&occ), DEFAULT_ORACLE_CAP).unwrap();
                    let oracle: Complex64 =
                        basis.iter().zip(&full_psi).map(|(b, p)| b.conj() * p).sum();
                    let closed = multinomial_f64(&occ).sqrt() / (d as f64).powf(n as f64 / 2.0);
                    assert!((oracle - Complex64::new(closed, 0.0)).norm() < 1e-13);
                    assert!((emb.amplitude(&occ) - oracle).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn zero_phases_act_as_identity() {
        let v = embed_product(&reference_state(3).unwrap(), 3).unwrap();
        let w = apply_phases_sym(&PhaseVector::zeros(3).unwrap(), &v).unwrap();
        assert_eq!(max_diff(&v, &w), 0.0);
    }

    #[test]
    fn phase_dimension_mismatch() {
        let v = embed_product(&reference_state(3).unwrap(), 2).unwrap();
        assert!(apply_phases_sym(&PhaseVector::zeros(2).unwrap(), &v).is_err());
        assert!(embed_product(&reference_state(2).unwrap(), 0).is_err());
    }

    fn phases(d: usize) -> impl Strategy<Value = PhaseVector> {
        proptest::collection::vec(0.0..TAU, d - 1).prop_map(|p| PhaseVector::new(p).unwrap())
    }

    fn dims() -> impl Strategy<Value = (usize, usize, PhaseVector)> {
        (2usize..=4, 1usize..=5).prop_flat_map(|(d, n)| (Just(d), Just(n), phases(d)))
    }

    proptest! {
        #[test]
        fn orbit_property((d, n, phi) in dims()) {
            let direct = embed_product(&make_equatorial(&phi), n).unwrap();
            let rotated = apply_phases_sym(&phi, &embed_product(&reference_state(d).unwrap(), n).unwrap()).unwrap();
            prop_assert!(max_diff(&direct, &rotated) < 1e-12);
            prop_assert!((direct.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((overlap(&direct, &rotated) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn opposite_phases_cancel((_d, n, phi) in dims()) {
            let v = embed_product(&make_equatorial(&phi), n).unwrap();
            let back = apply_phases_sym(&phi.negated(), &apply_phases_sym(&phi, &v).unwrap()).unwrap();
            prop_assert!(max_diff(&v, &back) < 1e-12);
        }

        #[test]
        fn phases_agree_with_letterwise_action((d, n, phi) in dims()) {
            prop_assume!(d.pow(n as u32) <= DEFAULT_ORACLE_CAP);
            let v = embed_product(&reference_state(d).unwrap(), n).unwrap();
            let sym = expand_to_full(&apply_phases_sym(&phi, &v).unwrap(), DEFAULT_ORACLE_CAP).unwrap();
            let mut full = expand_to_full(&v, DEFAULT_ORACLE_CAP).unwrap();
            for (idx, amp) in full.iter_mut().enumerate() {
                let mut rest = idx;
                for _ in 0..n {
                    *amp *= Complex64::from_polar(1.0, phi.phase(rest % d));
                    rest /= d;
                }
            }
            let diff = sym.iter().zip(&full).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-12);
        }
    }
}

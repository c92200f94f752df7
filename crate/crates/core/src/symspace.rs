//! Occupation-number combinatorics for the symmetric subspace of `n` qudits.
//!
//! A basis state of the symmetric subspace is labelled by how many qudits sit
//! in each level, `{n_0, ..., n_{d-1}}`. All enumerations use one canonical
//! order: lexicographic with the first coordinate descending, so for `n = 2`,
//! `d = 2` the order is `(2,0), (1,1), (0,2)`. Ranks index into that order.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default maximum number of amplitudes materialised by [`expand_to_full`].
pub const DEFAULT_ORACLE_CAP: usize = 4096;

/// Counts of qudits in each of the `d` levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct OccupationVector {
    counts: Vec<usize>,
    total: usize,
}

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.len() < 2 {
            return domain(format!(
                "occupation vector needs at least 2 levels, got {}",
                counts.len()
            ));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    /// All `d` levels holding the same count.
    pub fn uniform(d: usize, count: usize) -> Result<Self> {
        Self::new(vec![count; d])
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn d(&self) -> usize {
        self.counts.len()
    }

    /// Elementwise sum; both vectors must have the same number of levels.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return domain(format!(
                "cannot add occupation vectors with {} and {} levels",
                self.d(),
                other.d()
            ));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(counts)
    }

    /// Moves one particle into `level`. Used by ladder-operator algebra.
    pub(crate) fn raised(&self, level: usize) -> Self {
        let mut counts = self.counts.clone();
        counts[level] += 1;
        Self {
            counts,
            total: self.total + 1,
        }
    }

    /// Moves one particle out of `level`, or `None` if it is empty.
    pub(crate) fn lowered(&self, level: usize) -> Option<Self> {
        let mut counts = self.counts.clone();
        counts[level] = counts[level].checked_sub(1)?;
        Some(Self {
            counts,
            total: self.total - 1,
        })
    }
}

impl TryFrom<Vec<usize>> for OccupationVector {
    type Error = Error;

    fn try_from(counts: Vec<usize>) -> Result<Self> {
        Self::new(counts)
    }
}

impl From<OccupationVector> for Vec<usize> {
    fn from(occ: OccupationVector) -> Self {
        occ.counts
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return domain(format!("qudit dimension must be at least 2, got {d}"));
    }
    Ok(())
}

/// Number of ways to split `n` into `parts >= 1` ordered non-negative parts.
fn compositions(n: usize, parts: usize) -> usize {
    debug_assert!(parts >= 1);
    binomial(n + parts - 1, parts - 1).expect("composition count overflows u128")
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    usize::try_from(acc).ok()
}

/// Dimension of the symmetric subspace of `n` qudits of dimension `d`.
pub fn sym_dim(n: usize, d: usize) -> Result<usize> {
    check_d(d)?;
    binomial(n + d - 1, d - 1)
        .ok_or_else(|| Error::Overflow(format!("sym_dim({n}, {d}) does not fit in usize")))
}

/// All occupation vectors with `d` levels and total `n`, in canonical order.
pub fn enumerate_occupations(n: usize, d: usize) -> Result<Vec<OccupationVector>> {
    check_d(d)?;
    let mut out = Vec::with_capacity(sym_dim(n, d)?);
    let mut counts = vec![0; d];
    fill(&mut counts, 0, n, &mut out);
    Ok(out)
}

fn fill(counts: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<OccupationVector>) {
    let d = counts.len();
    if pos == d - 1 {
        counts[pos] = remaining;
        out.push(OccupationVector {
            counts: counts.to_vec(),
            total: counts.iter().sum(),
        });
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        fill(counts, pos + 1, remaining - c, out);
    }
}

/// `total! / prod(counts_i!)` in exact integer arithmetic.
///
/// Fails with [`Error::Overflow`] once the value leaves `u128`; the product
/// is built as a chain of binomials so intermediate values never exceed the
/// result.
pub fn multinomial(occ: &OccupationVector) -> Result<u128> {
    let mut acc: u128 = 1;
    let mut seen = 0usize;
    for &c in occ.counts() {
        for i in 1..=c {
            seen += 1;
            // after this step acc == (seen)! / (prior counts! * i!), always an integer
            acc = mul_div(acc, seen as u128, i as u128).ok_or_else(|| {
                Error::Overflow(format!("multinomial of {occ} exceeds u128"))
            })?;
        }
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `a * b / c` where the division is known to be exact.
fn mul_div(a: u128, b: u128, c: u128) -> Option<u128> {
    let g = gcd(a, c);
    let (a, c) = (a / g, c / g);
    let h = gcd(b, c);
    let (b, c) = (b / h, c / h);
    debug_assert_eq!(c, 1);
    a.checked_mul(b).map(|v| v / c)
}

/// Natural log of the multinomial coefficient, for regimes past `u128`.
pub fn ln_multinomial(occ: &OccupationVector) -> f64 {
    ln_factorial(occ.total()) - occ.counts().iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Multinomial as a float: exact when it fits in `u128`, log-space otherwise.
pub fn multinomial_f64(occ: &OccupationVector) -> f64 {
    match multinomial(occ) {
        Ok(v) => v as f64,
        Err(_) => ln_multinomial(occ).exp(),
    }
}

/// Position of `occ` in [`enumerate_occupations`]`(occ.total(), occ.d())`.
pub fn occupation_rank(occ: &OccupationVector) -> usize {
    let d = occ.d();
    let mut remaining = occ.total();
    let mut rank = 0;
    for (pos, &c) in occ.counts().iter().enumerate().take(d - 1) {
        let parts_after = d - pos - 1;
        // every larger value at this position comes first
        for v in (c + 1)..=remaining {
            rank += compositions(remaining - v, parts_after);
        }
        remaining -= c;
    }
    rank
}

pub fn occupation_unrank(rank: usize, n: usize, d: usize) -> Result<OccupationVector> {
    let dim = sym_dim(n, d)?;
    if rank >= dim {
        return domain(format!("rank {rank} out of range for sym_dim({n}, {d}) = {dim}"));
    }
    let mut counts = vec![0; d];
    let mut remaining = n;
    let mut rank = rank;
    for (pos, slot) in counts.iter_mut().take(d - 1).enumerate() {
        let parts_after = d - pos - 1;
        let mut v = remaining;
        loop {
            let block = compositions(remaining - v, parts_after);
            if rank < block {
                break;
            }
            rank -= block;
            v -= 1;
        }
        *slot = v;
        remaining -= v;
    }
    counts[d - 1] = remaining;
    OccupationVector::new(counts)
}

/// Complex amplitudes over the symmetric basis of `n` qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct SymVector {
    n: usize,
    d: usize,
    amplitudes: Vec<Complex64>,
}

impl SymVector {
    pub fn new(n: usize, d: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = sym_dim(n, d)?;
        if amplitudes.len() != dim {
            return domain(format!(
                "expected {dim} amplitudes for n={n}, d={d}, got {}",
                amplitudes.len()
            ));
        }
        Ok(Self { n, d, amplitudes })
    }

    pub fn zeros(n: usize, d: usize) -> Result<Self> {
        Ok(Self {
            n,
            d,
            amplitudes: vec![Complex64::new(0.0, 0.0); sym_dim(n, d)?],
        })
    }

    /// The basis state labelled by `occ`.
    pub fn basis(occ: &OccupationVector) -> Self {
        let mut v = Self::zeros(occ.total(), occ.d()).expect("occupation vector has d >= 2");
        v.amplitudes[occupation_rank(occ)] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.amplitudes[occupation_rank(occ)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n || self.d != other.d {
            return domain("inner product between vectors of different shape");
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Pairs of basis label and amplitude in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (OccupationVector, Complex64)> + '_ {
        enumerate_occupations(self.n, self.d)
            .expect("validated on construction")
            .into_iter()
            .zip(self.amplitudes.iter().copied())
    }
}

/// Embeds a symmetric vector into the full `d^n` tensor-product space.
///
/// Basis state `{n_i}` maps to `sqrt(prod n_i! / n!)` on each distinct
/// arrangement of its letters. Site 0 is the most significant base-`d` digit
/// of the returned index.
pub fn expand_to_full(v: &SymVector, cap: usize) -> Result<Vec<Complex64>> {
    let (n, d) = (v.n(), v.d());
    let full = u32::try_from(n)
        .ok()
        .and_then(|n| d.checked_pow(n))
        .filter(|&len| len <= cap)
        .ok_or_else(|| {
            Error::Resource(format!("{d}^{n} amplitudes exceeds oracle cap {cap}"))
        })?;

    let scale: Vec<f64> = enumerate_occupations(n, d)?
        .iter()
        .map(|occ| 1.0 / multinomial_f64(occ).sqrt())
        .collect();

    let mut out = Vec::with_capacity(full);
    let mut counts = vec![0usize; d];
    for idx in 0..full {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut rest = idx;
        for _ in 0..n {
            counts[rest % d] += 1;
            rest /= d;
        }
        let occ = OccupationVector {
            counts: counts.clone(),
            total: n,
        };
        let r = occupation_rank(&occ);
        out.push(v.amplitudes[r] * scale[r]);
    }
    Ok(out)
}

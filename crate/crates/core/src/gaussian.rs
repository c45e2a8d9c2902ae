//! Pure fermionic Gaussian states of an open Majorana chain.
//!
//! A chain of `L` spins maps under Jordan–Wigner onto `2L` Majorana modes
//! with `σˣ_j = i γ_{2j-1} γ_{2j}` and `σᶻ_j σᶻ_{j+1} = i γ_{2j} γ_{2j+1}`.
//! A Gaussian state is fully described by its covariance matrix
//! `Γ_{ab} = (i/2) ⟨[γ_a, γ_b]⟩`, real and antisymmetric, with `Γ² = -1`
//! for pure states.
//!
//! Spin sites are 1-based throughout the public API; Majorana indices are
//! 0-based internally (`γ_{2j-1} ↦ 2j-2`, `γ_{2j} ↦ 2j-1`).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::{skew_spectrum, tridiagonal_eigen, DenseMatrix};
use crate::pfaffian::pfaffian_log;
use crate::scalar::{xlogx, Real};

const ANTISYMMETRY_TOL: f64 = 1e-10;
const PURITY_TOL: f64 = 1e-8;

/// Contiguous block of spins `[first, last]`, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinInterval {
    first: usize,
    last: usize,
}

impl SpinInterval {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first == 0 || first > last {
            return Err(Error::invalid(format!(
                "spin interval [{first}, {last}] must satisfy 1 <= first <= last"
            )));
        }
        Ok(Self { first, last })
    }

    /// The first `len` spins of the chain.
    pub fn prefix(len: usize) -> Result<Self> {
        Self::new(1, len)
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0-based Majorana indices covered by the interval.
    pub fn majorana_indices(&self) -> std::ops::Range<usize> {
        2 * (self.first - 1)..2 * self.last
    }
}

/// Magnitude of a string-operator expectation value, carried in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringCorrelator<T> {
    /// `|⟨σᶻ_j σᶻ_j'⟩|`, or zero when `underflow` is set.
    pub value: T,
    pub log_value: T,
    /// The magnitude is below `e^-700` and was reported as zero.
    pub underflow: bool,
}

impl<T: Real> StringCorrelator<T> {
    fn from_log(log_value: T) -> Self {
        if log_value < T::lit(-700.0) || log_value == T::neg_infinity() {
            Self {
                value: T::zero(),
                log_value,
                underflow: true,
            }
        } else {
            Self {
                value: log_value.exp(),
                log_value,
                underflow: false,
            }
        }
    }
}

/// Pure Gaussian state given by its Majorana covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T> {
    gamma: DenseMatrix<T>,
}

impl<T: Real> GaussianState<T> {
    /// Wraps a covariance matrix after checking shape, antisymmetry, entry
    /// bounds and purity.
    pub fn from_gamma(gamma: DenseMatrix<T>) -> Result<Self> {
        let n = gamma.rows();
        if !gamma.is_square() || n == 0 || n % 2 == 1 {
            return Err(Error::invalid(format!(
                "covariance matrix must be square with even positive order, got {}x{}",
                gamma.rows(),
                gamma.cols()
            )));
        }
        if gamma.antisymmetry_error() > T::tol(ANTISYMMETRY_TOL) {
            return Err(Error::invalid("covariance matrix is not antisymmetric"));
        }
        if gamma.max_abs() > T::one() + T::tol(ANTISYMMETRY_TOL) {
            return Err(Error::invalid("covariance entries must lie in [-1, 1]"));
        }
        let state = Self { gamma };
        let drift = state.purity_error();
        if drift > T::tol(PURITY_TOL) {
            return Err(Error::invalid(format!(
                "covariance matrix is not pure: max|ΓΓ + 1| = {drift:e}"
            )));
        }
        Ok(state)
    }

    /// Product state with every spin polarized along `±x`.
    pub fn x_polarized(l_spin: usize, positive: bool) -> Result<Self> {
        if l_spin == 0 {
            return Err(Error::invalid("chain needs at least one spin"));
        }
        let n = 2 * l_spin;
        let v = if positive { T::one() } else { -T::one() };
        let mut gamma = DenseMatrix::zeros(n, n);
        for j in 0..l_spin {
            gamma[(2 * j, 2 * j + 1)] = v;
            gamma[(2 * j + 1, 2 * j)] = -v;
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> &DenseMatrix<T> {
        &self.gamma
    }

    pub(crate) fn gamma_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.gamma
    }

    pub fn into_gamma(self) -> DenseMatrix<T> {
        self.gamma
    }

    pub fn n_majorana(&self) -> usize {
        self.gamma.rows()
    }

    pub fn l_spin(&self) -> usize {
        self.gamma.rows() / 2
    }

    /// `max |Γ·Γ + 1|`.
    pub fn purity_error(&self) -> T {
        let sq = self.gamma.matmul(&self.gamma);
        let n = self.n_majorana();
        let mut err = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { -T::one() } else { T::zero() };
                err = err.max((sq[(i, j)] - target).abs());
            }
        }
        err
    }

    /// `max |(Γ·Γ)_{r,·} + δ_{r,·}|` over the given rows; `O(n²)` per row.
    pub fn purity_error_rows(&self, rows: &[usize]) -> T {
        let n = self.n_majorana();
        let mut err = T::zero();
        for &r in rows {
            let row = self.gamma.row(r);
            for c in 0..n {
                // (ΓΓ)_{rc} = -Σ_k Γ_rk Γ_ck by antisymmetry.
                let mut acc = T::zero();
                for (&a, &b) in row.iter().zip(self.gamma.row(c)) {
                    acc -= a * b;
                }
                if r == c {
                    acc += T::one();
                }
                err = err.max(acc.abs());
            }
        }
        err
    }

    pub(crate) fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.l_spin() {
            return Err(Error::invalid(format!(
                "spin site {site} outside 1..={}",
                self.l_spin()
            )));
        }
        Ok(())
    }

    /// `⟨σˣ_j⟩ = Γ_{2j-1, 2j}`.
    pub fn sigma_x(&self, site: usize) -> Result<T> {
        self.check_site(site)?;
        Ok(self.gamma[(2 * site - 2, 2 * site - 1)])
    }

    /// Von Neumann entropy (nats) of a block of spins.
    pub fn entanglement_entropy(&self, interval: SpinInterval) -> Result<T> {
        let l = self.l_spin();
        if interval.last > l {
            return Err(Error::invalid(format!(
                "interval [{}, {}] exceeds chain of {l} spins",
                interval.first, interval.last
            )));
        }
        // For a pure state S(A) = S(complement); diagonalize the smaller one.
        let inside: Vec<usize> = interval.majorana_indices().collect();
        let idx: Vec<usize> = if 2 * inside.len() > self.n_majorana() {
            (0..self.n_majorana())
                .filter(|k| !interval.majorana_indices().contains(k))
                .collect()
        } else {
            inside
        };
        entropy_of_indices(&self.gamma, &idx)
    }

    /// Connected `⟨σˣ_j σˣ_j'⟩ - ⟨σˣ_j⟩⟨σˣ_j'⟩` by Wick's theorem.
    pub fn connected_xx(&self, j: usize, jp: usize) -> Result<T> {
        self.check_site(j)?;
        self.check_site(jp)?;
        if j == jp {
            return Err(Error::invalid(
                "connected xx correlator needs distinct sites",
            ));
        }
        let (a1, a2) = (2 * j - 2, 2 * j - 1);
        let (b1, b2) = (2 * jp - 2, 2 * jp - 1);
        let g = &self.gamma;
        Ok(-g[(a1, b1)] * g[(a2, b2)] + g[(a1, b2)] * g[(a2, b1)])
    }

    /// `|⟨σᶻ_j σᶻ_j'⟩|` for `j < j'` from the overlap of the state with
    /// `σᶻ_j σᶻ_j' |ψ⟩`, a Pfaffian of order `4L`.
    pub fn zz_correlator_abs(&self, j: usize, jp: usize) -> Result<StringCorrelator<T>> {
        self.check_site(j)?;
        self.check_site(jp)?;
        if j >= jp {
            return Err(Error::invalid(format!(
                "zz correlator needs j < j', got ({j}, {jp})"
            )));
        }
        let n = self.n_majorana();
        // Λ flips the sign of γ_{2j}, ..., γ_{2j'-1} (1-based).
        let flipped = |k: usize| k + 1 >= 2 * j && k < 2 * jp - 1;
        let g = &self.gamma;
        // [[iΓ, 1], [-1, iΓ']] is congruent, with unit determinant, to the
        // real matrix [[Γ, 1], [-1, -Γ']].
        let m = DenseMatrix::from_fn(2 * n, 2 * n, |r, c| match (r < n, c < n) {
            (true, true) => g[(r, c)],
            (true, false) => {
                if c - n == r {
                    T::one()
                } else {
                    T::zero()
                }
            }
            (false, true) => {
                if r - n == c {
                    -T::one()
                } else {
                    T::zero()
                }
            }
            (false, false) => {
                let (a, b) = (r - n, c - n);
                let s = if flipped(a) != flipped(b) {
                    -T::one()
                } else {
                    T::one()
                };
                -s * g[(a, b)]
            }
        });
        let pf = pfaffian_log(&m)?;
        if pf.sign == 0 {
            return Ok(StringCorrelator::from_log(T::neg_infinity()));
        }
        // |⟨ψ|ψ'⟩|² = |Pf| / 2^L for L spins (2L Majorana modes).
        let log_overlap = T::lit(0.5) * (pf.log_abs - T::lit(self.l_spin() as f64) * T::LN_2());
        Ok(StringCorrelator::from_log(log_overlap))
    }

    /// `|⟨σᶻ_j σᶻ_j'⟩|` as the Pfaffian of the covariance block on the
    /// Majorana string `γ_{2j} ⋯ γ_{2j'-1}`. Independent of
    /// [`Self::zz_correlator_abs`] and cheaper for short strings.
    pub fn zz_correlator_abs_string(&self, j: usize, jp: usize) -> Result<StringCorrelator<T>> {
        self.check_site(j)?;
        self.check_site(jp)?;
        if j >= jp {
            return Err(Error::invalid(format!(
                "zz correlator needs j < j', got ({j}, {jp})"
            )));
        }
        let idx: Vec<usize> = (2 * j - 1..2 * jp - 1).collect();
        let pf = pfaffian_log(&self.gamma.principal_submatrix(&idx))?;
        if pf.sign == 0 {
            return Ok(StringCorrelator::from_log(T::neg_infinity()));
        }
        Ok(StringCorrelator::from_log(pf.log_abs))
    }
}

/// Entropy of the Majorana modes `idx` from the spectrum of `i·Γ_sub`.
pub(crate) fn entropy_of_indices<T: Real>(gamma: &DenseMatrix<T>, idx: &[usize]) -> Result<T> {
    if idx.is_empty() {
        return Ok(T::zero());
    }
    let sub = gamma.principal_submatrix(idx);
    let spectrum = skew_spectrum(&sub)?;
    Ok(entropy_from_spectrum(&spectrum))
}

/// `S = ½ Σ_e H((1 + e)/2)` over all eigenvalues `e` of `i·Γ_sub`, with
/// `|e|` clipped to `[0, 1]` and `|e|` within `1e-12` of one contributing 0.
pub fn entropy_from_spectrum<T: Real>(spectrum: &[T]) -> T {
    let half = T::lit(0.5);
    let cutoff = T::lit(1e-12);
    let mut s = T::zero();
    for &e in spectrum {
        let nu = e.abs().min(T::one());
        if T::one() - nu < cutoff {
            continue;
        }
        let p = (T::one() + nu) * half;
        let q = (T::one() - nu) * half;
        s -= xlogx(p) + xlogx(q);
    }
    (s * half).max(T::zero())
}

/// Ground state of the open Majorana chain `H = -Σ_k t_k i γ_k γ_{k+1}`
/// with `couplings[k] = t_k` (`2L - 1` bonds for `L` spins).
pub fn ground_state_of_chain<T: Real>(couplings: &[T]) -> Result<GaussianState<T>> {
    let n = couplings.len() + 1;
    if n < 2 || n % 2 == 1 {
        return Err(Error::invalid(format!(
            "an open chain of 2L Majorana modes has an odd number of bonds, got {}",
            couplings.len()
        )));
    }
    // The phase rotation D = diag(i^k) turns i·h into the real symmetric
    // tridiagonal matrix with off-diagonal 2 t_k.
    let two = T::lit(2.0);
    let off: Vec<T> = couplings.iter().map(|&t| two * t).collect();
    let eig = tridiagonal_eigen(&vec![T::zero(); n], &off, true)?;
    let scale = eig
        .values
        .iter()
        .fold(T::zero(), |m, &e| m.max(e.abs()))
        .max(T::min_positive_value());
    let gap = eig
        .values
        .iter()
        .fold(T::infinity(), |m, &e| m.min(e.abs()));
    if gap <= T::tol(1e-12) * scale {
        return Err(Error::NumericalFailure(
            "single-particle zero mode: ground state is degenerate".into(),
        ));
    }
    let vt = eig.vectors.expect("eigenvectors requested");
    // sign(T) = Σ_m sgn(e_m) v_m v_mᵀ, assembled row by row.
    let mut weighted = vt.clone();
    for (m, &e) in eig.values.iter().enumerate() {
        if e < T::zero() {
            for x in weighted.row_mut(m) {
                *x = -*x;
            }
        }
    }
    let sign_t = vt.transpose().matmul(&weighted);
    // Γ = i D sign(T) D†, i.e. Γ_ab = i^{1+a-b} sign(T)_ab; only odd a-b survive.
    let mut gamma = DenseMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let d = a as i64 - b as i64;
            if d.rem_euclid(2) == 1 {
                let phase = ((1 + d) / 2).rem_euclid(2);
                let v = sign_t[(a, b)];
                gamma[(a, b)] = if phase == 0 { v } else { -v };
            }
        }
    }
    gamma.antisymmetrize();
    GaussianState::from_gamma(gamma)
}

/// Covariance matrix of the ground state of the critical transverse-field
/// Ising chain `H = -Σ_j (σᶻ_j σᶻ_{j+1} + σˣ_j)` with open boundaries.
pub fn build_ground_state<T: Real>(l_spin: usize) -> Result<GaussianState<T>> {
    if l_spin < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 spins, got {l_spin}"
        )));
    }
    ground_state_of_chain(&vec![T::one(); 2 * l_spin - 1])
}

impl GaussianState<f64> {
    /// Flat binary dump: little-endian `u64` order, then the row-major
    /// `f64` entries.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n_majorana() as u64).to_le_bytes())?;
        for &x in self.gamma.as_slice() {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut word)?;
            data.push(f64::from_le_bytes(word));
        }
        Self::from_gamma(DenseMatrix::from_row_major(n, n, data)?)
    }

    /// CSV dump: first line is the order, then one row per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n_majorana();
        writeln!(w, "{n}")?;
        for i in 0..n {
            let line: Vec<String> = self
                .gamma
                .row(i)
                .iter()
                .map(|x| format!("{x:.16e}"))
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = text.lines();
        let n: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::invalid("covariance CSV is missing its order header"))?;
        let mut data = Vec::with_capacity(n * n);
        for line in lines.take(n) {
            for field in line.split(',') {
                data.push(
                    field.trim().parse::<f64>().map_err(|e| {
                        Error::invalid(format!("bad covariance entry {field:?}: {e}"))
                    })?,
                );
            }
        }
        Self::from_gamma(DenseMatrix::from_row_major(n, n, data)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_too_short_chain() {
        assert!(matches!(
            build_ground_state::<f64>(1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn product_site_has_zero_entropy() {
        let st = GaussianState::<f64>::x_polarized(3, true).unwrap();
        let s = st
            .entanglement_entropy(SpinInterval::new(2, 2).unwrap())
            .unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(st.sigma_x(2).unwrap(), 1.0);
        assert_eq!(st.connected_xx(1, 3).unwrap(), 0.0);
    }

    #[test]
    fn ground_state_is_pure_and_bulk_sigma_x_near_two_over_pi() {
        let st = build_ground_state::<f64>(64).unwrap();
        assert!(st.purity_error() < 1e-10);
        let sx = st.sigma_x(32).unwrap();
        assert!((sx - 2.0 / PI).abs() < 1e-2, "{sx}");
    }

    #[test]
    fn entropy_complement_symmetry() {
        let st = build_ground_state::<f64>(20).unwrap();
        let a = st
            .entanglement_entropy(SpinInterval::new(4, 9).unwrap())
            .unwrap();
        let mut idx: Vec<usize> = (0..6).collect();
        idx.extend(18..40);
        let b = entropy_of_indices(st.gamma(), &idx).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn interval_out_of_bounds() {
        let st = build_ground_state::<f64>(4).unwrap();
        assert!(st
            .entanglement_entropy(SpinInterval::new(2, 5).unwrap())
            .is_err());
        assert!(SpinInterval::new(0, 2).is_err());
        assert!(SpinInterval::new(3, 2).is_err());
        assert!(st.sigma_x(5).is_err());
        assert!(st.connected_xx(2, 2).is_err());
        assert!(st.zz_correlator_abs(3, 2).is_err());
    }

    #[test]
    fn zz_routes_agree() {
        let st = build_ground_state::<f64>(12).unwrap();
        for (j, jp) in [(1, 2), (3, 7), (2, 12), (5, 6)] {
            let a = st.zz_correlator_abs(j, jp).unwrap();
            let b = st.zz_correlator_abs_string(j, jp).unwrap();
            assert!(
                (a.value - b.value).abs() < 1e-10,
                "({j},{jp}) {} {}",
                a.value,
                b.value
            );
        }
    }

    #[test]
    fn zz_on_x_polarized_state_vanishes() {
        let st = GaussianState::<f64>::x_polarized(4, true).unwrap();
        let c = st.zz_correlator_abs(1, 3).unwrap();
        assert!(c.underflow || c.value < 1e-12);
    }

    #[test]
    fn binary_and_csv_dumps_roundtrip() {
        let st = build_ground_state::<f64>(5).unwrap();
        let mut buf = Vec::new();
        st.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 100 * 8);
        assert_eq!(GaussianState::read_binary(&buf[..]).unwrap(), st);
        let mut csv = Vec::new();
        st.write_csv(&mut csv).unwrap();
        let back = GaussianState::read_csv(&csv[..]).unwrap();
        assert!(back.gamma().max_abs_diff(st.gamma()) < 1e-15);
    }

    #[test]
    fn f32_ground_state() {
        let st = build_ground_state::<f32>(16).unwrap();
        assert!(st.purity_error() < 1e-4);
        let s = st
            .entanglement_entropy(SpinInterval::prefix(8).unwrap())
            .unwrap();
        let s64 = build_ground_state::<f64>(16)
            .unwrap()
            .entanglement_entropy(SpinInterval::prefix(8).unwrap())
            .unwrap();
        assert!((s as f64 - s64).abs() < 1e-4);
    }

    #[test]
    fn from_gamma_rejects_mixed_state() {
        let gamma = DenseMatrix::<f64>::zeros(4, 4);
        assert!(GaussianState::from_gamma(gamma).is_err());
    }
}

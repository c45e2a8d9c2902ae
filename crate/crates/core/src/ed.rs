//! Exact diagonalization of small transverse-field Ising chains.
//!
//! Basis convention: bit `j - 1` of a basis index is spin `j`, and a clear
//! bit means `σᶻ = +1`. Majorana operators follow the Jordan–Wigner map
//! `γ_{2j-1} = (Π_{k<j} σˣ_k) σᶻ_j`, `γ_{2j} = (Π_{k<j} σˣ_k) σʸ_j`, which is
//! the convention of [`crate::gaussian`].

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{tridiagonal_eigen, DenseMatrix};
use crate::measurement::{check_lambda, Outcome};
use crate::scalar::xlogx;
use crate::stats::{EntropyProfile, EntropySample};

/// Largest chain handled by the oracle.
pub const MAX_ED_SPINS: usize = 16;
/// Above this length the ground state comes from Lanczos instead of a dense
/// eigensolve.
pub const DENSE_EIGEN_MAX_SPINS: usize = 10;

const NORM_TOL: f64 = 1e-12;
const IMPOSSIBLE_OUTCOME: f64 = 1e-14;
const LANCZOS_RESIDUAL: f64 = 1e-10;

/// Measurement axis of a weak single-spin measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Z,
}

/// Normalized state vector of `L` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    l_spin: usize,
    amps: Vec<Complex64>,
}

fn check_length(l_spin: usize) -> Result<()> {
    if !(1..=MAX_ED_SPINS).contains(&l_spin) {
        return Err(Error::invalid(format!(
            "exact diagonalization supports 1..={MAX_ED_SPINS} spins, got {l_spin}"
        )));
    }
    Ok(())
}

#[inline]
fn spin_sign(x: usize, bit: usize) -> f64 {
    if (x >> bit) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl DenseState {
    /// Wraps `amps` (length `2^L`), which must have unit norm.
    pub fn new(l_spin: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_length(l_spin)?;
        if amps.len() != 1 << l_spin {
            return Err(Error::invalid(format!(
                "{} amplitudes for {l_spin} spins",
                amps.len()
            )));
        }
        let n2 = norm_sqr(&amps);
        if (n2.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {} is not 1", n2.sqrt())));
        }
        Ok(Self { l_spin, amps })
    }

    fn normalized(l_spin: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        let n = norm_sqr(&amps).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NumericalFailure(
                "cannot normalize a null vector".into(),
            ));
        }
        for z in &mut amps {
            *z /= n;
        }
        Ok(Self { l_spin, amps })
    }

    /// Product state with every spin along `±x`.
    pub fn x_polarized(l_spin: usize, positive: bool) -> Result<Self> {
        check_length(l_spin)?;
        let n = 1usize << l_spin;
        let amp = (n as f64).sqrt().recip();
        let amps = (0..n)
            .map(|x| {
                let s = if positive {
                    1.0
                } else {
                    (0..l_spin).map(|b| spin_sign(x, b)).product()
                };
                Complex64::new(s * amp, 0.0)
            })
            .collect();
        Ok(Self { l_spin, amps })
    }

    pub fn l_spin(&self) -> usize {
        self.l_spin
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// Largest imaginary part of any amplitude.
    pub fn max_imag(&self) -> f64 {
        self.amps.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        if self.l_spin != other.l_spin {
            return Err(Error::invalid("fidelity of states of different length"));
        }
        Ok(inner(&self.amps, &other.amps).norm_sqr())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.l_spin {
            return Err(Error::invalid(format!(
                "site {site} outside 1..={}",
                self.l_spin
            )));
        }
        Ok(())
    }

    fn apply_sigma(&self, site: usize, axis: Axis) -> Vec<Complex64> {
        let bit = site - 1;
        match axis {
            Axis::X => (0..self.amps.len())
                .map(|x| self.amps[x ^ (1 << bit)])
                .collect(),
            Axis::Z => self
                .amps
                .iter()
                .enumerate()
                .map(|(x, &a)| a * spin_sign(x, bit))
                .collect(),
        }
    }

    /// `⟨σ^axis_j⟩`.
    pub fn expectation(&self, site: usize, axis: Axis) -> Result<f64> {
        self.check_site(site)?;
        Ok(inner(&self.amps, &self.apply_sigma(site, axis)).re)
    }

    /// `⟨σ^axis_j σ^axis_j'⟩`.
    pub fn two_point(&self, j: usize, jp: usize, axis: Axis) -> Result<f64> {
        self.check_site(j)?;
        self.check_site(jp)?;
        let tmp = DenseState {
            l_spin: self.l_spin,
            amps: self.apply_sigma(jp, axis),
        };
        Ok(inner(&self.amps, &tmp.apply_sigma(j, axis)).re)
    }

    /// `⟨σσ⟩ - ⟨σ⟩⟨σ⟩` along `axis`.
    pub fn connected(&self, j: usize, jp: usize, axis: Axis) -> Result<f64> {
        Ok(self.two_point(j, jp, axis)?
            - self.expectation(j, axis)? * self.expectation(jp, axis)?)
    }

    /// `(Π_j σˣ_j) |ψ⟩`.
    pub fn global_flip(&self) -> DenseState {
        let mask = self.amps.len() - 1;
        DenseState {
            l_spin: self.l_spin,
            amps: (0..self.amps.len()).map(|x| self.amps[x ^ mask]).collect(),
        }
    }

    /// `γ_a |ψ⟩` for the 0-based Majorana index `a`.
    fn apply_majorana(&self, a: usize) -> Vec<Complex64> {
        let bit = a / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        if a.is_multiple_of(2) {
            let flip = (1usize << bit) - 1;
            for (x, &amp) in self.amps.iter().enumerate() {
                out[x ^ flip] = amp * spin_sign(x, bit);
            }
        } else {
            let flip = (1usize << (bit + 1)) - 1;
            let i = Complex64::new(0.0, 1.0);
            for (x, &amp) in self.amps.iter().enumerate() {
                out[x ^ flip] = amp * i * spin_sign(x, bit);
            }
        }
        out
    }
}

fn tfim_diagonal(l_spin: usize) -> Vec<f64> {
    (0..1usize << l_spin)
        .map(|x| {
            -(0..l_spin - 1)
                .map(|b| spin_sign(x, b) * spin_sign(x, b + 1))
                .sum::<f64>()
        })
        .collect()
}

/// `out = H v` for `H = -Σ_j σᶻ_j σᶻ_{j+1} - Σ_j σˣ_j` with open boundaries.
fn apply_tfim(l_spin: usize, diag: &[f64], v: &[f64], out: &mut [f64]) {
    for (x, o) in out.iter_mut().enumerate() {
        let mut acc = diag[x] * v[x];
        for b in 0..l_spin {
            acc -= v[x ^ (1 << b)];
        }
        *o = acc;
    }
}

/// Ground state of the open critical transverse-field Ising chain.
#[derive(Debug, Clone)]
pub struct EdGroundState {
    pub state: DenseState,
    pub energy: f64,
    /// `‖Hψ - Eψ‖`.
    pub residual: f64,
}

/// Lowest eigenvector of `H = -Σ σᶻσᶻ - Σ σˣ` on `L` spins with open
/// boundaries. The phase makes the largest-magnitude amplitude real positive.
pub fn ground_state_ed(l_spin: usize) -> Result<EdGroundState> {
    if !(2..=MAX_ED_SPINS).contains(&l_spin) {
        return Err(Error::invalid(format!(
            "exact diagonalization needs 2..={MAX_ED_SPINS} spins, got {l_spin}"
        )));
    }
    let n = 1usize << l_spin;
    let diag = tfim_diagonal(l_spin);
    let (mut vec, energy) = if l_spin <= DENSE_EIGEN_MAX_SPINS {
        let h = DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                diag[r]
            } else if (r ^ c).count_ones() == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(h);
        let (k, &e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty spectrum");
        (
            eig.eigenvectors
                .column(k)
                .iter()
                .copied()
                .collect::<Vec<_>>(),
            e,
        )
    } else {
        lanczos_ground(l_spin, &diag)?
    };

    let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    let pivot = vec
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    let scale = pivot.signum() / norm;
    for x in &mut vec {
        *x *= scale;
    }
    let mut hv = vec![0.0; n];
    apply_tfim(l_spin, &diag, &vec, &mut hv);
    let residual = hv
        .iter()
        .zip(&vec)
        .map(|(h, v)| (h - energy * v).powi(2))
        .sum::<f64>()
        .sqrt();
    let amps = vec.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    Ok(EdGroundState {
        state: DenseState::new(l_spin, amps)?,
        energy,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lanczos with full reorthogonalization, restarted from the Ritz vector
/// until the true residual drops below the target.
fn lanczos_ground(l_spin: usize, diag: &[f64]) -> Result<(Vec<f64>, f64)> {
    const MAX_KRYLOV: usize = 160;
    const MAX_RESTARTS: usize = 20;
    let n = diag.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e_ed0f_1a2c);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut w = vec![0.0; n];

    for _ in 0..MAX_RESTARTS {
        let nrm = dot(&start, &start).sqrt();
        start.iter_mut().for_each(|x| *x /= nrm);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let m = basis.len() - 1;
            apply_tfim(l_spin, diag, &basis[m], &mut w);
            let a = dot(&basis[m], &w);
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            if b < 1e-13 || basis.len() >= MAX_KRYLOV.min(n) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let eig = tridiagonal_eigen(&alpha, &beta[..alpha.len() - 1], true)?;
        let theta = eig.values[0];
        let y = eig.vectors.expect("eigenvectors requested");
        let mut ritz = vec![0.0; n];
        for (k, v) in basis.iter().enumerate() {
            axpy(y[(0, k)], v, &mut ritz);
        }
        let nrm = dot(&ritz, &ritz).sqrt();
        ritz.iter_mut().for_each(|x| *x /= nrm);
        apply_tfim(l_spin, diag, &ritz, &mut w);
        let energy = dot(&ritz, &w);
        let residual = w
            .iter()
            .zip(&ritz)
            .map(|(h, v)| (h - energy * v).powi(2))
            .sum::<f64>()
            .sqrt();
        log::debug!("lanczos L={l_spin}: θ={theta:.15} residual={residual:e}");
        if residual <= LANCZOS_RESIDUAL {
            return Ok((ritz, energy));
        }
        start = ritz;
    }
    Err(Error::NumericalFailure(format!(
        "Lanczos did not converge for L={l_spin}"
    )))
}

/// Real `2×2` Kraus matrix of `K^axis_± = (1 ± λσ)/√(2(1+λ²))` in the `σᶻ`
/// basis (the `σʸ`-free axes keep it real).
pub fn kraus_matrix(axis: Axis, lambda: f64, outcome: Outcome) -> [[f64; 2]; 2] {
    let m = outcome.sign() as f64;
    let norm = (2.0 * (1.0 + lambda * lambda)).sqrt();
    match axis {
        Axis::X => [
            [1.0 / norm, m * lambda / norm],
            [m * lambda / norm, 1.0 / norm],
        ],
        Axis::Z => [
            [(1.0 + m * lambda) / norm, 0.0],
            [0.0, (1.0 - m * lambda) / norm],
        ],
    }
}

/// `max |Σ_m K_mᵀ K_m - 𝕀|`.
pub fn povm_identity_error(axis: Axis, lambda: f64) -> f64 {
    let mut acc = [[0.0; 2]; 2];
    for o in [Outcome::Plus, Outcome::Minus] {
        let k = kraus_matrix(axis, lambda, o);
        for (r, row) in acc.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x += k[0][r] * k[0][c] + k[1][r] * k[1][c];
            }
        }
    }
    let mut err: f64 = 0.0;
    for (r, row) in acc.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            let id = if r == c { 1.0 } else { 0.0 };
            err = err.max((x - id).abs());
        }
    }
    err
}

/// Applies `K^axis_{j,m}` and returns the normalized state with its Born
/// probability.
pub fn apply_kraus_ed(
    state: &DenseState,
    site: usize,
    axis: Axis,
    lambda: f64,
    outcome: Outcome,
) -> Result<(DenseState, f64)> {
    check_lambda(lambda)?;
    state.check_site(site)?;
    let m = outcome.sign() as f64;
    let norm = (2.0 * (1.0 + lambda * lambda)).sqrt();
    let s = state.apply_sigma(site, axis);
    let next: Vec<Complex64> = state
        .amps
        .iter()
        .zip(&s)
        .map(|(&a, &b)| (a + b * (m * lambda)) / norm)
        .collect();
    let p = norm_sqr(&next);
    if p < IMPOSSIBLE_OUTCOME {
        return Err(Error::MeasurementInconsistency {
            site,
            probability: p,
        });
    }
    Ok((DenseState::normalized(state.l_spin, next)?, p))
}

/// Applies the same outcome at every site, `1..=L` in order.
pub fn post_select_uniform(
    state: &DenseState,
    axis: Axis,
    lambda: f64,
    outcome: Outcome,
) -> Result<DenseState> {
    let mut s = state.clone();
    for site in 1..=state.l_spin {
        s = apply_kraus_ed(&s, site, axis, lambda, outcome)?.0;
    }
    Ok(s)
}

/// Joint probability `⟨ψ| Π_j K†K |ψ⟩` of an outcome string.
pub fn joint_born_probability(
    state: &DenseState,
    axis: Axis,
    lambda: f64,
    outcomes: &[Outcome],
) -> Result<f64> {
    check_lambda(lambda)?;
    if outcomes.len() != state.l_spin {
        return Err(Error::invalid(format!(
            "{} outcomes for {} spins",
            outcomes.len(),
            state.l_spin
        )));
    }
    let denom = 2.0 * (1.0 + lambda * lambda);
    let mut phi = DenseState {
        l_spin: state.l_spin,
        amps: state.amps.clone(),
    };
    for (k, o) in outcomes.iter().enumerate() {
        let m = o.sign() as f64;
        let s = phi.apply_sigma(k + 1, axis);
        for (a, b) in phi.amps.iter_mut().zip(&s) {
            *a = (*a * (1.0 + lambda * lambda) + b * (2.0 * m * lambda)) / denom;
        }
    }
    Ok(inner(&state.amps, &phi.amps).re)
}

/// Outcome string encoded by `index`: bit `j - 1` set means `𝔪_j = -1`.
pub fn outcomes_from_index(index: usize, l_spin: usize) -> Vec<Outcome> {
    (0..l_spin)
        .map(|b| {
            if (index >> b) & 1 == 0 {
                Outcome::Plus
            } else {
                Outcome::Minus
            }
        })
        .collect()
}

/// Joint Born probabilities of all `2^L` x-outcome strings, indexed as in
/// [`outcomes_from_index`]. Works in the `σˣ` eigenbasis, where every
/// `K†K` is diagonal.
pub fn joint_born_distribution_x(state: &DenseState, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let n = state.amps.len();
    // Walsh–Hadamard transform to the σˣ basis.
    let mut c = state.amps.clone();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = 1;
    while h < n {
        for blk in (0..n).step_by(2 * h) {
            for x in blk..blk + h {
                let (a, b) = (c[x], c[x + h]);
                c[x] = (a + b) * r;
                c[x + h] = (a - b) * r;
            }
        }
        h *= 2;
    }
    let mut p: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
    // Per site, p(m) = Σ_s F[m][s] w(s) with F = [[a, b], [b, a]].
    let denom = 2.0 * (1.0 + lambda * lambda);
    let fa = (1.0 + lambda).powi(2) / denom;
    let fb = (1.0 - lambda).powi(2) / denom;
    let mut h = 1;
    while h < n {
        for blk in (0..n).step_by(2 * h) {
            for x in blk..blk + h {
                let (wp, wm) = (p[x], p[x + h]);
                p[x] = fa * wp + fb * wm;
                p[x + h] = fb * wp + fa * wm;
            }
        }
        h *= 2;
    }
    Ok(p)
}

fn entropy_from_singular_values(sv: impl Iterator<Item = f64>) -> f64 {
    (-sv.map(|s| xlogx(s * s)).sum::<f64>()).max(0.0)
}

/// Von Neumann entropy of spins `1..=cut_after` from the singular values of
/// the reshaped amplitude matrix.
pub fn ee_ed(state: &DenseState, cut_after: usize) -> Result<f64> {
    if cut_after == 0 || cut_after >= state.l_spin {
        return Err(Error::invalid(format!(
            "cut after site {cut_after} must lie in 1..{}",
            state.l_spin
        )));
    }
    let left = 1usize << cut_after;
    let right = 1usize << (state.l_spin - cut_after);
    let m = DMatrix::from_fn(left, right, |a, b| state.amps[a | (b << cut_after)]);
    Ok(entropy_from_singular_values(
        m.singular_values().iter().copied(),
    ))
}

/// Von Neumann entropy of the contiguous spins `first..=last`.
pub fn interval_entropy_ed(state: &DenseState, first: usize, last: usize) -> Result<f64> {
    let l = state.l_spin;
    if first == 0 || first > last || last > l {
        return Err(Error::invalid(format!(
            "interval [{first}, {last}] outside 1..={l}"
        )));
    }
    if first == 1 && last == l {
        return Ok(0.0);
    }
    if first == 1 {
        return ee_ed(state, last);
    }
    let k = last - first + 1;
    let lo = first - 1;
    let low_mask = (1usize << lo) - 1;
    let a_mask = (1usize << k) - 1;
    let mut m = DMatrix::<Complex64>::zeros(1 << k, 1 << (l - k));
    for (x, &amp) in state.amps.iter().enumerate() {
        let a = (x >> lo) & a_mask;
        let b = (x & low_mask) | ((x >> last) << lo);
        m[(a, b)] = amp;
    }
    Ok(entropy_from_singular_values(
        m.singular_values().iter().copied(),
    ))
}

/// Majorana covariance `Γ_ab = i⟨γ_a γ_b⟩` (`a ≠ b`) of any state, Gaussian
/// or not.
pub fn covariance_from_state(state: &DenseState) -> DenseMatrix<f64> {
    let n = 2 * state.l_spin;
    let phis: Vec<Vec<Complex64>> = (0..n).map(|a| state.apply_majorana(a)).collect();
    let mut g = DenseMatrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            // i⟨φ_a|φ_b⟩ is real; its value is -Im⟨φ_a|φ_b⟩.
            let v = -inner(&phis[a], &phis[b]).im;
            g[(a, b)] = v;
            g[(b, a)] = -v;
        }
    }
    g
}

/// Gaussian description of a dense state known to be Gaussian.
pub fn gaussian_from_dense(state: &DenseState) -> Result<GaussianState<f64>> {
    GaussianState::from_gamma(covariance_from_state(state))
}

/// `e^{β Σ_j σᶻ_j} |Ω⟩` normalized, with `λ = tanh β`.
pub fn uniform_z_state(l_spin: usize, lambda: f64) -> Result<DenseState> {
    check_lambda(lambda)?;
    let ground = ground_state_ed(l_spin)?.state;
    uniform_z_from(&ground, lambda)
}

fn uniform_z_from(ground: &DenseState, lambda: f64) -> Result<DenseState> {
    let l = ground.l_spin;
    let amps: Vec<Complex64> = ground
        .amps
        .iter()
        .enumerate()
        .map(|(x, &a)| {
            a * (0..l)
                .map(|b| 1.0 + lambda * spin_sign(x, b))
                .product::<f64>()
        })
        .collect();
    let n2 = norm_sqr(&amps);
    if n2 < IMPOSSIBLE_OUTCOME {
        return Err(Error::MeasurementInconsistency {
            site: l,
            probability: n2,
        });
    }
    DenseState::normalized(l, amps)
}

/// Largest absolute deviation between a Gaussian state and the dense state
/// it should describe, over Γ, every `⟨σˣ⟩`, every interval entropy, every
/// connected `σˣσˣ` correlator and both `|⟨σᶻσᶻ⟩|` evaluations.
pub fn cross_check(gaussian: &GaussianState<f64>, dense: &DenseState) -> Result<f64> {
    let l = dense.l_spin;
    if gaussian.l_spin() != l {
        return Err(Error::invalid(format!(
            "cross-check of {} spins against {l}",
            gaussian.l_spin()
        )));
    }
    let mut dev = gaussian.gamma().max_abs_diff(&covariance_from_state(dense));
    for j in 1..=l {
        dev = dev.max((gaussian.sigma_x(j)? - dense.expectation(j, Axis::X)?).abs());
    }
    for first in 1..=l {
        for last in first..=l {
            if first == 1 && last == l {
                continue;
            }
            let sg =
                gaussian.entanglement_entropy(crate::gaussian::SpinInterval::new(first, last)?)?;
            dev = dev.max((sg - interval_entropy_ed(dense, first, last)?).abs());
        }
    }
    for j in 1..=l {
        for jp in j + 1..=l {
            dev = dev.max((gaussian.connected_xx(j, jp)? - dense.connected(j, jp, Axis::X)?).abs());
            let zz = dense.two_point(j, jp, Axis::Z)?.abs();
            dev = dev.max((gaussian.zz_correlator_abs(j, jp)?.value - zz).abs());
            dev = dev.max((gaussian.zz_correlator_abs_string(j, jp)?.value - zz).abs());
        }
    }
    Ok(dev)
}

/// Entropy of one contiguous interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEntropy {
    pub first: usize,
    pub last: usize,
    pub entropy: f64,
}

/// Connected two-point function `⟨σᶻ_j σᶻ_j'⟩_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzConnected {
    pub j: usize,
    pub jp: usize,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ZDiagnostics {
    pub lambda: f64,
    /// Entropy of `[1, ℓ]` for `ℓ = 1..L-1`.
    pub profile: EntropyProfile,
    /// Every contiguous interval `[first, last]` strictly inside the chain.
    pub intervals: Vec<IntervalEntropy>,
    pub zz_connected: Vec<ZzConnected>,
}

/// Entropies and `σᶻ` correlations of the uniform `z`-measured state.
pub fn z_diagnostics(l_spin: usize, lambda: f64) -> Result<ZDiagnostics> {
    let state = uniform_z_state(l_spin, lambda)?;
    let samples = (1..l_spin)
        .map(|ell| {
            Ok(EntropySample {
                ell,
                mean: ee_ed(&state, ell)?,
                stderr: 0.0,
                n: 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut intervals = Vec::new();
    for first in 1..=l_spin {
        for last in first..=l_spin {
            if first == 1 && last == l_spin {
                continue;
            }
            intervals.push(IntervalEntropy {
                first,
                last,
                entropy: interval_entropy_ed(&state, first, last)?,
            });
        }
    }
    let mut zz_connected = Vec::new();
    for j in 1..=l_spin {
        for jp in j + 1..=l_spin {
            zz_connected.push(ZzConnected {
                j,
                jp,
                value: state.connected(j, jp, Axis::Z)?,
            });
        }
    }
    Ok(ZDiagnostics {
        lambda,
        profile: EntropyProfile::new(l_spin, samples)?,
        intervals,
        zz_connected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_energy_from_characteristic_polynomial() {
        // The even sector reduces to [[-1, -2], [-2, 1]], eigenvalues ±√5.
        let g = ground_state_ed(2).unwrap();
        assert!((g.energy + 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lanczos_agrees_with_dense_solver() {
        let n = 1usize << 9;
        let diag = tfim_diagonal(9);
        let (v, e) = lanczos_ground(9, &diag).unwrap();
        let dense = ground_state_ed(9).unwrap();
        assert!((e - dense.energy).abs() < 1e-10);
        let overlap: f64 = (0..n).map(|x| v[x] * dense.state.amps[x].re).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_and_bell_entropies() {
        let s = DenseState::x_polarized(4, true).unwrap();
        assert!(ee_ed(&s, 2).unwrap().abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(r, 0.0);
        amps[3] = Complex64::new(r, 0.0);
        let bell = DenseState::new(2, amps).unwrap();
        assert!((ee_ed(&bell, 1).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn interval_entropy_matches_cut_and_complement() {
        let g = ground_state_ed(8).unwrap().state;
        assert!((interval_entropy_ed(&g, 1, 3).unwrap() - ee_ed(&g, 3).unwrap()).abs() < 1e-12);
        let inner = interval_entropy_ed(&g, 3, 5).unwrap();
        assert!(inner > 0.0);
        // [6, 8] is the complement of [1, 5].
        assert!((interval_entropy_ed(&g, 6, 8).unwrap() - ee_ed(&g, 5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn povm_completeness() {
        for k in 0..=20 {
            let lambda = k as f64 / 20.0;
            assert!(povm_identity_error(Axis::X, lambda) < 1e-14);
            assert!(povm_identity_error(Axis::Z, lambda) < 1e-14);
        }
    }

    #[test]
    fn kraus_limits() {
        let g = ground_state_ed(4).unwrap().state;
        let (s, p) = apply_kraus_ed(&g, 2, Axis::X, 0.0, Outcome::Minus).unwrap();
        assert!((p - 0.5).abs() < 1e-14);
        assert!((s.fidelity(&g).unwrap() - 1.0).abs() < 1e-14);
        let plus = DenseState::x_polarized(3, true).unwrap();
        let (_, p) = apply_kraus_ed(&plus, 2, Axis::X, 1.0, Outcome::Plus).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert!(matches!(
            apply_kraus_ed(&plus, 2, Axis::X, 1.0, Outcome::Minus),
            Err(Error::MeasurementInconsistency { .. })
        ));
    }

    #[test]
    fn joint_distribution_routes_agree() {
        let g = ground_state_ed(5).unwrap().state;
        let dist = joint_born_distribution_x(&g, 0.7).unwrap();
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for idx in [0, 5, 17, 31] {
            let direct =
                joint_born_probability(&g, Axis::X, 0.7, &outcomes_from_index(idx, 5)).unwrap();
            assert!((direct - dist[idx]).abs() < 1e-13);
        }
    }

    #[test]
    fn covariance_of_x_polarized_state() {
        let s = DenseState::x_polarized(3, true).unwrap();
        let g = covariance_from_state(&s);
        for j in 0..3 {
            assert!((g[(2 * j, 2 * j + 1)] - 1.0).abs() < 1e-14);
        }
        assert!(g.antisymmetry_error() == 0.0);
    }

    #[test]
    fn uniform_z_limits() {
        let g = ground_state_ed(6).unwrap().state;
        let z0 = uniform_z_state(6, 0.0).unwrap();
        assert!((z0.fidelity(&g).unwrap() - 1.0).abs() < 1e-12);
        let z = uniform_z_state(6, 0.99).unwrap();
        assert!(ee_ed(&z, 3).unwrap() < 1e-2);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(ground_state_ed(1).is_err());
        assert!(ground_state_ed(17).is_err());
        assert!(DenseState::new(2, vec![Complex64::new(1.0, 0.0); 4]).is_err());
    }
}

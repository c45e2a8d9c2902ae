//! Weak `σˣ` measurements on Gaussian states.
//!
//! The Kraus pair `K_± = (1 ± λ σˣ_j) / √(2(1+λ²))` keeps a Gaussian state
//! Gaussian. The update touches the two Majorana modes of the measured spin
//! and applies a rank-2 correction to the rest of the covariance matrix, so
//! one measurement costs `O(n²)` for `n` Majorana modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::scalar::Real;

const IMPOSSIBLE_OUTCOME: f64 = 1e-12;
const PURITY_DRIFT_LIMIT: f64 = 1e-6;

/// Random number generator driving outcome sampling.
pub type TrajectoryRng = ChaCha8Rng;

/// Measurement outcome `𝔪 = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn sign(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::invalid(format!(
                "measurement outcome must be ±1, got {other}"
            ))),
        }
    }

    fn signum<T: Real>(self) -> T {
        T::lit(self.sign() as f64)
    }
}

/// How outcomes are chosen along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementScheme {
    /// Sample each outcome from its Born probability in the current state.
    Born,
    /// `+` and `-` with probability 1/2 each, independent of the state.
    Forced,
    /// `+` with probability `p_plus`, independent of the state.
    Biased { p_plus: f64 },
    /// Post-select `+` on every site.
    UniformPlus,
    /// Post-select `-` on every site.
    UniformMinus,
}

impl MeasurementScheme {
    pub fn biased(p_plus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(Error::invalid(format!(
                "p_plus must lie in [0, 1], got {p_plus}"
            )));
        }
        Ok(MeasurementScheme::Biased { p_plus })
    }

    /// Name used in records and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            MeasurementScheme::Born => "born",
            MeasurementScheme::Forced => "forced",
            MeasurementScheme::Biased { .. } => "biased",
            MeasurementScheme::UniformPlus => "uniform-plus",
            MeasurementScheme::UniformMinus => "uniform-minus",
        }
    }

    pub fn from_name(name: &str, p_plus: Option<f64>) -> Result<Self> {
        match (name, p_plus) {
            ("born", _) => Ok(MeasurementScheme::Born),
            ("forced", _) => Ok(MeasurementScheme::Forced),
            ("biased", Some(p)) => MeasurementScheme::biased(p),
            ("biased", None) => Err(Error::invalid("scheme 'biased' needs p_plus")),
            ("uniform-plus", _) => Ok(MeasurementScheme::UniformPlus),
            ("uniform-minus", _) => Ok(MeasurementScheme::UniformMinus),
            (other, _) => Err(Error::invalid(format!(
                "unknown measurement scheme '{other}'"
            ))),
        }
    }

    /// Probability of `+` for state-independent schemes.
    pub fn fixed_p_plus(&self) -> Option<f64> {
        match *self {
            MeasurementScheme::Forced => Some(0.5),
            MeasurementScheme::Biased { p_plus } => Some(p_plus),
            MeasurementScheme::UniformPlus => Some(1.0),
            MeasurementScheme::UniformMinus => Some(0.0),
            MeasurementScheme::Born => None,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(
            self,
            MeasurementScheme::UniformPlus | MeasurementScheme::UniformMinus
        )
    }
}

/// Provenance of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub lambda: f64,
    pub scheme: MeasurementScheme,
    /// One outcome per spin, site 1 first.
    pub outcomes: Vec<Outcome>,
    pub seed: u64,
    /// `Σ ln p` of the realized outcomes under sequential Born probabilities.
    pub log_born_weight: f64,
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    lambda: f64,
    scheme: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p_plus: Option<f64>,
    seed: u64,
    outcomes: Vec<i64>,
    log_born_weight: f64,
}

impl Serialize for MeasurementRecord {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let p_plus = match self.scheme {
            MeasurementScheme::Biased { p_plus } => Some(p_plus),
            _ => None,
        };
        RecordJson {
            lambda: self.lambda,
            scheme: self.scheme.name().to_string(),
            p_plus,
            seed: self.seed,
            outcomes: self.outcomes.iter().map(|o| o.sign() as i64).collect(),
            log_born_weight: self.log_born_weight,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementRecord {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RecordJson::deserialize(deserializer)?;
        let scheme =
            MeasurementScheme::from_name(&raw.scheme, raw.p_plus).map_err(D::Error::custom)?;
        let outcomes = raw
            .outcomes
            .into_iter()
            .map(Outcome::from_sign)
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Ok(MeasurementRecord {
            lambda: raw.lambda,
            scheme,
            outcomes,
            seed: raw.seed,
            log_born_weight: raw.log_born_weight,
        })
    }
}

pub(crate) fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::invalid(format!(
            "measurement strength must lie in [0, 1], got {lambda}"
        )));
    }
    Ok(())
}

/// Born probability `p(𝔪) = (1 + λ² + 2𝔪λ⟨σˣ_j⟩) / (2(1 + λ²))`.
pub fn born_probability_x<T: Real>(
    state: &GaussianState<T>,
    site: usize,
    lambda: T,
    outcome: Outcome,
) -> Result<T> {
    check_lambda(lambda)?;
    let sx = state.sigma_x(site)?;
    Ok(born_probability_from_sigma_x(sx, lambda, outcome))
}

#[inline]
fn born_probability_from_sigma_x<T: Real>(sx: T, lambda: T, outcome: Outcome) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let l2 = lambda * lambda;
    let p = (one + l2 + two * outcome.signum::<T>() * lambda * sx) / (two * (one + l2));
    p.max(T::zero()).min(one)
}

/// Applies `K^x_{j,𝔪}` in place and returns the Born probability of the
/// outcome.
pub fn apply_weak_x_in_place<T: Real>(
    state: &mut GaussianState<T>,
    site: usize,
    lambda: T,
    outcome: Outcome,
) -> Result<T> {
    check_lambda(lambda)?;
    state.check_site(site)?;
    let a = 2 * site - 2;
    let b = a + 1;
    let n = state.n_majorana();

    let one = T::one();
    let two = T::lit(2.0);
    let l2 = lambda * lambda;
    let m = outcome.signum::<T>();
    let g = state.gamma()[(a, b)];
    let prob = born_probability_from_sigma_x(g, lambda, outcome);
    if prob.as_f64() <= IMPOSSIBLE_OUTCOME {
        return Err(Error::MeasurementInconsistency {
            site,
            probability: prob.as_f64(),
        });
    }

    let n1 = -two * m * lambda / (one + l2);
    let n2 = (one - l2) / (one + l2);
    // 1 - g·n1 = 2p: the determinant of the 2x2-block system being inverted.
    let den = one - g * n1;
    let c = n1 / den;
    let f = n2 / den;

    let gamma = state.gamma_mut();
    let mut u: Vec<T> = (0..n).map(|r| gamma[(r, a)]).collect();
    let mut w: Vec<T> = (0..n).map(|r| gamma[(r, b)]).collect();
    for v in [&mut u, &mut w] {
        v[a] = T::zero();
        v[b] = T::zero();
    }

    if c != T::zero() {
        // Γ_RR <- Γ_RR - c (w uᵀ - u wᵀ)
        for r in 0..n {
            if r == a || r == b {
                continue;
            }
            let cw = c * w[r];
            let cu = c * u[r];
            let row = gamma.row_mut(r);
            for ((x, &us), &ws) in row.iter_mut().zip(&u).zip(&w) {
                *x -= cw * us - cu * ws;
            }
        }
    }
    for r in 0..n {
        if r == a || r == b {
            continue;
        }
        gamma[(r, a)] = f * u[r];
        gamma[(r, b)] = f * w[r];
        gamma[(a, r)] = -f * u[r];
        gamma[(b, r)] = -f * w[r];
    }
    let g_new = (g - n1) / den;
    gamma[(a, b)] = g_new;
    gamma[(b, a)] = -g_new;
    gamma[(a, a)] = T::zero();
    gamma[(b, b)] = T::zero();

    let drift = state.purity_error_rows(&[a, b]);
    if drift > T::tol(PURITY_DRIFT_LIMIT) {
        return Err(Error::NumericalFailure(format!(
            "purity drift {drift:e} after measuring site {site}"
        )));
    }
    Ok(prob)
}

/// Post-measurement state for outcome `𝔪` of a weak `σˣ_j` measurement.
pub fn apply_weak_x<T: Real>(
    state: &GaussianState<T>,
    site: usize,
    lambda: T,
    outcome: Outcome,
) -> Result<GaussianState<T>> {
    let mut next = state.clone();
    apply_weak_x_in_place(&mut next, site, lambda, outcome)?;
    Ok(next)
}

/// Draws the outcome at `site` according to `scheme`. Consumes exactly one
/// uniform variate per call.
pub fn sample_outcome<T: Real, R: Rng + ?Sized>(
    state: &GaussianState<T>,
    site: usize,
    lambda: T,
    scheme: MeasurementScheme,
    rng: &mut R,
) -> Result<Outcome> {
    let p_plus = match scheme {
        MeasurementScheme::Born => born_probability_x(state, site, lambda, Outcome::Plus)?.as_f64(),
        MeasurementScheme::Forced => 0.5,
        MeasurementScheme::Biased { p_plus } => p_plus,
        MeasurementScheme::UniformPlus | MeasurementScheme::UniformMinus => {
            return Err(Error::invalid(
                "uniform post-selection schemes do not sample outcomes",
            ))
        }
    };
    let u: f64 = rng.gen();
    Ok(if u < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    })
}

/// Seed of trajectory `index` in an ensemble with `master_seed`.
///
/// SplitMix64 finalizer over both inputs, so neighbouring indices and seeds
/// give unrelated streams.
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master_seed ^ mix(index))
}

/// Measures every spin once, left to right, starting from `ground`.
pub fn run_trajectory<T: Real>(
    ground: &GaussianState<T>,
    lambda: T,
    scheme: MeasurementScheme,
    seed: u64,
) -> Result<(MeasurementRecord, GaussianState<T>)> {
    check_lambda(lambda)?;
    if let MeasurementScheme::Biased { p_plus } = scheme {
        MeasurementScheme::biased(p_plus)?;
    }
    let mut rng = TrajectoryRng::seed_from_u64(seed);
    let mut state = ground.clone();
    let l = state.l_spin();
    let mut outcomes = Vec::with_capacity(l);
    let mut log_weight = 0.0;
    for site in 1..=l {
        let outcome = match scheme {
            MeasurementScheme::UniformPlus => Outcome::Plus,
            MeasurementScheme::UniformMinus => Outcome::Minus,
            _ => sample_outcome(&state, site, lambda, scheme, &mut rng)?,
        };
        let p = apply_weak_x_in_place(&mut state, site, lambda, outcome)?;
        log_weight += p.as_f64().ln();
        outcomes.push(outcome);
    }
    let record = MeasurementRecord {
        lambda: lambda.as_f64(),
        scheme,
        outcomes,
        seed,
        log_born_weight: log_weight.min(0.0),
    };
    Ok((record, state))
}

/// Applies a fixed list of `(site, outcome)` measurements in the given order
/// and returns the product of their sequential Born probabilities in log form.
pub fn apply_outcomes<T: Real>(
    state: &mut GaussianState<T>,
    lambda: T,
    outcomes: &[(usize, Outcome)],
) -> Result<f64> {
    let mut log_weight = 0.0;
    for &(site, outcome) in outcomes {
        log_weight += apply_weak_x_in_place(state, site, lambda, outcome)?
            .as_f64()
            .ln();
    }
    Ok(log_weight)
}

//! Closed-form predictions for measured critical Ising chains.
//!
//! Every formula is written in terms of the measurement strength `λ`, never
//! `β = artanh λ`, so `λ = 1` is handled without infinities wherever the
//! formula itself is finite there.

use std::io::Write;

use crate::error::{Error, Result};
use crate::measurement::check_lambda;
use crate::scalar::Real;

/// Dilogarithm `Li₂(z) = Σ_{k≥1} z^k / k²` for `-1 ≤ z ≤ 1`.
///
/// The series is summed directly for `|z| ≤ 1/2`; larger arguments are
/// mapped into that disc by the reflection and Landen identities.
pub fn dilog<T: Real>(z: T) -> Result<T> {
    if !(z.abs() <= T::one()) {
        return Err(Error::invalid(format!(
            "dilog argument {z} outside [-1, 1]"
        )));
    }
    let half = T::lit(0.5);
    let pi2_6 = T::PI() * T::PI() / T::lit(6.0);
    if z == T::one() {
        return Ok(pi2_6);
    }
    if z > half {
        // Li₂(z) = π²/6 - ln z ln(1-z) - Li₂(1-z)
        let w = T::one() - z;
        return Ok(pi2_6 - z.ln() * w.ln() - dilog_series(w));
    }
    if z < -half {
        // Li₂(z) = -Li₂(z/(z-1)) - ½ ln²(1-z)
        let w = z / (z - T::one());
        let l = (T::one() - z).ln();
        return Ok(-dilog_series(w) - half * l * l);
    }
    Ok(dilog_series(z))
}

fn dilog_series<T: Real>(z: T) -> T {
    let mut sum = T::zero();
    let mut pow = z;
    for k in 1..400 {
        let kf = T::lit(k as f64);
        let term = pow / (kf * kf);
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.01) {
            break;
        }
        pow *= z;
    }
    sum
}

/// `s = (1-λ²)² / (λ⁴ + 6λ² + 1)`, equal to `1/cosh 4β`.
pub fn defect_s<T: Real>(lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    let l2 = lambda * lambda;
    let num = (T::one() - l2) * (T::one() - l2);
    Ok(num / (l2 * l2 + T::lit(6.0) * l2 + T::one()))
}

/// Effective central charge of the uniformly post-selected state.
pub fn c_eff_uniform<T: Real>(lambda: T) -> Result<T> {
    let s = defect_s(lambda)?;
    Ok(c_eff_from_s(s))
}

fn c_eff_from_s<T: Real>(s: T) -> T {
    let half = T::lit(0.5);
    if s >= T::one() {
        return half;
    }
    if s <= T::zero() {
        return T::zero();
    }
    let one = T::one();
    let p = one + s;
    let m = one - s;
    let bracket = (p * p.ln() + m * m.ln()) * s.ln();
    let li = p * dilog(-s).expect("s in (0, 1)") + m * dilog(s).expect("s in (0, 1)");
    let c = -T::lit(3.0) / (T::PI() * T::PI()) * (bracket + li);
    c.max(T::zero()).min(half)
}

/// Transmission of the equivalent bond defect, `t = ((1-λ)/(1+λ))²`.
pub fn defect_strength_t<T: Real>(lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    let r = (T::one() - lambda) / (T::one() + lambda);
    Ok(r * r)
}

/// Sign of the uniform outcome, selecting one of the two `σᶻ` exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

/// `Δ_z,± = (2/π²) arctan²( ((1±λ)/(1∓λ))² )`.
pub fn delta_z<T: Real>(lambda: T, branch: Branch) -> Result<T> {
    check_lambda(lambda)?;
    let one = T::one();
    let two_over_pi2 = T::lit(2.0) / (T::PI() * T::PI());
    let (num, den) = match branch {
        Branch::Plus => (one + lambda, one - lambda),
        Branch::Minus => (one - lambda, one + lambda),
    };
    if den == T::zero() {
        // arctan(∞) = π/2
        return Ok(T::lit(0.5));
    }
    let r = num / den;
    let a = (r * r).atan();
    Ok(two_over_pi2 * a * a)
}

/// Default single-site `⟨σˣ⟩` of the infinite critical chain, `2/π`.
pub fn sigma_x_infinite<T: Real>() -> T {
    T::FRAC_2_PI()
}

/// `𝚝 = tanh 2β = 2λ/(1+λ²)`.
pub fn tanh_two_beta<T: Real>(lambda: T) -> T {
    T::lit(2.0) * lambda / (T::one() + lambda * lambda)
}

/// Replica-number parameters of the averaged measurement operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaParams<T> {
    lambda: T,
    r: T,
    sigma_x: T,
}

impl<T: Real> ReplicaParams<T> {
    /// `⟨σˣ⟩ = 2/π`.
    pub fn new(lambda: T, r: T) -> Result<Self> {
        Self::with_sigma_x(lambda, r, sigma_x_infinite())
    }

    pub fn with_sigma_x(lambda: T, r: T, sigma_x: T) -> Result<Self> {
        check_lambda(lambda)?;
        if lambda >= T::one() {
            return Err(Error::invalid("replica parameters need λ < 1"));
        }
        if !r.is_finite() || !sigma_x.is_finite() {
            return Err(Error::invalid("replica number and ⟨σˣ⟩ must be finite"));
        }
        let p = Self { lambda, r, sigma_x };
        if !(p.x().abs() < T::one()) {
            return Err(Error::invalid(format!(
                "|x| = |𝚝⟨σˣ⟩| must be below 1, got {}",
                p.x()
            )));
        }
        Ok(p)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn replicas(&self) -> T {
        self.r
    }

    pub fn sigma_x(&self) -> T {
        self.sigma_x
    }

    /// `𝚝 = tanh 2β`.
    pub fn t(&self) -> T {
        tanh_two_beta(self.lambda)
    }

    /// `𝚌 = cosh 2β = (1+λ²)/(1-λ²)`.
    pub fn c(&self) -> T {
        let l2 = self.lambda * self.lambda;
        (T::one() + l2) / (T::one() - l2)
    }

    /// `x = 𝚝 ⟨σˣ⟩`.
    pub fn x(&self) -> T {
        self.t() * self.sigma_x
    }

    /// Bare coupling `g` before the replica renormalization.
    pub fn g(&self) -> T {
        let one = T::one();
        let x = self.x();
        let rm1 = self.r - one;
        let q = ((one - x) / (one + x)).powf(rm1);
        self.t() * (one - q) / ((one - rm1 * x) + (one + rm1 * x) * q)
    }

    /// Bare amplitude `A`.
    pub fn a(&self) -> T {
        let one = T::one();
        let x = self.x();
        let rm1 = self.r - one;
        let lhs = (one - x).powf(rm1) * (rm1 * x + one);
        let rhs = (one + x).powf(rm1) * (rm1 * x - one);
        self.c().powf(self.r) * (lhs - rhs) * T::lit(0.5)
    }

    fn renorm_denominator(&self, g: T) -> Result<T> {
        let d = T::one() + (self.r - T::one()) * self.sigma_x * g;
        if d.abs() <= T::tol(1e-12) {
            return Err(Error::SingularParameter(format!(
                "1 + (R-1)⟨σˣ⟩g vanishes at λ = {}, R = {}",
                self.lambda, self.r
            )));
        }
        Ok(d)
    }

    /// `g̃ = g / (1 + (R-1)⟨σˣ⟩g)`.
    pub fn g_tilde(&self) -> Result<T> {
        let g = self.g();
        Ok(g / self.renorm_denominator(g)?)
    }

    /// `Ã = A [1 + (R-1)⟨σˣ⟩g]^R / [1 + R⟨σˣ⟩g]^{R-1}`.
    pub fn a_tilde(&self) -> Result<T> {
        let g = self.g();
        let d1 = self.renorm_denominator(g)?;
        let d2 = T::one() + self.r * self.sigma_x * g;
        if d2.abs() <= T::tol(1e-12) {
            return Err(Error::SingularParameter(format!(
                "1 + R⟨σˣ⟩g vanishes at λ = {}, R = {}",
                self.lambda, self.r
            )));
        }
        let v = self.a() * d1.powf(self.r) / d2.powf(self.r - T::one());
        if !v.is_finite() {
            return Err(Error::SingularParameter(format!(
                "Ã is not real at λ = {}, R = {}",
                self.lambda, self.r
            )));
        }
        Ok(v)
    }

    /// Symbolic `R → 1` limit of `g̃` (Born rule): zero.
    pub fn g_tilde_born_limit(&self) -> T {
        T::zero()
    }

    /// Symbolic `R → 0` limit of `g̃` (forced): `-𝚝²⟨σˣ⟩`.
    pub fn g_tilde_forced_limit(&self) -> T {
        -self.t() * self.t() * self.sigma_x
    }
}

/// Convenience wrapper for [`ReplicaParams::g_tilde`].
pub fn replica_g_tilde<T: Real>(params: &ReplicaParams<T>) -> Result<T> {
    params.g_tilde()
}

/// `λ̃ = tanh(½ artanh(𝚝²⟨σˣ⟩))` with `⟨σˣ⟩ = 2/π`.
pub fn effective_lambda_forced<T: Real>(lambda: T) -> Result<T> {
    effective_lambda_forced_with(lambda, sigma_x_infinite())
}

pub fn effective_lambda_forced_with<T: Real>(lambda: T, sigma_x: T) -> Result<T> {
    check_lambda(lambda)?;
    let t = tanh_two_beta(lambda);
    let g = t * t * sigma_x;
    if !(g.abs() < T::one()) {
        return Err(Error::OutOfValidity(format!("|𝚝²⟨σˣ⟩| = {} ≥ 1", g.abs())));
    }
    Ok((T::lit(0.5) * g.abs().atanh()).tanh())
}

/// Predicted `c_eff` of forced (`p₊ = 1/2`) ensembles.
pub fn c_eff_forced_prediction<T: Real>(lambda: T) -> Result<T> {
    c_eff_uniform(effective_lambda_forced(lambda)?)
}

/// Mean-field optimal bias `p_b = 1/2 + 2λ/(π(1+λ²))`.
pub fn optimal_bias<T: Real>(lambda: T) -> Result<T> {
    optimal_bias_with(lambda, sigma_x_infinite())
}

/// `p_b = (1 + 𝚝⟨σˣ⟩)/2` for a given `⟨σˣ⟩`.
pub fn optimal_bias_with<T: Real>(lambda: T, sigma_x: T) -> Result<T> {
    check_lambda(lambda)?;
    Ok(T::lit(0.5) + lambda * sigma_x / (T::one() + lambda * lambda))
}

/// `R → 0` coupling of biased forced ensembles,
/// `g̃′ = 2𝚝δp / ((1-x²) - 2xδp)`.
pub fn biased_coupling<T: Real>(lambda: T, delta_p: T) -> Result<T> {
    biased_coupling_with(lambda, delta_p, sigma_x_infinite())
}

pub fn biased_coupling_with<T: Real>(lambda: T, delta_p: T, sigma_x: T) -> Result<T> {
    check_lambda(lambda)?;
    if !delta_p.is_finite() {
        return Err(Error::invalid("δp must be finite"));
    }
    let two = T::lit(2.0);
    let t = tanh_two_beta(lambda);
    let x = t * sigma_x;
    let den = (T::one() - x * x) - two * x * delta_p;
    let g = two * t * delta_p / den;
    if !(g.abs() < T::one()) {
        return Err(Error::OutOfValidity(format!(
            "|g̃′| = {} ≥ 1 at λ = {lambda}, δp = {delta_p}",
            g.abs()
        )));
    }
    Ok(g)
}

/// `λ̃′ = tanh(½ artanh |g̃′|)`.
pub fn effective_lambda_biased<T: Real>(lambda: T, delta_p: T) -> Result<T> {
    let g = biased_coupling(lambda, delta_p)?;
    Ok((T::lit(0.5) * g.abs().atanh()).tanh())
}

/// Predicted `c_eff` of biased forced ensembles with `P(+) = p_plus`.
pub fn c_eff_biased_prediction<T: Real>(lambda: T, p_plus: T) -> Result<T> {
    if !(p_plus > T::zero() && p_plus < T::one()) {
        return Err(Error::invalid(format!(
            "p_plus must lie in (0, 1), got {p_plus}"
        )));
    }
    let delta_p = p_plus - optimal_bias(lambda)?;
    c_eff_uniform(effective_lambda_biased(lambda, delta_p)?)
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn lambda_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) {
        return Err(Error::invalid("λ grid must lie within [0, 1]"));
    }
    match count {
        0 => Err(Error::invalid("λ grid needs at least one point")),
        1 => Ok(vec![start]),
        _ => {
            if stop <= start {
                return Err(Error::invalid("λ grid must be increasing"));
            }
            let h = (stop - start) / (count - 1) as f64;
            Ok((0..count)
                .map(|k| {
                    if k + 1 == count {
                        stop
                    } else {
                        start + h * k as f64
                    }
                })
                .collect())
        }
    }
}

/// A closed-form quantity tabulated on a `λ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl AnalyticCurve {
    pub fn tabulate(
        name: impl Into<String>,
        grid: &[f64],
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<Self> {
        if grid.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("λ grid must lie within [0, 1]"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("λ grid must be strictly increasing"));
        }
        let points = grid
            .iter()
            .map(|&l| Ok((l, f(l)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.into(),
            points,
        })
    }

    /// Tabulates one of the named curves of [`CURVE_NAMES`]. `delta_p` is
    /// used by `c_eff_biased` only.
    pub fn named(name: &str, grid: &[f64], delta_p: f64) -> Result<Self> {
        let f: Box<dyn Fn(f64) -> Result<f64>> = match name {
            "c_eff_uniform" => Box::new(c_eff_uniform),
            "defect_strength_t" => Box::new(defect_strength_t),
            "delta_z_plus" => Box::new(|l| delta_z(l, Branch::Plus)),
            "delta_z_minus" => Box::new(|l| delta_z(l, Branch::Minus)),
            "effective_lambda_forced" => Box::new(effective_lambda_forced),
            "c_eff_forced" => Box::new(c_eff_forced_prediction),
            "optimal_bias" => Box::new(optimal_bias),
            "c_eff_biased" => Box::new(move |l| {
                let p = optimal_bias(l)? + delta_p;
                c_eff_biased_prediction(l, p)
            }),
            other => {
                return Err(Error::invalid(format!(
                    "unknown curve '{other}'; expected one of {}",
                    CURVE_NAMES.join(", ")
                )))
            }
        };
        Self::tabulate(name, grid, f)
    }

    /// CSV with header `lambda,<name>`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda,{}", self.name)?;
        for (l, v) in &self.points {
            writeln!(w, "{l:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Curves understood by [`AnalyticCurve::named`].
pub const CURVE_NAMES: [&str; 8] = [
    "c_eff_uniform",
    "defect_strength_t",
    "delta_z_plus",
    "delta_z_minus",
    "effective_lambda_forced",
    "c_eff_forced",
    "optimal_bias",
    "c_eff_biased",
];

//! Ensemble averages and scaling fits.

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, SpinInterval};
use crate::measurement::{run_trajectory, trajectory_seed, MeasurementScheme};
use crate::scalar::{CompensatedSum, Real};

/// Fewest points accepted by any fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Mean entropy of the interval `[1, ℓ]` over `n` states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub ell: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Entropy samples of one chain, sorted by interval length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    l_spin: usize,
    samples: Vec<EntropySample>,
}

impl EntropyProfile {
    pub fn new(l_spin: usize, mut samples: Vec<EntropySample>) -> Result<Self> {
        samples.sort_by_key(|s| s.ell);
        for w in samples.windows(2) {
            if w[0].ell == w[1].ell {
                return Err(Error::invalid(format!(
                    "duplicate interval length {}",
                    w[0].ell
                )));
            }
        }
        for s in &samples {
            if s.ell == 0 || s.ell >= l_spin {
                return Err(Error::invalid(format!(
                    "interval length {} outside 1..{l_spin}",
                    s.ell
                )));
            }
            if !(s.stderr >= 0.0) || !s.mean.is_finite() || !s.stderr.is_finite() {
                return Err(Error::invalid(format!("bad sample at ℓ = {}", s.ell)));
            }
            if s.n == 0 {
                return Err(Error::invalid(format!("sample at ℓ = {} has n = 0", s.ell)));
            }
        }
        Ok(Self { l_spin, samples })
    }

    /// Single-state profile at the given cuts.
    pub fn from_state<T: Real>(state: &GaussianState<T>, cuts: &[usize]) -> Result<Self> {
        let samples = cuts
            .iter()
            .map(|&ell| {
                Ok(EntropySample {
                    ell,
                    mean: state
                        .entanglement_entropy(SpinInterval::prefix(ell)?)?
                        .as_f64(),
                    stderr: 0.0,
                    n: 1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(state.l_spin(), samples)
    }

    pub fn l_spin(&self) -> usize {
        self.l_spin
    }

    pub fn samples(&self) -> &[EntropySample] {
        &self.samples
    }

    /// Same profile with every mean and standard error multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| EntropySample {
                mean: s.mean * alpha,
                stderr: s.stderr * alpha.abs(),
                ..*s
            })
            .collect();
        Self {
            l_spin: self.l_spin,
            samples,
        }
    }

    /// CSV with header `ell,mean_S,stderr_S,n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ell,mean_S,stderr_S,n")?;
        for s in &self.samples {
            writeln!(w, "{},{:.16e},{:.16e},{}", s.ell, s.mean, s.stderr, s.n)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(l_spin: usize, r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        match lines.next().transpose()? {
            Some(h) if h.trim() == "ell,mean_S,stderr_S,n" => {}
            _ => return Err(Error::invalid("entropy profile CSV has the wrong header")),
        }
        let mut samples = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::invalid(format!("malformed profile row '{line}'"));
            if f.len() != 4 {
                return Err(bad());
            }
            samples.push(EntropySample {
                ell: f[0].parse().map_err(|_| bad())?,
                mean: f[1].parse().map_err(|_| bad())?,
                stderr: f[2].parse().map_err(|_| bad())?,
                n: f[3].parse().map_err(|_| bad())?,
            });
        }
        Self::new(l_spin, samples)
    }
}

/// Outcome of a straight-line fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// `c_eff` for entropy fits, `-2Δ` for power-law fits.
    pub coefficient: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Smallest and largest abscissa (`ℓ` or `r`) that entered the fit.
    pub window: (f64, f64),
    pub n_points: usize,
    /// Standard error of the coefficient from the fit residuals.
    #[serde(skip)]
    pub coefficient_stderr: f64,
}

impl FitResult {
    /// `Δ = -coefficient / 2` for power-law fits.
    pub fn scaling_dimension(&self) -> f64 {
        -0.5 * self.coefficient
    }
}

/// Open-boundary chord abscissa `(1/6) ln[(2L/π) sin(πℓ/L)]`.
pub fn chord_abscissa(l_spin: usize, ell: usize) -> f64 {
    let l = l_spin as f64;
    ((2.0 * l / PI) * (PI * ell as f64 / l).sin()).ln() / 6.0
}

/// Default entropy-fit window `[⌈L/8⌉, ⌊7L/8⌋]`.
pub fn default_window(l_spin: usize) -> (usize, usize) {
    (l_spin.div_ceil(8), 7 * l_spin / 8)
}

/// Evenly spaced cuts with the given stride covering the default window.
pub fn default_cuts(l_spin: usize, stride: usize) -> Vec<usize> {
    let (lo, hi) = default_window(l_spin);
    let stride = stride.max(1);
    let first = lo.div_ceil(stride) * stride;
    (first..=hi)
        .step_by(stride)
        .filter(|&l| l >= 1 && l < l_spin)
        .collect()
}

/// Window for trajectory-averaged fits, `[L/32, L - L/32]` (at least two
/// sites from either end).
///
/// Single trajectories fluctuate strongly from cut to cut, and the chord
/// abscissa barely varies inside the default window, so ensemble fits reach
/// further toward the edges.
pub fn ensemble_window(l_spin: usize) -> (usize, usize) {
    let margin = (l_spin / 32).max(2);
    (margin, l_spin.saturating_sub(margin))
}

/// Cuts with the given stride covering [`ensemble_window`].
pub fn ensemble_cuts(l_spin: usize, stride: usize) -> Vec<usize> {
    let (lo, hi) = ensemble_window(l_spin);
    let stride = stride.max(1);
    let first = lo.div_ceil(stride) * stride;
    (first..=hi)
        .step_by(stride)
        .filter(|&l| l >= 1 && l < l_spin)
        .collect()
}

/// [`fit_c_eff_window`] over [`ensemble_window`].
pub fn fit_c_eff_ensemble(profile: &EntropyProfile) -> Result<FitResult> {
    let (lo, hi) = ensemble_window(profile.l_spin);
    fit_c_eff_window(profile, lo, hi)
}

struct Line {
    slope: f64,
    intercept: f64,
    slope_stderr: f64,
    rms: f64,
}

/// Weighted least squares `y = a x + b` in centered form.
fn fit_line(x: &[f64], y: &[f64], w: Option<&[f64]>) -> Result<Line> {
    let n = x.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::FitFailure(format!(
            "{n} points in the fit window, need at least {MIN_FIT_POINTS}"
        )));
    }
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(weight).sum();
    let xm = (0..n).map(|i| weight(i) * x[i]).sum::<f64>() / sw;
    let ym = (0..n).map(|i| weight(i) * y[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| weight(i) * (x[i] - xm).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| weight(i) * (x[i] - xm) * (y[i] - ym)).sum();
    let spread = x.iter().fold(0.0f64, |m, &v| m.max((v - xm).abs()));
    if !(sxx > 0.0) || spread <= 1e-12 * xm.abs().max(1.0) {
        return Err(Error::FitFailure(
            "degenerate design: abscissae coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let resid: Vec<f64> = (0..n).map(|i| y[i] - slope * x[i] - intercept).collect();
    let rms = (resid.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let chi2: f64 = (0..n).map(|i| weight(i) * resid[i] * resid[i]).sum();
    let slope_stderr = (chi2 / (n - 2) as f64 / sxx).sqrt();
    if !slope.is_finite() || !intercept.is_finite() {
        return Err(Error::FitFailure("non-finite fit parameters".into()));
    }
    Ok(Line {
        slope,
        intercept,
        slope_stderr,
        rms,
    })
}

/// Fits `S(ℓ) = (c/6) ln[(2L/π) sin(πℓ/L)] + b` over the default window.
pub fn fit_c_eff(profile: &EntropyProfile) -> Result<FitResult> {
    let (lo, hi) = default_window(profile.l_spin);
    fit_c_eff_window(profile, lo, hi)
}

/// [`fit_c_eff`] restricted to `ℓ_min ≤ ℓ ≤ ℓ_max`. Samples are weighted by
/// `1/stderr²` when every sample in the window has a positive error.
pub fn fit_c_eff_window(
    profile: &EntropyProfile,
    ell_min: usize,
    ell_max: usize,
) -> Result<FitResult> {
    let pts: Vec<&EntropySample> = profile
        .samples
        .iter()
        .filter(|s| s.ell >= ell_min && s.ell <= ell_max)
        .collect();
    let x: Vec<f64> = pts
        .iter()
        .map(|s| chord_abscissa(profile.l_spin, s.ell))
        .collect();
    let y: Vec<f64> = pts.iter().map(|s| s.mean).collect();
    let weights: Option<Vec<f64>> = (!pts.is_empty() && pts.iter().all(|s| s.stderr > 0.0))
        .then(|| pts.iter().map(|s| s.stderr.powi(-2)).collect());
    let line = fit_line(&x, &y, weights.as_deref())?;
    Ok(FitResult {
        coefficient: line.slope,
        intercept: line.intercept,
        residual_rms: line.rms,
        window: (pts[0].ell as f64, pts[pts.len() - 1].ell as f64),
        n_points: pts.len(),
        coefficient_stderr: line.slope_stderr,
    })
}

/// Fits `ln C = coefficient · ln r + intercept` over all pairs.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<FitResult> {
    fit_power_law_window(pairs, f64::NEG_INFINITY, f64::INFINITY)
}

/// [`fit_power_law`] restricted to `r_min ≤ r ≤ r_max`. Nonpositive `C` are
/// dropped with a warning.
pub fn fit_power_law_window(pairs: &[(f64, f64)], r_min: f64, r_max: f64) -> Result<FitResult> {
    let kept = positive_pairs(pairs, r_min, r_max)?;
    let x: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let line = fit_line(&x, &y, None)?;
    Ok(FitResult {
        coefficient: line.slope,
        intercept: line.intercept,
        residual_rms: line.rms,
        window: (kept[0].0, kept[kept.len() - 1].0),
        n_points: kept.len(),
        coefficient_stderr: line.slope_stderr,
    })
}

/// Fits `ln C = coefficient · ln r + intercept + κ r` for `r_min ≤ r ≤ r_max`.
///
/// The linear term absorbs the slow drift of the local exponent that open
/// boundaries add to pairs spanning a sizeable fraction of the chain.
pub fn fit_power_law_corrected(pairs: &[(f64, f64)], r_min: f64, r_max: f64) -> Result<FitResult> {
    let kept = positive_pairs(pairs, r_min, r_max)?;
    let n = kept.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::FitFailure(format!(
            "{n} points in the fit window, need at least {MIN_FIT_POINTS}"
        )));
    }
    let nf = n as f64;
    let u: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let v: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let (um, vm, ym) = (
        u.iter().sum::<f64>() / nf,
        v.iter().sum::<f64>() / nf,
        y.iter().sum::<f64>() / nf,
    );
    let (mut suu, mut suv, mut svv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (du, dv, dy) = (u[i] - um, v[i] - vm, y[i] - ym);
        suu += du * du;
        suv += du * dv;
        svv += dv * dv;
        suy += du * dy;
        svy += dv * dy;
    }
    let det = suu * svv - suv * suv;
    if !(det > 1e-12 * suu * svv) {
        return Err(Error::FitFailure(
            "degenerate design: ln r and r are collinear".into(),
        ));
    }
    let slope = (svv * suy - suv * svy) / det;
    let kappa = (suu * svy - suv * suy) / det;
    let intercept = ym - slope * um - kappa * vm;
    let resid: Vec<f64> = (0..n)
        .map(|i| y[i] - slope * u[i] - kappa * v[i] - intercept)
        .collect();
    let ss: f64 = resid.iter().map(|r| r * r).sum();
    let slope_stderr = if n > 3 {
        (ss / (nf - 3.0) * svv / det).sqrt()
    } else {
        0.0
    };
    if !slope.is_finite() || !intercept.is_finite() {
        return Err(Error::FitFailure("non-finite fit parameters".into()));
    }
    Ok(FitResult {
        coefficient: slope,
        intercept,
        residual_rms: (ss / nf).sqrt(),
        window: (kept[0].0, kept[n - 1].0),
        n_points: n,
        coefficient_stderr: slope_stderr,
    })
}

fn positive_pairs(pairs: &[(f64, f64)], r_min: f64, r_max: f64) -> Result<Vec<(f64, f64)>> {
    let mut kept = Vec::new();
    let mut dropped = 0usize;
    for &(r, c) in pairs.iter().filter(|p| p.0 >= r_min && p.0 <= r_max) {
        if r > 0.0 && c > 0.0 && c.is_finite() {
            kept.push((r, c));
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::warn!("power-law fit: dropped {dropped} nonpositive points");
    }
    if kept.is_empty() {
        return Err(Error::FitFailure(
            "no positive points in the fit window".into(),
        ));
    }
    kept.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(kept)
}

/// `(r, |⟨σᶻ_j σᶻ_{j+r}⟩|)` for pairs centered on the middle of the chain,
/// `j = L/2 - ⌊r/2⌋ + 1`, for every `r_min ≤ r ≤ r_max`.
pub fn centered_zz_correlations<T: Real>(
    state: &GaussianState<T>,
    r_min: usize,
    r_max: usize,
) -> Result<Vec<(f64, f64)>> {
    let l = state.l_spin();
    if r_min == 0 || r_min > r_max || r_max >= l {
        return Err(Error::invalid(format!(
            "separations {r_min}..={r_max} do not fit a chain of {l} spins"
        )));
    }
    (r_min..=r_max)
        .map(|r| {
            let j = l / 2 - r / 2 + 1;
            Ok((
                r as f64,
                state.zz_correlator_abs_string(j, j + r)?.value.as_f64(),
            ))
        })
        .collect()
}

/// Separations used by [`fit_delta_z`]: `4 ≤ r ≤ min(32, L/8)`.
pub fn delta_z_range(l_spin: usize) -> (usize, usize) {
    (4, (l_spin / 8).min(32))
}

/// Scaling dimension of `σᶻ` from centered correlators over
/// [`delta_z_range`], with the boundary drift term of
/// [`fit_power_law_corrected`].
pub fn fit_delta_z<T: Real>(state: &GaussianState<T>) -> Result<FitResult> {
    let (lo, hi) = delta_z_range(state.l_spin());
    if hi < lo + MIN_FIT_POINTS - 1 {
        return Err(Error::FitFailure(format!(
            "a chain of {} spins is too short for a correlation fit",
            state.l_spin()
        )));
    }
    let pairs = centered_zz_correlations(state, lo, hi)?;
    fit_power_law_corrected(&pairs, lo as f64, hi as f64)
}

/// Sample mean and standard error of the mean (0 for a single value).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values
        .iter()
        .map(|v| (v - mean).powi(2))
        .collect::<CompensatedSum>()
        .value()
        / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Entropies `S([1, ℓ])` at every cut of `n_traj` independent trajectories,
/// in trajectory order.
pub fn trajectory_entropies<T: Real>(
    ground: &GaussianState<T>,
    lambda: T,
    scheme: MeasurementScheme,
    n_traj: usize,
    master_seed: u64,
    cuts: &[usize],
) -> Result<Vec<Vec<f64>>> {
    if n_traj == 0 {
        return Err(Error::invalid("an ensemble needs at least one trajectory"));
    }
    let intervals = cuts
        .iter()
        .map(|&ell| SpinInterval::prefix(ell))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = cuts.iter().find(|&&c| c == 0 || c >= ground.l_spin()) {
        return Err(Error::invalid(format!(
            "cut {bad} outside 1..{}",
            ground.l_spin()
        )));
    }
    (0..n_traj as u64)
        .into_par_iter()
        .map(|k| {
            let seed = trajectory_seed(master_seed, k);
            let (_, state) = run_trajectory(ground, lambda, scheme, seed)?;
            intervals
                .iter()
                .map(|&iv| state.entanglement_entropy(iv).map(Real::as_f64))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Mean entropy profile of an ensemble of trajectories. Deterministic in
/// `master_seed` and independent of the worker count.
pub fn ensemble_entropy<T: Real>(
    ground: &GaussianState<T>,
    lambda: T,
    scheme: MeasurementScheme,
    n_traj: usize,
    master_seed: u64,
    cuts: &[usize],
) -> Result<EntropyProfile> {
    let per_traj = trajectory_entropies(ground, lambda, scheme, n_traj, master_seed, cuts)?;
    profile_from_trajectories(ground.l_spin(), cuts, &per_traj)
}

/// Aggregates per-trajectory entropies (`rows[k][c]` for cut `cuts[c]`).
pub fn profile_from_trajectories(
    l_spin: usize,
    cuts: &[usize],
    rows: &[Vec<f64>],
) -> Result<EntropyProfile> {
    let samples = cuts
        .iter()
        .enumerate()
        .map(|(c, &ell)| {
            let column: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let (mean, stderr) = mean_and_stderr(&column);
            EntropySample {
                ell,
                mean,
                stderr,
                n: rows.len(),
            }
        })
        .collect();
    EntropyProfile::new(l_spin, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::build_ground_state;

    fn synthetic(l: usize, c: f64, b: f64) -> EntropyProfile {
        let samples = (1..l)
            .map(|ell| EntropySample {
                ell,
                mean: c * chord_abscissa(l, ell) + b,
                stderr: 0.0,
                n: 1,
            })
            .collect();
        EntropyProfile::new(l, samples).unwrap()
    }

    #[test]
    fn exact_linear_input_is_recovered() {
        let fit = fit_c_eff(&synthetic(128, 0.37, 0.4)).unwrap();
        assert!((fit.coefficient - 0.37).abs() < 1e-10);
        assert!((fit.intercept - 0.4).abs() < 1e-10);
        assert_eq!(fit.window, (16.0, 112.0));
        assert_eq!(fit.n_points, 97);
    }

    #[test]
    fn window_shrinking_and_scaling() {
        let p = synthetic(64, 0.29, -0.1);
        let full = fit_c_eff(&p).unwrap();
        let narrow = fit_c_eff_window(&p, 20, 40).unwrap();
        assert!((full.coefficient - narrow.coefficient).abs() < 1e-10);
        let scaled = fit_c_eff(&p.scaled(3.0)).unwrap();
        assert!((scaled.coefficient - 3.0 * full.coefficient).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_or_degenerate() {
        let p = synthetic(16, 0.5, 0.0);
        assert!(matches!(
            fit_c_eff_window(&p, 5, 7),
            Err(Error::FitFailure(_))
        ));
        let pairs = vec![(2.0, 1.0); 6];
        assert!(matches!(fit_power_law(&pairs), Err(Error::FitFailure(_))));
    }

    #[test]
    fn power_law_exponent() {
        let pairs: Vec<(f64, f64)> = (1..40)
            .map(|r| (r as f64, 3.0 * (r as f64).powf(-0.25)))
            .collect();
        let fit = fit_power_law(&pairs).unwrap();
        assert!((fit.scaling_dimension() - 0.125).abs() < 1e-10);
        let mut noisy = pairs.clone();
        noisy.push((50.0, -1.0));
        noisy.push((60.0, 0.0));
        let fit2 = fit_power_law(&noisy).unwrap();
        assert_eq!(fit2.n_points, pairs.len());
        let all_bad = vec![(1.0, -1.0), (2.0, 0.0)];
        assert!(matches!(fit_power_law(&all_bad), Err(Error::FitFailure(_))));
    }

    #[test]
    fn corrected_power_law_recovers_drift() {
        let pairs: Vec<(f64, f64)> = (2..60)
            .map(|r| {
                let r = r as f64;
                (r, 0.7 * r.powf(-0.86) * (0.013 * r).exp())
            })
            .collect();
        let fit = fit_power_law_corrected(&pairs, 4.0, 40.0).unwrap();
        assert!((fit.scaling_dimension() - 0.43).abs() < 1e-10);
        assert!((fit.intercept - 0.7f64.ln()).abs() < 1e-10);
        assert_eq!(fit.n_points, 37);
        assert!(fit.residual_rms < 1e-12);
        // A plain fit of the same data is visibly biased.
        let plain = fit_power_law_window(&pairs, 4.0, 40.0).unwrap();
        assert!((plain.scaling_dimension() - 0.43).abs() > 0.01);
        assert!(matches!(
            fit_power_law_corrected(&pairs, 4.0, 6.0),
            Err(Error::FitFailure(_))
        ));
    }

    #[test]
    fn ground_state_delta_z() {
        let g = build_ground_state::<f64>(128).unwrap();
        let fit = fit_delta_z(&g).unwrap();
        assert_eq!(fit.window, (4.0, 16.0));
        assert!((fit.scaling_dimension() - 0.125).abs() < 0.01);
        assert!(fit_delta_z(&build_ground_state::<f64>(48).unwrap()).is_err());
        assert!(centered_zz_correlations(&g, 0, 4).is_err());
    }

    #[test]
    fn fit_json_schema() {
        let fit = fit_power_law(&[(1.0, 1.0), (2.0, 0.5), (4.0, 0.25), (8.0, 0.125)]).unwrap();
        let v = serde_json::to_value(fit).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(
            keys,
            [
                "coefficient",
                "intercept",
                "n_points",
                "residual_rms",
                "window"
            ]
        );
    }

    #[test]
    fn profile_validation_and_csv() {
        assert!(EntropyProfile::new(
            8,
            vec![EntropySample {
                ell: 8,
                mean: 0.0,
                stderr: 0.0,
                n: 1
            }]
        )
        .is_err());
        assert!(EntropyProfile::new(
            8,
            vec![EntropySample {
                ell: 2,
                mean: 0.0,
                stderr: -1.0,
                n: 1
            }]
        )
        .is_err());
        assert!(EntropyProfile::new(
            8,
            vec![EntropySample {
                ell: 2,
                mean: 0.0,
                stderr: 0.0,
                n: 0
            }]
        )
        .is_err());
        let p = synthetic(12, 0.5, 0.1);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("ell,mean_S,stderr_S,n\n"));
        assert_eq!(EntropyProfile::read_csv(12, &buf[..]).unwrap(), p);
    }

    #[test]
    fn single_uniform_trajectory_has_zero_error() {
        let g = build_ground_state::<f64>(24).unwrap();
        let cuts = [4, 8, 12, 16];
        let prof = ensemble_entropy(&g, 0.4, MeasurementScheme::UniformPlus, 1, 3, &cuts).unwrap();
        let (_, state) = run_trajectory(&g, 0.4, MeasurementScheme::UniformPlus, 0).unwrap();
        let direct = EntropyProfile::from_state(&state, &cuts).unwrap();
        assert_eq!(prof, direct);
    }

    #[test]
    fn ensemble_is_reproducible() {
        let g = build_ground_state::<f64>(20).unwrap();
        let cuts = [5, 10, 15];
        let a = ensemble_entropy(&g, 0.5, MeasurementScheme::Born, 6, 11, &cuts).unwrap();
        let b = ensemble_entropy(&g, 0.5, MeasurementScheme::Born, 6, 11, &cuts).unwrap();
        assert_eq!(a, b);
        assert!(a.samples().iter().all(|s| s.n == 6 && s.stderr > 0.0));
        assert!(ensemble_entropy(&g, 0.5, MeasurementScheme::Born, 0, 11, &cuts).is_err());
        assert!(ensemble_entropy(&g, 0.5, MeasurementScheme::Born, 2, 11, &[20]).is_err());
    }

    #[test]
    fn default_cut_grid() {
        assert_eq!(default_window(64), (8, 56));
        let cuts = default_cuts(256, 8);
        assert_eq!(cuts.first(), Some(&32));
        assert_eq!(cuts.last(), Some(&224));
        assert_eq!(cuts.len(), 25);
        assert_eq!(ensemble_window(256), (8, 248));
        assert_eq!(ensemble_window(20), (2, 18));
        let cuts = ensemble_cuts(256, 8);
        assert_eq!((cuts[0], cuts[cuts.len() - 1], cuts.len()), (8, 248, 31));
    }
}

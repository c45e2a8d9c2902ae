//! The six workflows.

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use weakmeas_core::analytics::{
    c_eff_biased_prediction, c_eff_forced_prediction, c_eff_uniform, delta_z, optimal_bias,
    AnalyticCurve, Branch,
};
use weakmeas_core::ed::{self, Axis};
use weakmeas_core::measurement::{apply_outcomes, run_trajectory};
use weakmeas_core::stats::{
    centered_zz_correlations, chord_abscissa, default_window, delta_z_range, ensemble_entropy,
    ensemble_window, fit_c_eff_window, fit_delta_z,
};
use weakmeas_core::{
    build_ground_state, CovarianceState, EntropyProfile, FitResult, MeasurementScheme, Outcome,
};

use crate::config::{config_error, AxisArg, Bias, Command, RunConfig};
use crate::output::{Cell, OutputDir, Table};

pub fn run(cfg: &RunConfig) -> anyhow::Result<()> {
    let mut out = OutputDir::create(cfg)?;
    match cfg.command {
        Command::Ground => ground(cfg, &mut out)?,
        Command::Uniform => uniform(cfg, &mut out)?,
        Command::Ensemble => ensemble(cfg, &mut out)?,
        Command::Sweep => sweep(cfg, &mut out)?,
        Command::Analytic => analytic(cfg, &mut out)?,
        Command::Oracle => oracle(cfg, &mut out)?,
    }
    let root = out.finish(cfg)?;
    log::info!("wrote {}", root.display());
    Ok(())
}

/// Fit summary with the matching closed-form value.
#[derive(Serialize)]
struct Compared {
    fit: FitResult,
    prediction: Option<f64>,
}

fn single_state_cuts(cfg: &RunConfig) -> anyhow::Result<Vec<usize>> {
    let l = cfg.length();
    cfg.cuts().resolve(l, (l / 64).max(1), default_window(l))
}

fn ensemble_state_cuts(cfg: &RunConfig) -> anyhow::Result<Vec<usize>> {
    let l = cfg.length();
    cfg.cuts().resolve(l, (l / 32).max(1), ensemble_window(l))
}

fn profile_table(profile: &EntropyProfile, c_pred: Option<f64>, intercept: f64) -> Table {
    let l = profile.l_spin();
    let mut headers = vec!["ell", "entropy", "chord_abscissa"];
    if c_pred.is_some() {
        headers.push("entropy_prediction");
    }
    let mut t = Table::new(headers);
    for s in profile.samples() {
        let x = chord_abscissa(l, s.ell);
        let mut row = vec![s.ell.into(), s.mean.into(), x.into()];
        if let Some(c) = c_pred {
            row.push((intercept + c * x).into());
        }
        t.push(row);
    }
    t
}

/// `|⟨σᶻσᶻ⟩|` and connected `σˣσˣ` for centered pairs up to `L/2`.
fn correlator_table(state: &CovarianceState, delta_pred: Option<f64>) -> anyhow::Result<Table> {
    let l = state.l_spin();
    let r_max = l / 2;
    let zz = centered_zz_correlations(state, 1, r_max)?;
    let (r0, _) = delta_z_range(l);
    let anchor = zz.get(r0 - 1).map(|p| p.1);
    let mut headers = vec!["r", "zz_abs", "xx_connected"];
    if delta_pred.is_some() {
        headers.push("zz_prediction");
    }
    let mut t = Table::new(headers);
    for &(r, c) in &zz {
        let ri = r as usize;
        let j = l / 2 - ri / 2 + 1;
        let mut row = vec![ri.into(), c.into(), state.connected_xx(j, j + ri)?.into()];
        if let Some(d) = delta_pred {
            let pred = anchor.map(|a| a * (r / r0 as f64).powf(-2.0 * d));
            row.push(pred.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn ground(cfg: &RunConfig, out: &mut OutputDir) -> anyhow::Result<()> {
    let l = cfg.length();
    let g = build_ground_state::<f64>(l)?;
    let cuts = single_state_cuts(cfg)?;
    let profile = EntropyProfile::from_state(&g, &cuts)?;
    let (lo, hi) = default_window(l);
    let c_fit = fit_c_eff_window(&profile, lo, hi)?;
    out.table(
        "profile",
        &profile_table(&profile, Some(0.5), c_fit.intercept),
    )?;
    out.table("correlators", &correlator_table(&g, Some(0.125))?)?;
    let delta = fit_delta_z(&g).ok().map(|fit| Compared {
        fit,
        prediction: Some(0.125),
    });
    out.json(
        "fits",
        &json!({
            "c_eff": Compared { fit: c_fit, prediction: Some(0.5) },
            "delta_z": delta,
        }),
    )
}

fn scheme_of(cfg: &RunConfig, lambda: f64) -> anyhow::Result<MeasurementScheme> {
    let (name, bias) = cfg.scheme();
    let scheme = match bias {
        Some(Bias::Fixed(p)) => MeasurementScheme::biased(p),
        Some(Bias::Offset(d)) => MeasurementScheme::biased(optimal_bias(lambda)? + d),
        None => MeasurementScheme::from_name(&name, None),
    };
    scheme.map_err(|e| config_error(format!("λ = {lambda}: {e}")))
}

/// Closed-form `c_eff` for a scheme, when one exists and is in range.
fn prediction(scheme: MeasurementScheme, lambda: f64) -> Option<f64> {
    let value = match scheme {
        MeasurementScheme::Born => Ok(0.5),
        MeasurementScheme::Forced => c_eff_forced_prediction(lambda),
        MeasurementScheme::Biased { p_plus } => c_eff_biased_prediction(lambda, p_plus),
        MeasurementScheme::UniformPlus | MeasurementScheme::UniformMinus => c_eff_uniform(lambda),
    };
    value
        .map_err(|e| log::info!("no prediction at λ = {lambda}: {e}"))
        .ok()
}

fn uniform(cfg: &RunConfig, out: &mut OutputDir) -> anyhow::Result<()> {
    let l = cfg.length();
    let lambda = cfg.lambda();
    let scheme = scheme_of(cfg, lambda)?;
    let ground = build_ground_state::<f64>(l)?;
    let (record, state) = run_trajectory(&ground, lambda, scheme, 0)?;
    let cuts = single_state_cuts(cfg)?;
    let profile = EntropyProfile::from_state(&state, &cuts)?;
    let (lo, hi) = default_window(l);
    let c_fit = fit_c_eff_window(&profile, lo, hi)?;
    let c_pred = c_eff_uniform(lambda)?;
    let branch = if scheme == MeasurementScheme::UniformPlus {
        Branch::Plus
    } else {
        Branch::Minus
    };
    let d_pred = delta_z(lambda, branch)?;
    out.table(
        "profile",
        &profile_table(&profile, Some(c_pred), c_fit.intercept),
    )?;
    out.table("correlators", &correlator_table(&state, Some(d_pred))?)?;
    let delta = fit_delta_z(&state).ok().map(|fit| Compared {
        fit,
        prediction: Some(d_pred),
    });
    out.json(
        "fits",
        &json!({
            "c_eff": Compared { fit: c_fit, prediction: Some(c_pred) },
            "delta_z": delta,
        }),
    )?;
    out.json("record", &record)
}

fn ensemble_fit(
    cfg: &RunConfig,
    ground: &CovarianceState,
    lambda: f64,
    scheme: MeasurementScheme,
    cuts: &[usize],
) -> anyhow::Result<(EntropyProfile, FitResult)> {
    let profile = ensemble_entropy(ground, lambda, scheme, cfg.trajectories(), cfg.seed(), cuts)?;
    let (lo, hi) = ensemble_window(ground.l_spin());
    let fit = fit_c_eff_window(&profile, lo, hi)?;
    Ok((profile, fit))
}

fn ensemble(cfg: &RunConfig, out: &mut OutputDir) -> anyhow::Result<()> {
    let lambda = cfg.lambda();
    let scheme = scheme_of(cfg, lambda)?;
    let ground = build_ground_state::<f64>(cfg.length())?;
    let cuts = ensemble_state_cuts(cfg)?;
    let (profile, fit) = ensemble_fit(cfg, &ground, lambda, scheme, &cuts)?;
    let mut t = Table::new(["ell", "mean_S", "stderr_S", "n"]);
    for s in profile.samples() {
        t.push(vec![
            s.ell.into(),
            s.mean.into(),
            s.stderr.into(),
            s.n.into(),
        ]);
    }
    out.table("profile", &t)?;
    out.json("fit", &fit)?;
    out.json(
        "summary",
        &json!({
            "scheme": scheme.name(),
            "p_plus": scheme.fixed_p_plus(),
            "c_eff": fit.coefficient,
            "c_eff_stderr": fit.coefficient_stderr,
            "prediction": prediction(scheme, lambda),
        }),
    )
}

fn sweep(cfg: &RunConfig, out: &mut OutputDir) -> anyhow::Result<()> {
    let l = cfg.length();
    let ground = build_ground_state::<f64>(l)?;
    let mut t = Table::new(["lambda", "c_eff", "stderr", "prediction", "p_plus"]);
    for lambda in cfg.grid() {
        let scheme = scheme_of(cfg, lambda)?;
        let fit = if scheme.is_uniform() {
            let (_, state) = run_trajectory(&ground, lambda, scheme, 0)?;
            let profile = EntropyProfile::from_state(&state, &single_state_cuts(cfg)?)?;
            let (lo, hi) = default_window(l);
            fit_c_eff_window(&profile, lo, hi)?
        } else {
            ensemble_fit(cfg, &ground, lambda, scheme, &ensemble_state_cuts(cfg)?)?.1
        };
        log::info!("λ = {lambda}: c_eff = {:.4}", fit.coefficient);
        t.push(vec![
            lambda.into(),
            fit.coefficient.into(),
            fit.coefficient_stderr.into(),
            prediction(scheme, lambda).into(),
            match scheme {
                MeasurementScheme::Biased { p_plus } => p_plus.into(),
                _ => Cell::Missing,
            },
        ]);
    }
    out.table("sweep", &t)
}

fn analytic(cfg: &RunConfig, out: &mut OutputDir) -> anyhow::Result<()> {
    let name = cfg.curve();
    let delta_p = cfg.settings.delta_p.unwrap_or(0.0);
    let curve = AnalyticCurve::named(name, &cfg.grid(), delta_p)?;
    let mut t = Table::new(["lambda", name]);
    for &(l, v) in &curve.points {
        t.push(vec![l.into(), v.into()]);
    }
    out.table("curve", &t)
}

fn oracle(cfg: &RunConfig, out: &mut OutputDir) -> anyhow::Result<()> {
    let l = cfg.length();
    let lambda = cfg.lambda();
    let dense_ground = ed::ground_state_ed(l)?;
    match cfg.axis() {
        AxisArg::X => {
            let ground = build_ground_state::<f64>(l)?;
            let ground_dev = ed::cross_check(&ground, &dense_ground.state)?;
            let (record, state) =
                run_trajectory(&ground, lambda, MeasurementScheme::Born, cfg.seed())?;
            let mut dense = dense_ground.state.clone();
            for (k, &o) in record.outcomes.iter().enumerate() {
                dense = ed::apply_kraus_ed(&dense, k + 1, Axis::X, lambda, o)?.0;
            }
            let state_dev = ed::cross_check(&state, &dense)?;
            let seq: Vec<(usize, Outcome)> = record
                .outcomes
                .iter()
                .enumerate()
                .map(|(k, &o)| (k + 1, o))
                .collect();
            let mut replay = ground.clone();
            let log_p = apply_outcomes(&mut replay, lambda, &seq)?;
            let joint =
                ed::joint_born_probability(&dense_ground.state, Axis::X, lambda, &record.outcomes)?;
            let prob_dev = (log_p.exp() - joint).abs();
            let mut t = Table::new(["ell", "entropy_gaussian", "entropy_ed"]);
            for ell in 1..l {
                let sg = state.entanglement_entropy(weakmeas_core::SpinInterval::prefix(ell)?)?;
                t.push(vec![ell.into(), sg.into(), ed::ee_ed(&dense, ell)?.into()]);
            }
            out.table("profile", &t)?;
            out.json(
                "report",
                &json!({
                    "axis": "x",
                    "ground_energy": dense_ground.energy,
                    "ground_deviation": ground_dev,
                    "state_deviation": state_dev,
                    "probability_deviation": prob_dev,
                    "max_deviation": ground_dev.max(state_dev).max(prob_dev),
                    "record": record,
                }),
            )
        }
        AxisArg::Z => {
            let diag = ed::z_diagnostics(l, lambda).context("z-axis diagnostics")?;
            let plus =
                ed::post_select_uniform(&dense_ground.state, Axis::Z, lambda, Outcome::Plus)?;
            let minus =
                ed::post_select_uniform(&dense_ground.state, Axis::Z, lambda, Outcome::Minus)?;
            let flip = minus.fidelity(&plus.global_flip())?;
            let mut p = Table::new(["ell", "entropy"]);
            for s in diag.profile.samples() {
                p.push(vec![s.ell.into(), s.mean.into()]);
            }
            out.table("profile", &p)?;
            let mut iv = Table::new(["first", "last", "entropy"]);
            for e in &diag.intervals {
                iv.push(vec![e.first.into(), e.last.into(), e.entropy.into()]);
            }
            out.table("intervals", &iv)?;
            let mut zz = Table::new(["j", "jp", "zz_connected"]);
            for c in &diag.zz_connected {
                zz.push(vec![c.j.into(), c.jp.into(), c.value.into()]);
            }
            out.table("zz", &zz)?;
            out.json(
                "report",
                &json!({
                    "axis": "z",
                    "ground_energy": dense_ground.energy,
                    "half_chain_entropy": ed::ee_ed(&plus, l / 2)?,
                    "ground_half_chain_entropy": ed::ee_ed(&dense_ground.state, l / 2)?,
                    "global_flip_fidelity": flip,
                }),
            )
        }
    }
}

use bessel_paths::maxdist::{evaluate, prob_pitman_yor, prob_thm1};
use bessel_paths::mc_oracle::{estimate_cdf, McConfig};
use bessel_paths::specfun::bessel_zeros_with_bits;
use bessel_paths::{ModelParams, ProbabilityResult, Route};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{num_full, Cell, Format, Meta, Report};
use crate::reference::{self, Which};
use crate::{CliError, EvalArgs, McArgs, Outcome, SweepArgs, SweepVar, TableArgs, ZerosArgs};

/// Largest number of points a sweep may produce.
const MAX_SWEEP_POINTS: usize = 100_000;

/// Cross-checks run only up to this many paths.
const CHECK_MAX_N: usize = 10;

/// Two routes agree when they differ by at most this many combined error
/// estimates (plus a few ulps of the rounded outputs).
pub const CONSISTENCY_FACTOR: f64 = 100.0;

fn model_params(p: &ModelParams) -> Vec<(String, String)> {
    vec![
        ("n".into(), p.n_paths.to_string()),
        ("alpha".into(), num_full(p.alpha)),
        ("a".into(), num_full(p.start)),
        ("m".into(), num_full(p.wall)),
    ]
}

fn result_row(r: &ProbabilityResult) -> Vec<Cell> {
    vec![
        r.route.as_str().into(),
        r.value.into(),
        r.est_error.into(),
        r.truncation_error.into(),
        r.rounding_error.into(),
        r.n_terms_used.into(),
        (r.precision_bits as usize).into(),
        r.condition.into(),
    ]
}

/// `|x - y|` against the agreement tolerance of two results.
pub fn agreement(x: &ProbabilityResult, y: &ProbabilityResult) -> (f64, f64) {
    let diff = (x.value - y.value).abs();
    let ulps = 4.0 * f64::EPSILON * x.value.abs().max(y.value.abs());
    (diff, CONSISTENCY_FACTOR * (x.est_error + y.est_error) + ulps)
}

pub fn eval(args: &EvalArgs) -> Result<Outcome, CliError> {
    let params = ModelParams::new(args.n, args.alpha, args.a, args.m)?;
    let precision = args.numerics.precision()?;
    let trunc = args.numerics.truncation()?;
    let primary = evaluate(args.route, &params, &trunc, &precision, None)?;

    let mut params_meta = model_params(&params);
    params_meta.push(("route".into(), args.route.to_string()));
    let rerun = format!(
        "eval --n {} --alpha={} --a={} --m={} --route {}{} {}",
        args.n,
        num_full(args.alpha),
        num_full(args.a),
        num_full(args.m),
        args.route,
        if args.no_check { " --no-check" } else { "" },
        args.numerics.rerun()
    );
    let meta = Meta {
        command: "eval".into(),
        params: params_meta,
        precision_bits: Some(precision.working_bits),
        truncation: Some(trunc.to_string()),
        rerun,
    };
    let mut report = Report::new(
        meta,
        vec![
            "route",
            "value",
            "est_error",
            "truncation_error",
            "rounding_error",
            "n_terms_used",
            "precision_bits",
            "condition",
        ],
    );
    report.rows.push(result_row(&primary));
    if let Some(note) = &primary.note {
        report.notes.push(format!("note: {note}"));
    }

    let mut inconsistency = None;
    let check_route = match args.route {
        Route::Thm1 => Route::Thm2Hankel,
        _ => Route::Thm1,
    };
    if !args.no_check && params.n_paths <= CHECK_MAX_N {
        let other = evaluate(check_route, &params, &trunc, &precision, None)?;
        let (diff, tol) = agreement(&primary, &other);
        let ok = diff <= tol;
        report.rows.push(result_row(&other));
        report.notes.push(format!(
            "cross-check {} vs {}: |diff| = {}, tolerance = {}, agree = {ok}",
            primary.route,
            other.route,
            num_full(diff),
            num_full(tol)
        ));
        report.extra.insert(
            "cross_check".into(),
            json!({ "route": other.route.as_str(), "abs_diff": diff, "tolerance": tol, "agree": ok }),
        );
        if !ok {
            inconsistency = Some(format!(
                "{} = {} and {} = {} differ by {diff:e} > {tol:e}",
                primary.route, primary.value, other.route, other.value
            ));
        }
    }
    Ok(Outcome {
        report,
        default_format: Format::Pretty,
        inconsistency,
    })
}

pub fn table(which: Which, args: &TableArgs) -> Result<Outcome, CliError> {
    let precision = args.numerics.precision()?;
    let trunc = args.numerics.truncation()?;
    let t = reference::table(which);
    let results: Vec<ProbabilityResult> = t
        .rows
        .par_iter()
        .map(|r| {
            let p = ModelParams::new(r.n, r.alpha, r.a, r.m)?;
            evaluate(args.route, &p, &trunc, &precision, None)
        })
        .collect::<bessel_paths::Result<_>>()?;

    let name = match which {
        Which::One => "table1",
        Which::Two => "table2",
    };
    let first = t.rows[0];
    let mut params = vec![
        ("n".to_string(), first.n.to_string()),
        ("alpha".to_string(), num_full(first.alpha)),
    ];
    match which {
        Which::One => params.push(("a".into(), num_full(first.a))),
        Which::Two => params.push(("m".into(), num_full(first.m))),
    }
    params.push(("route".into(), args.route.to_string()));
    let meta = Meta {
        command: name.into(),
        params,
        precision_bits: Some(precision.working_bits),
        truncation: Some(trunc.to_string()),
        rerun: format!("{name} --route {} {}", args.route, args.numerics.rerun()),
    };
    let mut report = Report::new(meta, vec![t.variable, "computed", "reference_value", "abs_diff", "est_error"]);
    for (row, r) in t.rows.iter().zip(&results) {
        report.rows.push(vec![
            row.parameter.into(),
            r.value.into(),
            row.reference_value.into(),
            (r.value - row.reference_value).abs().into(),
            r.est_error.into(),
        ]);
    }
    let (monotone, direction) = match which {
        Which::One => (results.windows(2).all(|w| w[1].value > w[0].value), "increasing in M"),
        Which::Two => (results.windows(2).all(|w| w[1].value < w[0].value), "decreasing in a"),
    };
    report.notes.push(format!("computed column strictly {direction}: {monotone}"));
    let anomalies = reference::anomalies();
    report.extra.insert("computed_monotone".into(), json!(monotone));
    report.extra.insert("anomalies".into(), json!(anomalies));
    report.notes.extend(anomalies);
    Ok(Outcome {
        report,
        default_format: Format::Csv,
        inconsistency: None,
    })
}

/// Grid `from, from + step, ..., <= to`.
pub fn sweep_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err(CliError::Usage("sweep bounds and step must be finite".into()));
    }
    if !(step > 0.0) || to < from {
        return Err(CliError::Usage(format!("empty range: from {from} to {to} step {step}")));
    }
    let k = ((to - from) / step + 1e-9).floor();
    if k + 1.0 > MAX_SWEEP_POINTS as f64 {
        return Err(CliError::Usage(format!("sweep would produce more than {MAX_SWEEP_POINTS} points")));
    }
    Ok((0..=k as usize).map(|i| from + i as f64 * step).collect())
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let precision = args.numerics.precision()?;
    let trunc = args.numerics.truncation()?;
    let points = sweep_points(args.from, args.to, args.step)?;
    let (fixed_name, fixed) = match args.variable {
        SweepVar::M => ("a", args.a),
        SweepVar::A => ("m", args.m),
    };
    let fixed = fixed.ok_or_else(|| CliError::Usage(format!("sweeping {} needs --{fixed_name}", args.variable.name())))?;
    let params_at = |v: f64| match args.variable {
        SweepVar::M => ModelParams::new(args.n, args.alpha, fixed, v),
        SweepVar::A => ModelParams::new(args.n, args.alpha, v, fixed),
    };
    let values: Vec<f64> = points
        .par_iter()
        .map(|&v| Ok(evaluate(args.route, &params_at(v)?, &trunc, &precision, None)?.value))
        .collect::<bessel_paths::Result<_>>()?;

    let meta = Meta {
        command: "sweep".into(),
        params: vec![
            ("variable".into(), args.variable.name().into()),
            ("from".into(), num_full(args.from)),
            ("to".into(), num_full(args.to)),
            ("step".into(), num_full(args.step)),
            ("n".into(), args.n.to_string()),
            ("alpha".into(), num_full(args.alpha)),
            (fixed_name.into(), num_full(fixed)),
            ("route".into(), args.route.to_string()),
        ],
        precision_bits: Some(precision.working_bits),
        truncation: Some(trunc.to_string()),
        rerun: format!(
            "sweep --variable {} --from={} --to={} --step={} --n {} --alpha={} --{fixed_name}={} --route {} {}",
            args.variable.name(),
            num_full(args.from),
            num_full(args.to),
            num_full(args.step),
            args.n,
            num_full(args.alpha),
            num_full(fixed),
            args.route,
            args.numerics.rerun()
        ),
    };
    let mut report = Report::new(meta, vec![args.variable.name(), "probability"]);
    for (v, p) in points.iter().zip(&values) {
        report.rows.push(vec![(*v).into(), (*p).into()]);
    }
    Ok(Outcome {
        report,
        default_format: Format::Csv,
        inconsistency: None,
    })
}

pub fn zeros(args: &ZerosArgs) -> Result<Outcome, CliError> {
    let t = bessel_zeros_with_bits(args.alpha, args.count, args.tol, args.precision_bits)?;
    let meta = Meta {
        command: "zeros".into(),
        params: vec![
            ("alpha".into(), num_full(args.alpha)),
            ("count".into(), args.count.to_string()),
            ("tol".into(), num_full(args.tol)),
        ],
        precision_bits: Some(t.bits()),
        truncation: None,
        rerun: format!(
            "zeros --alpha={} --count {} --tol={} --precision-bits {}",
            num_full(args.alpha),
            args.count,
            num_full(args.tol),
            args.precision_bits
        ),
    };
    let mut report = Report::new(meta, vec!["n", "x_n", "residual"]);
    for (i, (x, r)) in t.zeros().iter().zip(t.residuals()).enumerate() {
        report.rows.push(vec![(i + 1).into(), x.to_f64().into(), (*r).into()]);
    }
    report.notes.push(format!("residual_bound: {}", num_full(t.residual_bound())));
    report.extra.insert("residual_bound".into(), json!(t.residual_bound()));
    Ok(Outcome {
        report,
        default_format: Format::Csv,
        inconsistency: None,
    })
}

/// Integer dimension from a user value, rejecting fractions.
pub fn integer_dim(d: f64) -> Result<u32, CliError> {
    if !(d.is_finite() && d >= 1.0 && d.fract() == 0.0 && d <= u32::MAX as f64) {
        return Err(CliError::Usage(format!("--dim {d} must be an integer >= 1")));
    }
    Ok(d as u32)
}

pub fn mc(args: &McArgs) -> Result<Outcome, CliError> {
    let dim = integer_dim(args.dim)?;
    let cfg = McConfig {
        dim,
        start: args.a,
        grid_points: args.grid,
        samples: args.samples,
        seed: args.seed,
        wall: args.m,
    };
    let est = estimate_cdf(&cfg)?;
    let alpha = cfg.alpha();
    let p = bessel_paths::PrecisionConfig::double_double();
    let trunc = bessel_paths::TruncationPolicy::default();
    let analytic = if args.m <= args.a {
        0.0
    } else if args.a == 0.0 {
        prob_pitman_yor(alpha, args.m, &trunc, &p)?.value
    } else {
        prob_thm1(&ModelParams::new(1, alpha, args.a, args.m)?, &trunc, &p)?.value
    };
    let z = if est.std_err > 0.0 { (est.p_hat - analytic) / est.std_err } else { 0.0 };

    let meta = Meta {
        command: "mc".into(),
        params: vec![
            ("dim".into(), dim.to_string()),
            ("alpha".into(), num_full(alpha)),
            ("a".into(), num_full(args.a)),
            ("m".into(), num_full(args.m)),
            ("samples".into(), args.samples.to_string()),
            ("grid".into(), args.grid.to_string()),
            ("seed".into(), args.seed.to_string()),
        ],
        precision_bits: None,
        truncation: None,
        rerun: format!(
            "mc --dim {dim} --a={} --m={} --samples {} --grid {} --seed {}",
            num_full(args.a),
            num_full(args.m),
            args.samples,
            args.grid,
            args.seed
        ),
    };
    let mut report = Report::new(
        meta,
        vec!["p_hat", "std_err", "p_hat_fine", "grid_bias_bracket", "analytic", "z_score"],
    );
    report.rows.push(vec![
        est.p_hat.into(),
        est.std_err.into(),
        est.p_hat_fine.into(),
        est.grid_bias_bracket.into(),
        analytic.into(),
        z.into(),
    ]);
    report.notes.push(format!("bias: {}", est.bias_note));
    report.notes.push(format!("p_hat_fine uses the same paths on {} steps", 2 * args.grid));
    Ok(Outcome {
        report,
        default_format: Format::Pretty,
        inconsistency: None,
    })
}

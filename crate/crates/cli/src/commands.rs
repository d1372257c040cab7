//! One function per subcommand; each returns a [`Report`] that the caller
//! renders in the requested format.

use std::fs::File;
use std::io::BufReader;

use nnbounds::approx::{estimate_error, widen_monotone_experiment, SearchBudget, TargetFunction};
use nnbounds::bounds::{
    approx_error_lower_bound, constant_weight_lower_bound, regime_phi, superconvergence_gap, tradeoff_table,
    width_lower_bound, Formula, Regime, CONSTANT_CONVENTION,
};
use nnbounds::entropy::{
    discretize_lipschitz_ball, entropy_curve, exact_entropy, greedy_entropy, interval_covering,
    CoveringResult, FunctionClassSpec, PointCloud,
};
use nnbounds::lipschitz::{empirical_lipschitz_with, LipschitzReport};
use nnbounds::{Error, Grid, Result};
use serde_json::{json, Value};

use crate::args::{
    ApproxArgs, BoundArgs, CountArgs, EntropyArgs, EntropyMethod, Format, FormulaArg, LipBoundArgs,
    LipVerifyArgs, SuperArgs, TargetFn, TradeoffArgs,
};

/// A subcommand's result in every output form.
pub struct Report {
    pub json: Value,
    /// Header row first.
    pub rows: Vec<Vec<String>>,
    /// Rendering used when no `--format` is given and the default is plain text.
    pub plain: Option<String>,
    pub default_format: Format,
    /// `false` only when a verification found a violation.
    pub pass: bool,
}

impl Report {
    fn new(json: Value, rows: Vec<Vec<String>>, default_format: Format) -> Self {
        Self {
            json,
            rows,
            plain: None,
            default_format,
            pass: true,
        }
    }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn num(v: f64) -> String {
    v.to_string()
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Shallow => "shallow",
        Regime::Deep => "deep",
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn count(args: &CountArgs) -> Result<Report> {
    let arch = args.arch.arch()?;
    let n = arch.param_count();
    let mut report = Report::new(
        json!({ "d": arch.input_dim(), "W": arch.width(), "l": arch.depth(), "n": n }),
        vec![
            header(&["d", "W", "l", "n"]),
            vec![
                arch.input_dim().to_string(),
                arch.width().to_string(),
                arch.depth().to_string(),
                n.to_string(),
            ],
        ],
        Format::Json,
    );
    report.plain = Some(format!("{n}\n"));
    Ok(report)
}

pub fn lip_bound(args: &LipBoundArgs) -> Result<Report> {
    let arch = args.arch.arch()?;
    let act = args.act.nonlinearity(true)?;
    let w = args.weight.rule()?.eval(arch.param_count() as f64);
    let report = LipschitzReport::new(&arch, &act, w, args.c)?;
    let mut rows = vec![header(&["j", "C", "log2_C", "layer_bound"])];
    for j in 0..=arch.depth() {
        rows.push(vec![
            j.to_string(),
            num(report.c[j]),
            num(report.log2_c[j]),
            report.layer_bounds.get(j).map(|&b| num(b)).unwrap_or_default(),
        ]);
    }
    Ok(Report::new(to_json(&report), rows, Format::Json))
}

pub fn lip_verify(args: &LipVerifyArgs) -> Result<Report> {
    let arch = args.arch.arch()?;
    let act = args.act.nonlinearity(false)?;
    let w = args.weight.rule()?.eval(arch.param_count() as f64);
    let grid = args.grid.grid(arch.input_dim())?;
    let report = LipschitzReport::new(&arch, &act, w, 1.0)?;
    if let Some(claim) = args.claim {
        if !(claim.is_finite() && claim >= 0.0) {
            return Err(Error::Input("--claim must be finite and >= 0".into()));
        }
    }
    let checked = args.claim.unwrap_or(report.certificate());
    let sampling = args.sampling();
    let emp = empirical_lipschitz_with(&arch, &act, w, &grid, args.pairs, args.seed, &sampling)?;
    let pass = emp.max_ratio <= checked;
    let margin = (emp.max_ratio > 0.0).then(|| checked / emp.max_ratio);
    let json = json!({
        "arch": arch,
        "act": act,
        "w": w,
        "L": report.activation_constant,
        "certificate": report.certificate(),
        "checked_constant": checked,
        "claim": args.claim,
        "pass": pass,
        "max_ratio": emp.max_ratio,
        "margin": margin,
        "valid_pairs": emp.valid_pairs,
        "skipped_pairs": emp.skipped_pairs,
        "no_valid_pairs": emp.no_valid_pairs(),
        "pairs": args.pairs,
        "seed": args.seed,
        "grid_points": grid.len(),
        "sampling": sampling,
        "witness": emp.argmax,
    });
    let rows = vec![
        header(&[
            "pass",
            "checked_constant",
            "max_ratio",
            "margin",
            "valid_pairs",
            "skipped_pairs",
            "witness_index",
        ]),
        vec![
            pass.to_string(),
            num(checked),
            num(emp.max_ratio),
            margin.map(num).unwrap_or_default(),
            emp.valid_pairs.to_string(),
            emp.skipped_pairs.to_string(),
            emp.argmax
                .as_ref()
                .map(|a| a.index.to_string())
                .unwrap_or_default(),
        ],
    ];
    let mut out = Report::new(json, rows, Format::Json);
    out.pass = pass;
    if !pass {
        log::warn!("empirical ratio {} exceeds {checked}", emp.max_ratio);
    }
    Ok(out)
}

fn load_cloud(args: &EntropyArgs) -> Result<(PointCloud, Value)> {
    if let Some(path) = &args.cloud {
        let file =
            File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
        let cloud = PointCloud::from_csv(BufReader::new(file), args.metric.into())?;
        return Ok((cloud, json!({ "kind": "csv", "path": path })));
    }
    if let Some(values) = &args.values {
        let points = values.iter().map(|&v| vec![v]).collect();
        return Ok((
            PointCloud::new(points, args.metric.into())?,
            json!({ "kind": "values" }),
        ));
    }
    let ball = args.ball.as_ref().expect("clap enforces one source");
    if ball.len() != 4 {
        return Err(Error::Input("--ball takes M,B,m,q".into()));
    }
    let samples = ball[2];
    if samples.fract() != 0.0 || samples < 0.0 {
        return Err(Error::Input(format!(
            "ball sample count m must be a whole number, got {samples}"
        )));
    }
    let class = FunctionClassSpec {
        lipschitz: ball[0],
        bound: ball[1],
        samples: samples as usize,
        step: ball[3],
    };
    let cloud = discretize_lipschitz_ball(&class)?;
    Ok((cloud, json!({ "kind": "lipschitz_ball", "class": class })))
}

pub fn entropy(args: &EntropyArgs) -> Result<Report> {
    let (results, source, size): (Vec<CoveringResult>, Value, usize) = if let Some(iv) = &args.interval {
        if iv.len() != 2 {
            return Err(Error::Input("--interval takes a,b".into()));
        }
        let results = (0..=args.n_max)
            .map(|n| interval_covering(iv[0], iv[1], n))
            .collect::<Result<_>>()?;
        (results, json!({ "kind": "interval", "a": iv[0], "b": iv[1] }), 0)
    } else {
        let (cloud, source) = load_cloud(args)?;
        let results = match args.method {
            EntropyMethod::Curve => entropy_curve(&cloud, args.n_max),
            EntropyMethod::Exact => (0..=args.n_max)
                .map(|n| exact_entropy(&cloud, n))
                .collect::<Result<_>>()?,
            EntropyMethod::Greedy => (0..=args.n_max).map(|n| greedy_entropy(&cloud, n)).collect(),
        };
        (results, source, cloud.len())
    };
    let mut rows = vec![header(&["n", "radius", "mode", "centers"])];
    for r in &results {
        let centers = if r.centers.is_empty() {
            r.center_points
                .iter()
                .map(|p| p.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
        } else {
            r.centers.iter().map(|c| c.to_string()).collect()
        };
        rows.push(vec![
            r.n.to_string(),
            num(r.radius),
            to_json(&r.mode).as_str().unwrap_or_default().to_string(),
            centers.join(";"),
        ]);
    }
    let json = json!({ "source": source, "metric": format!("{:?}", args.metric).to_lowercase(), "points": size, "results": results });
    Ok(Report::new(json, rows, Format::Json))
}

const BOUND_COLUMNS: [&str; 7] = ["n", "l", "W", "w", "value", "regime", "formula_id"];

pub fn bound(args: &BoundArgs) -> Result<Report> {
    let arch = args.arch.arch()?;
    let act = args.act.nonlinearity(true)?;
    let rule = args.weight.rule()?;
    let rate = args.rate.rate()?;
    let ns = if args.n.is_empty() {
        vec![arch.param_count() as f64]
    } else {
        args.n.clone()
    };
    let formula = match args.formula {
        FormulaArg::General => Formula::General,
        FormulaArg::ConstantWeight => Formula::ConstantWeight,
        FormulaArg::Width => Formula::WidthTransfer,
    };
    if formula == Formula::ConstantWeight && !rule.is_constant() {
        return Err(Error::Input(
            "--formula constant-weight needs a constant weight bound".into(),
        ));
    }
    let regime = Regime::of_depth(arch.depth());
    let mut rows = vec![header(&BOUND_COLUMNS)];
    let mut entries = Vec::new();
    for &n in &ns {
        let w = rule.eval(n);
        let value = match formula {
            Formula::General => approx_error_lower_bound(&arch, &act, &rule, &rate, n)?,
            Formula::ConstantWeight => constant_weight_lower_bound(&arch, &rate, n)?,
            Formula::WidthTransfer => {
                let phi = regime_phi(arch.depth(), arch.width(), w, n, args.c)?;
                width_lower_bound(&rate, n, phi)?
            }
        };
        rows.push(vec![
            num(n),
            arch.depth().to_string(),
            arch.width().to_string(),
            num(w),
            num(value),
            regime_name(regime).to_string(),
            formula.id().to_string(),
        ]);
        entries.push(
            json!({ "n": n, "l": arch.depth(), "W": arch.width(), "w": w, "value": value,
                             "regime": regime, "formula_id": formula.id() }),
        );
    }
    let json = json!({ "rate": rate, "weight_rule": rule, "act": act, "convention": CONSTANT_CONVENTION, "rows": entries });
    Ok(Report::new(json, rows, Format::Csv))
}

pub fn tradeoff(args: &TradeoffArgs) -> Result<Report> {
    let act = args.act.nonlinearity(true)?;
    let rule = args.weight.rule()?;
    let rate = args.rate.rate()?;
    let table = tradeoff_table(args.d, args.budget, &rule, &rate, &act, &args.depths)?;
    let mut rows = vec![header(&BOUND_COLUMNS)];
    for r in &table {
        rows.push(vec![
            r.n.to_string(),
            r.l.to_string(),
            r.width.to_string(),
            num(r.w),
            num(r.value),
            regime_name(r.regime).to_string(),
            r.formula.id().to_string(),
        ]);
    }
    let json = json!({ "n_budget": args.budget, "d": args.d, "rate": rate, "weight_rule": rule,
                       "convention": CONSTANT_CONVENTION, "rows": table });
    Ok(Report::new(json, rows, Format::Csv))
}

pub fn superconvergence(args: &SuperArgs) -> Result<Report> {
    if args.n_exp_min > args.n_exp_max || args.n_exp_max > 62 {
        return Err(Error::Input("need n-exp-min <= n-exp-max <= 62".into()));
    }
    let act = args.act.nonlinearity(true)?;
    let rule = args.weight.rule()?;
    let rate = args.rate.rate()?;
    let (width_rule, depth_rule) = args.rules()?;
    let n_list: Vec<f64> = (args.n_exp_min..=args.n_exp_max)
        .map(|e| (1u64 << e) as f64)
        .collect();
    let report = superconvergence_gap(
        &width_rule,
        &depth_rule,
        &rule,
        &rate,
        &act,
        &n_list,
        args.threshold,
    )?;
    let mut rows = vec![header(&["n", "l", "W", "w", "bound", "entropy_rate", "ratio"])];
    for p in &report.points {
        rows.push(vec![
            num(p.n),
            p.l.to_string(),
            p.width.to_string(),
            num(p.w),
            num(p.bound),
            num(p.entropy_rate),
            num(p.ratio),
        ]);
    }
    let json = json!({ "width_rule": width_rule, "depth_rule": depth_rule, "weight_rule": rule, "rate": rate,
                       "threshold": args.threshold, "report": report });
    Ok(Report::new(json, rows, Format::Json))
}

fn builtin_target(kind: TargetFn, grid: Grid) -> Result<TargetFunction> {
    match kind {
        TargetFn::Abs => TargetFunction::from_fn(grid, "abs", |x| (2.0 * x[0] - 1.0).abs()),
        TargetFn::Sine => TargetFunction::from_fn(grid, "sine", |x| (std::f64::consts::TAU * x[0]).sin()),
        TargetFn::Bump => {
            TargetFunction::from_fn(grid, "bump", |x| x.iter().map(|t| 4.0 * t * (1.0 - t)).product())
        }
    }
}

pub fn approx(args: &ApproxArgs) -> Result<Report> {
    let arch = args.arch.arch()?;
    let act = args.act.nonlinearity(false)?;
    let target = match (&args.target, args.target_fn) {
        (Some(path), _) => {
            let file =
                File::open(path).map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
            TargetFunction::from_csv(BufReader::new(file))?
        }
        (None, Some(kind)) => builtin_target(kind, args.grid.grid(arch.input_dim())?)?,
        (None, None) => unreachable!("clap enforces one target source"),
    };
    let budget =
        SearchBudget::new(args.samples, args.refine, args.seed).with_refine_starts(args.refine_starts);
    let meta = json!({ "arch": arch, "act": act, "w": args.w, "budget": budget,
                       "target": target.label(), "grid_points": target.grid().len() });
    if args.widths.is_empty() {
        let r = estimate_error(&target, &arch, &act, args.w, &budget)?;
        let rows = vec![
            header(&["W", "error", "sampled_error", "evaluations"]),
            vec![
                arch.width().to_string(),
                num(r.error),
                num(r.sampled_error),
                r.evaluations.to_string(),
            ],
        ];
        Ok(Report::new(
            json!({ "config": meta, "result": r }),
            rows,
            Format::Json,
        ))
    } else {
        let errs = widen_monotone_experiment(&target, &arch, &args.widths, &act, args.w, &budget)?;
        let mut rows = vec![header(&["W", "error"])];
        rows.extend(errs.iter().map(|e| vec![e.width.to_string(), num(e.error)]));
        Ok(Report::new(
            json!({ "config": meta, "widths": errs }),
            rows,
            Format::Json,
        ))
    }
}

//! Subcommand implementations.

use std::fmt::Write as _;

use infosep_core::common::{gacs_korner, gk_via_components, wyner_solve, WynerConfig, UNIT_TOL};
use infosep_core::dist::{DeterministicMap, JointDistribution, Unit};
use infosep_core::finfo::{f_information, FGenerator};
use infosep_core::harness::{
    refine_embedding, verify_separability, Measure, RefinementSpec, SolverConfig, Tolerances,
};
use infosep_core::ib::{ib_curve, ib_fixed_point, IbConfig};
use infosep_core::modal::{self, GROUPING_TOL};
use serde_json::{json, Map, Value};

use crate::cli::{Command, IbSweepArgs, MeasureArg, MeasuresArgs, ReduceArgs, SolverArgs, VerifyArgs};
use crate::io::{self, LoadedInput};
use crate::report::{self, csv_num, measure, num, nums};
use crate::CliError;

pub fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Measures(a) => cmd_measures(&a).map(|_| 0),
        Command::Reduce(a) => cmd_reduce(&a).map(|_| 0),
        Command::Verify(a) => cmd_verify(&a),
        Command::IbSweep(a) => cmd_ib_sweep(&a).map(|_| 0),
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Parse(format!("{name} must be positive, got {v}")))
    }
}

fn check_solver(s: &SolverArgs) -> Result<(), CliError> {
    if s.restarts == 0 {
        return Err(CliError::Parse("--restarts must be at least 1".into()));
    }
    Ok(())
}

fn beta_key(beta: f64) -> String {
    format!("ib_beta_{}", csv_num(beta))
}

/// The JSON report of `infosep measures`.
pub fn measures_report(input: &LoadedInput, args: &MeasuresArgs) -> Result<Value, CliError> {
    check_solver(&args.solver)?;
    if !(args.tol.is_finite() && args.tol >= 0.0) {
        return Err(CliError::Parse("--tol must be nonnegative".into()));
    }
    for &b in &args.beta {
        check_positive("--beta", b)?;
    }
    let j = &input.joint;
    let unit: Unit = args.solver.unit.into();
    let mut m = Map::new();

    m.insert("entropy_x".into(), measure(j.entropy_x(unit).value, Map::new()));
    m.insert("entropy_y".into(), measure(j.entropy_y(unit).value, Map::new()));
    m.insert("mi".into(), measure(j.mutual_information(unit).value, Map::new()));
    for f in FGenerator::builtins() {
        let v = f_information(j, &f, unit);
        let mut d = Map::new();
        d.insert("unit".into(), Value::from(v.unit.name()));
        m.insert(f.name().replace('-', "_"), measure(v.value, d));
    }

    let md = modal::modal_decompose(j)?;
    let mut d = Map::new();
    d.insert("sigmas".into(), nums(md.sigmas()));
    d.insert("unit".into(), Value::from(Unit::Dimensionless.name()));
    m.insert("max_correlation".into(), measure(md.sigmas().first().copied().unwrap_or(0.0), d));

    let gk = gacs_korner(j, UNIT_TOL, unit)?;
    let oracle = gk_via_components(j, unit);
    let mut d = Map::new();
    d.insert("k".into(), Value::from(gk.k));
    d.insert("component_count".into(), Value::from(gk.component_count));
    d.insert("components_value".into(), num(oracle.value.value));
    m.insert("gk".into(), measure(gk.value.value, d));

    let wcfg = WynerConfig {
        card_w: args.wyner_card,
        restarts: args.solver.restarts,
        residual_tol: args.tol,
        seed: args.solver.seed,
        unit,
        ..WynerConfig::default()
    };
    let w = wyner_solve(j, &wcfg)?;
    let mut d = Map::new();
    d.insert("card_w".into(), Value::from(w.card_w));
    d.insert("markov_residual".into(), num(w.markov_residual.value));
    d.insert("converged".into(), Value::from(w.converged));
    d.insert("restarts_used".into(), Value::from(w.restarts_used));
    d.insert("best_restart".into(), Value::from(w.best_restart));
    m.insert("wyner".into(), measure(w.value.value, d));

    let icfg = IbConfig {
        restarts: args.solver.restarts,
        seed: args.solver.seed,
        unit,
        ..IbConfig::default()
    };
    for &beta in &args.beta {
        let s = ib_fixed_point(j, beta, &icfg)?;
        let mut d = Map::new();
        d.insert("beta".into(), num(beta));
        d.insert("i_ux".into(), num(s.i_ux.value));
        d.insert("i_uy".into(), num(s.i_uy.value));
        d.insert("card_u".into(), Value::from(s.card_u));
        d.insert("converged".into(), Value::from(s.converged));
        m.insert(beta_key(beta), measure(s.lagrangian.value, d));
    }

    let mut body = Map::new();
    body.insert("unit".into(), Value::from(unit.name()));
    body.insert("nx".into(), Value::from(j.nx()));
    body.insert("ny".into(), Value::from(j.ny()));
    body.insert(
        "config".into(),
        json!({
            "seed": args.solver.seed,
            "restarts": args.solver.restarts,
            "tol": num(args.tol),
            "beta": nums(&args.beta),
            "wyner_card": w.card_w,
        }),
    );
    body.insert("measures".into(), Value::Object(m));
    Ok(report::envelope("measures", &input.sha256, body))
}

fn cmd_measures(args: &MeasuresArgs) -> Result<(), CliError> {
    let input = io::load_distribution(&args.input.input, args.input.normalize)?;
    let rep = measures_report(&input, args)?;
    io::write_output(args.json_out.as_deref(), &report::render(&rep))
}

fn joined_labels(map: &DeterministicMap, labels: Option<&[String]>) -> Vec<String> {
    map.classes()
        .iter()
        .map(|class| {
            class
                .iter()
                .map(|&i| labels.map_or_else(|| i.to_string(), |l| l[i].clone()))
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect()
}

fn maps_json(s: &DeterministicMap, t: &DeterministicMap) -> Value {
    json!({ "s": s.assignment(), "t": t.assignment() })
}

/// Reduced distribution and maps for `infosep reduce`.
pub fn reduce_input(input: &LoadedInput, strict: bool) -> Result<(Value, Value), CliError> {
    let j = &input.joint;
    let (s, t) = modal::minimal_sufficient_maps(j, GROUPING_TOL);
    let mut red = modal::reduce_joint(j, &s, &t, strict)?;
    if input.labeled {
        red = red.with_labels(joined_labels(&s, j.x_labels()), joined_labels(&t, j.y_labels()))?;
    }
    let file = io::to_distribution_file(&red, input.labeled);
    let dist = serde_json::to_value(&file).expect("distribution serializes");
    Ok((dist, maps_json(&s, &t)))
}

fn cmd_reduce(args: &ReduceArgs) -> Result<(), CliError> {
    let input = io::load_distribution(&args.input.input, args.input.normalize)?;
    let (dist, maps) = reduce_input(&input, args.strict)?;
    match (&args.out, &args.maps_out) {
        (None, None) => {
            let both = json!({ "reduced": dist, "maps": maps });
            io::write_output(None, &report::render(&both))
        }
        (out, maps_out) => {
            io::write_output(out.as_deref(), &report::render(&dist))?;
            if let Some(p) = maps_out {
                io::write_output(Some(p), &report::render(&maps))?;
            }
            Ok(())
        }
    }
}

/// Block sizes spreading `total` refined symbols over `n` base symbols.
fn even_sizes(total: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| total / n + usize::from(i < total % n)).collect()
}

fn selected_measures(sel: &[MeasureArg], j: &JointDistribution) -> Vec<Measure> {
    let all = [MeasureArg::Mi, MeasureArg::Finfo, MeasureArg::Gk, MeasureArg::Wyner, MeasureArg::Ib, MeasureArg::Theta];
    let sel: &[MeasureArg] = if sel.is_empty() { &all } else { sel };
    let mut out = Vec::new();
    for m in all.iter().filter(|m| sel.contains(m)) {
        match m {
            MeasureArg::Mi => out.push(Measure::MutualInformation),
            MeasureArg::Finfo => out.extend(FGenerator::builtins().into_iter().map(Measure::FInformation)),
            MeasureArg::Gk => out.push(Measure::GacsKorner),
            MeasureArg::Wyner => out.push(Measure::Wyner),
            MeasureArg::Ib => out.push(Measure::IbLagrangian(vec![1.5, 2.0, 5.0])),
            MeasureArg::Theta => {
                // R grid over [0, H(S)] for the minimal statistic S of X
                let (s, _) = modal::minimal_sufficient_maps(j, GROUPING_TOL);
                let mut ps = vec![0.0; s.image_size()];
                j.px().iter().enumerate().for_each(|(x, &w)| ps[s.apply(x)] += w);
                let hs = infosep_core::dist::entropy(&ps, Unit::Bits).value;
                let rs = (0..=10).map(|i| hs * i as f64 / 10.0).collect();
                out.push(Measure::Theta { betas: vec![1.1, 1.5, 2.0, 3.0, 5.0, 10.0], rs });
            }
        }
    }
    out
}

/// Verification report; the flag is the overall verdict.
pub fn verify_report(input: &LoadedInput, args: &VerifyArgs) -> Result<(Value, bool), CliError> {
    check_solver(&args.solver)?;
    check_positive("--tol", args.tol)?;
    check_positive("--exact-tol", args.exact_tol)?;
    let unit: Unit = args.solver.unit.into();
    let (j, s, t) = match (&args.maps, &args.auto_refine) {
        (Some(p), _) => {
            let (s, t) = io::load_maps(p)?;
            (input.joint.clone(), s, t)
        }
        (None, Some(sizes)) => {
            let base = input.joint.clone();
            let (nx, ny) = (sizes[0], sizes[1]);
            if nx < base.nx() || ny < base.ny() {
                return Err(CliError::Parse(format!(
                    "--auto-refine {nx} {ny} is smaller than the {}x{} input",
                    base.nx(),
                    base.ny()
                )));
            }
            let sx = even_sizes(nx, base.nx());
            let sy = even_sizes(ny, base.ny());
            let spec = RefinementSpec::with_sizes(base, &sx, &sy, args.solver.seed)?;
            refine_embedding(&spec)?
        }
        (None, None) => return Err(CliError::Parse("either --maps or --auto-refine is required".into())),
    };
    // the core reports sizes as DimensionError; surface it as a parse error
    if s.domain_size() != j.nx() || t.domain_size() != j.ny() {
        return Err(CliError::Parse(format!(
            "maps cover {}x{} symbols but the distribution is {}x{}",
            s.domain_size(),
            t.domain_size(),
            j.nx(),
            j.ny()
        )));
    }

    let measures = selected_measures(&args.measure, &j);
    let tols = Tolerances { exact: args.exact_tol, solver: args.tol };
    let solver = SolverConfig {
        wyner: WynerConfig {
            card_w: args.wyner_card,
            restarts: args.solver.restarts,
            seed: args.solver.seed,
            ..WynerConfig::default()
        },
        ib: IbConfig { restarts: args.solver.restarts, seed: args.solver.seed, ..IbConfig::default() },
        unit,
    };
    let rep = verify_separability(&j, &s, &t, &measures, &tols, &solver, args.strict)?;

    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "measure": r.measure,
                "raw": num(r.value_raw),
                "reduced": num(r.value_reduced),
                "gap": num(r.gap),
                "tol": num(r.tol),
                "unit": r.unit.name(),
                "converged": r.converged,
                "pass": r.pass,
            })
        })
        .collect();
    let mut body = Map::new();
    body.insert("unit".into(), Value::from(unit.name()));
    body.insert("nx".into(), Value::from(j.nx()));
    body.insert("ny".into(), Value::from(j.ny()));
    body.insert("maps".into(), maps_json(&rep.s, &rep.t));
    body.insert(
        "sufficiency".into(),
        json!({
            "sufficient": rep.sufficiency.sufficient,
            "max_ratio_gap": num(rep.sufficiency.max_ratio_gap),
            "cmi_s_bits": num(rep.sufficiency.cmi_s.value),
            "cmi_t_bits": num(rep.sufficiency.cmi_t.value),
        }),
    );
    body.insert(
        "config".into(),
        json!({
            "seed": args.solver.seed,
            "restarts": args.solver.restarts,
            "tol": num(args.tol),
            "exact_tol": num(args.exact_tol),
            "strict": args.strict,
            "auto_refine": args.auto_refine,
        }),
    );
    body.insert("rows".into(), Value::Array(rows));
    body.insert("pass".into(), Value::from(rep.pass));
    Ok((report::envelope("verify", &input.sha256, body), rep.pass))
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let input = io::load_distribution(&args.input.input, args.input.normalize)?;
    let (rep, pass) = verify_report(&input, args)?;
    io::write_output(args.json_out.as_deref(), &report::render(&rep))?;
    if pass {
        Ok(0)
    } else {
        eprintln!("infosep: verification failed");
        Ok(CliError::VERIFICATION)
    }
}

/// CSV of `infosep ib-sweep`: one row per β, then the envelope as `#` rows.
pub fn ib_sweep_csv(input: &LoadedInput, args: &IbSweepArgs) -> Result<String, CliError> {
    check_solver(&args.solver)?;
    for &b in &args.beta_grid {
        check_positive("--beta-grid", b)?;
    }
    if args.beta_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Parse("--beta-grid must be ascending".into()));
    }
    let cfg = IbConfig {
        card_u: args.card_u,
        restarts: args.solver.restarts,
        seed: args.solver.seed,
        unit: args.solver.unit.into(),
        ..IbConfig::default()
    };
    let curve = ib_curve(&input.joint, &args.beta_grid, &cfg)?;
    let mut out = String::from("beta,i_ux,i_uy,lagrangian,converged\n");
    for s in &curve.solutions {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_num(s.beta),
            csv_num(s.i_ux.value),
            csv_num(s.i_uy.value),
            csv_num(s.lagrangian.value),
            s.converged
        );
    }
    let _ = writeln!(out, "# envelope ({}): R,theta", curve.unit.name());
    for (r, theta) in &curve.points {
        let _ = writeln!(out, "# {},{}", csv_num(*r), csv_num(*theta));
    }
    Ok(out)
}

fn cmd_ib_sweep(args: &IbSweepArgs) -> Result<(), CliError> {
    let input = io::load_distribution(&args.input.input, args.input.normalize)?;
    let csv = ib_sweep_csv(&input, args)?;
    io::write_output(args.csv_out.as_deref(), &csv)
}

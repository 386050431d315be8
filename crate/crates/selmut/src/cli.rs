//! Command-line interface: scenario runs, eigenvalue studies, diagnostics on
//! checkpoints, presets, and parameter sweeps.

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::asymptotics::{self};
use crate::config::{self};
use crate::domain::{Field1D, Field2D};
use crate::equilibrium::{self, EquilibriumResult, InitSpec};
use crate::error::{Result, SelmutError};
use crate::io::{self, RunManifest};
use crate::model::{Scenario, ScenarioConfig};
use crate::presets::{self, PresetStudy};
use crate::spectral;

#[derive(Parser, Debug)]
#[command(name = "selmut", about = "Equilibria of structured populations with mutation and dispersal", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Scenario file (flat key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name used instead of --config.
    #[arg(long)]
    preset: Option<String>,
    /// Override model.epsilon.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override grid.hx.
    #[arg(long)]
    hx: Option<f64>,
    /// Override grid.htheta.
    #[arg(long)]
    htheta: Option<f64>,
    /// Additional `key=value` overrides (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct InitArgs {
    /// Initial density: `constant` or `gaussian`.
    #[arg(long, default_value = "constant")]
    init: String,
    /// Value of the constant init.
    #[arg(long, default_value_t = 1.0)]
    init_value: f64,
    /// Trait center of the gaussian init.
    #[arg(long, default_value_t = 0.0)]
    init_center: f64,
    /// Trait width of the gaussian init (default A/4).
    #[arg(long)]
    init_width: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for a steady state and write density/marginal tables.
    Equilibrium {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        init: InitArgs,
    },
    /// Principal eigenvalue lambda(theta, rho) and its eigenfunction.
    Eigen {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        theta: f64,
        /// `zero`, a constant (e.g. `0.5`), or a checkpoint path.
        #[arg(long, default_value = "zero")]
        rho: String,
    },
    /// Ladder of 2-D principal eigenvalues against min lambda(theta, 0).
    MuStudy {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated epsilon values.
        #[arg(long)]
        epsilons: String,
    },
    /// Run the asymptotic diagnostics on a stored equilibrium.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Iterate the chi map to a candidate emergent trait.
    Chi {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0.0)]
        theta_init: f64,
        /// `zero`, a constant, or a checkpoint path.
        #[arg(long, default_value = "zero")]
        rho: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Equilibrium runs over a list of values for one config key.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Config key to vary (e.g. model.epsilon).
        #[arg(long)]
        key: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
    /// Run a bundled scenario (fig1, fig2, fig3, fig4-near, fig4-far,
    /// exampleA, mu-ladder, g-scan, fragmentation-scan).
    Preset {
        name: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// Entry point; returns a process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version through this path with status 0
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SelmutError::Usage(_) | SelmutError::Config(_) | SelmutError::Domain(_) => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Equilibrium { cfg, init } => cmd_equilibrium(&cfg, &init),
        Command::Eigen { cfg, theta, rho } => cmd_eigen(&cfg, theta, &rho),
        Command::MuStudy { cfg, epsilons } => cmd_mu_study(&cfg, &epsilons),
        Command::Verify { cfg, checkpoint } => cmd_verify(&cfg, &checkpoint),
        Command::Chi { cfg, theta_init, rho, tol } => cmd_chi(&cfg, theta_init, &rho, tol),
        Command::Sweep { cfg, key, values } => cmd_sweep(&cfg, &key, &values),
        Command::Preset { name, cfg } => cmd_preset(&name, &cfg),
    }
}

fn resolve_config(args: &ConfigArgs) -> Result<ScenarioConfig> {
    let base_text = match (&args.config, &args.preset) {
        (Some(path), None) => std::fs::read_to_string(path)?,
        (None, Some(name)) => config::render_config(&presets::preset(name)?.cfg),
        (Some(_), Some(_)) => {
            return Err(SelmutError::Usage("give either --config or --preset, not both".into()))
        }
        (None, None) => {
            return Err(SelmutError::Usage("one of --config or --preset is required".into()))
        }
    };
    let mut pairs = config::parse_pairs(&base_text)?;
    apply_overrides(&mut pairs, args)?;
    config::config_from_pairs(&pairs)
}

fn apply_overrides(pairs: &mut BTreeMap<String, String>, args: &ConfigArgs) -> Result<()> {
    if let Some(e) = args.epsilon {
        pairs.insert("model.epsilon".into(), e.to_string());
    }
    if let Some(h) = args.hx {
        pairs.insert("grid.hx".into(), h.to_string());
    }
    if let Some(h) = args.htheta {
        pairs.insert("grid.htheta".into(), h.to_string());
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            SelmutError::Usage(format!("--set expects key=value, got `{kv}`"))
        })?;
        pairs.insert(k.trim().to_string(), v.trim().to_string());
    }
    // route the merged map through the parser so unknown keys still error
    let rendered: String =
        pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    *pairs = config::parse_pairs(&rendered)?;
    Ok(())
}

fn init_spec(args: &InitArgs, cfg: &ScenarioConfig) -> Result<InitSpec> {
    match args.init.as_str() {
        "constant" => Ok(InitSpec::Constant { value: args.init_value }),
        "gaussian" => Ok(InitSpec::Gaussian {
            center: args.init_center,
            width: args.init_width.unwrap_or(cfg.trait_half_width / 4.0),
            amplitude: args.init_value,
        }),
        other => Err(SelmutError::Usage(format!(
            "--init must be constant or gaussian, got `{other}`"
        ))),
    }
}

fn parse_rho(spec: &str, scen: &Scenario) -> Result<Field1D> {
    let nx = scen.grid.x.len();
    if spec == "zero" {
        return Ok(Field1D::zeros(nx));
    }
    if let Ok(c) = spec.parse::<f64>() {
        return Ok(Field1D::constant(c, nx));
    }
    let ck = io::parse_checkpoint(&std::fs::read_to_string(Path::new(spec))?)?;
    let n = Field2D { values: ck.values, n_x: ck.n_x, n_theta: ck.n_theta };
    if ck.n_x != nx {
        return Err(SelmutError::Config(format!(
            "checkpoint has {} spatial nodes, scenario has {nx}",
            ck.n_x
        )));
    }
    Ok(equilibrium::total_density(&n, &scen.grid))
}

fn parse_list(values: &str) -> Result<Vec<f64>> {
    values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| SelmutError::Usage(format!("`{v}` is not a number")))
        })
        .collect()
}

struct RunContext {
    out: PathBuf,
    started: Instant,
    outputs: Vec<PathBuf>,
    summary: Vec<(String, String)>,
}

impl RunContext {
    fn new(out: &Path) -> Self {
        Self { out: out.to_path_buf(), started: Instant::now(), outputs: Vec::new(), summary: Vec::new() }
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.out.join(name);
        io::write_text(&path, text)?;
        self.outputs.push(path);
        Ok(())
    }

    fn note(&mut self, key: &str, value: String) {
        self.summary.push((key.to_string(), value));
    }

    fn finish(self, cfg: &ScenarioConfig, subcommand: &str) -> Result<()> {
        let manifest = RunManifest {
            scenario_hash: io::scenario_hash(cfg),
            subcommand: subcommand.to_string(),
            config_text: config::render_config(cfg),
            outputs: self.outputs.clone(),
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
            summary: self.summary.clone(),
        };
        io::write_text(&self.out.join(format!("{subcommand}_manifest.txt")), &manifest.render())?;
        for p in &self.outputs {
            if !p.exists() {
                return Err(SelmutError::Internal(format!(
                    "manifest lists missing output {}",
                    p.display()
                )));
            }
        }
        for (k, v) in &self.summary {
            println!("{k}: {v}");
        }
        Ok(())
    }
}

fn solve_and_write(
    scen: &Scenario,
    epsilon: f64,
    init: &InitSpec,
    ctx: &mut RunContext,
    tag: &str,
) -> Result<EquilibriumResult> {
    let survival = crate::model::validate_survival_assumption(scen)?;
    if !survival.satisfied {
        eprintln!(
            "warning: survival assumption not satisfied (min lambda(theta,0) = {:.6}); expecting extinction",
            survival.lambda_min
        );
    }
    let res = equilibrium::solve_equilibrium(scen, epsilon, init)?;
    ctx.write(&format!("{tag}_n.txt"), &io::render_checkpoint(scen, epsilon, &res.state.n))?;
    let rho_rows: Vec<Vec<f64>> = scen
        .grid
        .x
        .nodes
        .iter()
        .zip(&res.state.rho.0)
        .map(|(&x, &r)| vec![x, r])
        .collect();
    ctx.write(&format!("{tag}_rho.txt"), &io::render_table(&["x", "rho"], &rho_rows))?;
    let (nx, nt) = (scen.grid.x.len(), scen.grid.theta.len());
    let marginal_rows: Vec<Vec<f64>> = (0..nt)
        .map(|m| {
            let mass: f64 = (0..nx).map(|j| res.state.n.at(j, m) * scen.grid.x.weights[j]).sum();
            vec![scen.grid.theta.nodes[m], mass]
        })
        .collect();
    ctx.write(
        &format!("{tag}_theta_marginal.txt"),
        &io::render_table(&["theta", "mass"], &marginal_rows),
    )?;
    ctx.note(&format!("{tag}.converged"), res.converged.to_string());
    ctx.note(&format!("{tag}.steps"), res.steps.to_string());
    ctx.note(&format!("{tag}.residual"), format!("{:.3e}", res.residual));
    ctx.note(&format!("{tag}.mass"), format!("{:.6}", res.mass));
    Ok(res)
}

fn analysis_notes(
    scen: &Scenario,
    epsilon: f64,
    res: &EquilibriumResult,
    ctx: &mut RunContext,
    tag: &str,
) -> Result<()> {
    let report = asymptotics::analyze(scen, epsilon, &res.state.n, &res.state.rho)?;
    let mass = equilibrium::mass_and_bounds(res, scen);
    let mut pairs = vec![
        ("classification".to_string(), report.traits.classification.to_string()),
        ("constraint_gap".to_string(), format!("{:.6e}", report.constraint_gap)),
        ("u_max".to_string(), format!("{:.6e}", report.u_max)),
        ("hj_sup_on_support".to_string(), format!("{:.6e}", report.hj_sup_on_support)),
        ("harnack_max_ratio".to_string(), format!("{:.6e}", report.harnack_max_ratio)),
        ("lipschitz_x_over_eps".to_string(), format!("{:.6e}", report.lipschitz_x_over_eps)),
        ("lipschitz_theta".to_string(), format!("{:.6e}", report.lipschitz_theta)),
        ("lambda_min_at_rho".to_string(), format!("{:.6e}", report.lambda_min_at_rho)),
        ("lambda_argmin".to_string(), format!("{:.6}", report.lambda_argmin)),
        ("rho_min".to_string(), format!("{:.6e}", mass.rho_min)),
        ("rho_max".to_string(), format!("{:.6e}", mass.rho_max)),
        ("rho_upper_bound_ok".to_string(), mass.ok_upper.to_string()),
    ];
    for (i, t) in report.traits.traits.iter().enumerate() {
        pairs.push((format!("trait.{i}.theta_hat"), format!("{:.6}", t.theta_hat)));
        pairs.push((format!("trait.{i}.mass_fraction"), format!("{:.6}", t.mass_fraction)));
        pairs.push((format!("trait.{i}.unconcentrated"), t.unconcentrated.to_string()));
    }
    for inc in &report.inclusion {
        pairs.push((
            format!("inclusion.{:.4}", inc.theta_hat),
            format!(
                "near_max_u={} near_min_lambda={} x_spread_positive={}",
                inc.near_max_u, inc.near_min_lambda, inc.x_spread_positive
            ),
        ));
    }
    ctx.write(&format!("{tag}_report.txt"), &io::render_report(&pairs))?;
    ctx.note(&format!("{tag}.classification"), report.traits.classification.to_string());
    Ok(())
}

fn cmd_equilibrium(cfg_args: &ConfigArgs, init_args: &InitArgs) -> Result<()> {
    let cfg = resolve_config(cfg_args)?;
    let scen = Scenario::build(cfg.clone())?;
    let init = init_spec(init_args, &cfg)?;
    let mut ctx = RunContext::new(&cfg_args.out);
    let res = solve_and_write(&scen, cfg.epsilon, &init, &mut ctx, "equilibrium")?;
    analysis_notes(&scen, cfg.epsilon, &res, &mut ctx, "equilibrium")?;
    ctx.finish(&cfg, "equilibrium")
}

fn cmd_eigen(cfg_args: &ConfigArgs, theta: f64, rho_spec: &str) -> Result<()> {
    let cfg = resolve_config(cfg_args)?;
    let scen = Scenario::build(cfg.clone())?;
    let rho = parse_rho(rho_spec, &scen)?;
    let pair = spectral::principal_eigenpair_1d(&scen, theta, &rho, None)?;
    let mut ctx = RunContext::new(&cfg_args.out);
    let rows: Vec<Vec<f64>> = scen
        .grid
        .x
        .nodes
        .iter()
        .zip(&pair.function)
        .map(|(&x, &p)| vec![x, p])
        .collect();
    ctx.write("eigen_function.txt", &io::render_table(&["x", "psi"], &rows))?;
    ctx.note("lambda", format!("{:.12}", pair.value));
    ctx.note("residual", format!("{:.3e}", pair.residual_norm));
    ctx.note("iterations", pair.iterations.to_string());
    ctx.finish(&cfg, "eigen")
}

fn cmd_mu_study(cfg_args: &ConfigArgs, epsilons: &str) -> Result<()> {
    let cfg = resolve_config(cfg_args)?;
    let scen = Scenario::build(cfg.clone())?;
    let eps = parse_list(epsilons)?;
    let study = asymptotics::mu_convergence_study(&scen, &eps)?;
    let mut ctx = RunContext::new(&cfg_args.out);
    let rows: Vec<Vec<f64>> = study
        .rows
        .iter()
        .map(|r| vec![r.epsilon, r.mu, r.gap, if r.h5 { 1.0 } else { 0.0 }])
        .collect();
    ctx.write("mu_study.txt", &io::render_table(&["epsilon", "mu", "gap", "h5"], &rows))?;
    ctx.note("theta0_hat", format!("{:.6}", study.theta0_hat));
    ctx.note("lambda_ref", format!("{:.12}", study.lambda_ref));
    for r in &study.rows {
        ctx.note(&format!("gap.eps{}", r.epsilon), format!("{:.6e}", r.gap));
    }
    ctx.finish(&cfg, "mu-study")
}

fn cmd_verify(cfg_args: &ConfigArgs, checkpoint: &Path) -> Result<()> {
    let cfg = resolve_config(cfg_args)?;
    let scen = Scenario::build(cfg.clone())?;
    let ck = io::parse_checkpoint(&std::fs::read_to_string(checkpoint)?)?;
    if let Some(h) = ck.scenario_hash {
        let expect = io::scenario_hash(&cfg);
        if h != expect {
            return Err(SelmutError::Config(format!(
                "checkpoint scenario hash {h:016x} does not match configuration {expect:016x}"
            )));
        }
    }
    if ck.n_x != scen.grid.x.len() || ck.n_theta != scen.grid.theta.len() {
        return Err(SelmutError::Config(format!(
            "checkpoint grid {}x{} does not match scenario {}x{}",
            ck.n_x,
            ck.n_theta,
            scen.grid.x.len(),
            scen.grid.theta.len()
        )));
    }
    let n = Field2D { values: ck.values, n_x: ck.n_x, n_theta: ck.n_theta };
    let rho = equilibrium::total_density(&n, &scen.grid);
    let report = asymptotics::analyze(&scen, ck.epsilon, &n, &rho)?;
    let mut ctx = RunContext::new(&cfg_args.out);
    let u = asymptotics::hopf_cole(&n, ck.epsilon)?;
    let hj = asymptotics::hj_residual(&scen, &u, &rho)?;
    let rows: Vec<Vec<f64>> = hj
        .per_theta
        .iter()
        .map(|r| {
            vec![r.theta, r.u_bar, r.grad_sq, r.lambda, r.residual, if r.on_support { 1.0 } else { 0.0 }]
        })
        .collect();
    ctx.write(
        "verify_hj.txt",
        &io::render_table(&["theta", "u_bar", "grad_sq", "lambda", "residual", "on_support"], &rows),
    )?;
    ctx.note("classification", report.traits.classification.to_string());
    ctx.note("constraint_gap", format!("{:.6e}", report.constraint_gap));
    ctx.note("hj_sup_on_support", format!("{:.6e}", report.hj_sup_on_support));
    ctx.note("harnack_max_ratio", format!("{:.6e}", report.harnack_max_ratio));
    ctx.note("lipschitz_x_over_eps", format!("{:.6e}", report.lipschitz_x_over_eps));
    ctx.note("lipschitz_theta", format!("{:.6e}", report.lipschitz_theta));
    ctx.note("lambda_min_at_rho", format!("{:.6e}", report.lambda_min_at_rho));
    ctx.finish(&cfg, "verify")
}

fn cmd_chi(cfg_args: &ConfigArgs, theta_init: f64, rho_spec: &str, tol: f64) -> Result<()> {
    let cfg = resolve_config(cfg_args)?;
    let scen = Scenario::build(cfg.clone())?;
    let rho = parse_rho(rho_spec, &scen)?;
    let fp = spectral::chi_fixed_point(&scen, theta_init, &rho, tol)?;
    let mut ctx = RunContext::new(&cfg_args.out);
    ctx.note("theta_star", format!("{:.10}", fp.theta_star));
    ctx.note("contraction_estimate", format!("{:.6}", fp.contraction_estimate));
    ctx.note("converged", fp.converged.to_string());
    ctx.note("iterations", fp.iterations.to_string());
    ctx.finish(&cfg, "chi")
}

fn worker_count() -> usize {
    std::env::var("SELMUT_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

fn cmd_sweep(cfg_args: &ConfigArgs, key: &str, values: &str) -> Result<()> {
    let vals = parse_list(values)?;
    if vals.is_empty() {
        return Err(SelmutError::Usage("sweep needs at least one value".into()));
    }
    // build all configs up front so config errors surface before any run
    let mut runs = Vec::new();
    for &v in &vals {
        let mut args = cfg_args.clone();
        args.set.push(format!("{key}={v}"));
        let cfg = resolve_config(&args)?;
        runs.push((v, cfg));
    }
    let base_cfg = runs[0].1.clone();
    let queue: Mutex<VecDeque<(usize, f64, ScenarioConfig)>> = Mutex::new(
        runs.into_iter().enumerate().map(|(i, (v, c))| (i, v, c)).collect(),
    );
    let results: Mutex<Vec<(usize, f64, f64, bool, String)>> = Mutex::new(Vec::new());
    let workers = worker_count().min(vals.len());
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for _ in 0..workers {
            handles.push(scope.spawn(|| -> Result<()> {
                loop {
                    let job = queue.lock().unwrap().pop_front();
                    let Some((idx, value, cfg)) = job else { return Ok(()) };
                    let scen = Scenario::build(cfg.clone())?;
                    let res = equilibrium::solve_equilibrium(
                        &scen,
                        cfg.epsilon,
                        &InitSpec::Constant { value: 1.0 },
                    )?;
                    let traits =
                        asymptotics::detect_emergent_traits(&scen, &res.state.n, cfg.epsilon);
                    results.lock().unwrap().push((
                        idx,
                        value,
                        res.mass,
                        res.converged,
                        traits.classification.to_string(),
                    ));
                }
            }));
        }
        for h in handles {
            h.join().expect("sweep worker panicked")?;
        }
        Ok(())
    })?;
    let mut rows = results.into_inner().unwrap();
    rows.sort_by_key(|r| r.0);
    let mut ctx = RunContext::new(&cfg_args.out);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|(_, v, mass, conv, _)| vec![*v, *mass, if *conv { 1.0 } else { 0.0 }])
        .collect();
    ctx.write(&format!("sweep_{}.txt", key.replace('.', "_")), &io::render_table(&[key, "mass", "converged"], &table))?;
    for (_, v, mass, conv, class) in &rows {
        ctx.note(
            &format!("sweep.{v}"),
            format!("mass={mass:.6} converged={conv} classification={class}"),
        );
    }
    ctx.finish(&base_cfg, "sweep")
}

fn cmd_preset(name: &str, cfg_args: &ConfigArgs) -> Result<()> {
    if cfg_args.config.is_some() || cfg_args.preset.is_some() {
        return Err(SelmutError::Usage(
            "the preset subcommand takes the preset name as a positional argument".into(),
        ));
    }
    let p = presets::preset(name)?;
    let mut args = cfg_args.clone();
    args.preset = Some(name.to_string());
    let cfg = resolve_config(&args)?;
    let mut ctx = RunContext::new(&cfg_args.out);
    match &p.study {
        PresetStudy::Single => {
            let scen = Scenario::build(cfg.clone())?;
            let res = solve_and_write(
                &scen,
                cfg.epsilon,
                &InitSpec::Constant { value: 1.0 },
                &mut ctx,
                name,
            )?;
            analysis_notes(&scen, cfg.epsilon, &res, &mut ctx, name)?;
        }
        PresetStudy::EpsilonLadder { epsilons } => {
            let scen = Scenario::build(cfg.clone())?;
            let mut rows = Vec::new();
            for &eps in epsilons {
                if cfg_args.epsilon.is_some() && cfg_args.epsilon != Some(eps) {
                    continue; // --epsilon narrows the ladder to one rung
                }
                let tag = format!("{name}_eps{eps}");
                let res = solve_and_write(
                    &scen,
                    eps,
                    &InitSpec::Constant { value: 1.0 },
                    &mut ctx,
                    &tag,
                )?;
                let rep = asymptotics::analyze(&scen, eps, &res.state.n, &res.state.rho)?;
                analysis_notes(&scen, eps, &res, &mut ctx, &tag)?;
                rows.push(vec![
                    eps,
                    rep.constraint_gap,
                    rep.hj_sup_on_support,
                    rep.harnack_max_ratio,
                    rep.lipschitz_x_over_eps,
                    rep.lipschitz_theta,
                ]);
            }
            ctx.write(
                &format!("{name}_ladder.txt"),
                &io::render_table(
                    &["epsilon", "constraint_gap", "hj_sup", "harnack", "lip_x_over_eps", "lip_theta"],
                    &rows,
                ),
            )?;
        }
        PresetStudy::MuLadder { epsilons } => {
            let scen = Scenario::build(cfg.clone())?;
            let study = asymptotics::mu_convergence_study(&scen, epsilons)?;
            let rows: Vec<Vec<f64>> = study
                .rows
                .iter()
                .map(|r| vec![r.epsilon, r.mu, r.gap, if r.h5 { 1.0 } else { 0.0 }])
                .collect();
            ctx.write(
                &format!("{name}_table.txt"),
                &io::render_table(&["epsilon", "mu", "gap", "h5"], &rows),
            )?;
            ctx.note("lambda_ref", format!("{:.12}", study.lambda_ref));
            ctx.note("theta0_hat", format!("{:.6}", study.theta0_hat));
        }
        PresetStudy::GScan { theta, g_values } => {
            let scen = Scenario::build(cfg.clone())?;
            let rho = Field1D::zeros(scen.grid.x.len());
            let scan = spectral::g_monotonicity_scan(&scen, *theta, &rho, g_values)?;
            let rows: Vec<Vec<f64>> =
                scan.rows.iter().map(|r| vec![r.g, r.lambda]).collect();
            ctx.write(&format!("{name}_table.txt"), &io::render_table(&["g", "lambda"], &rows))?;
            ctx.note("violations", scan.violations.len().to_string());
        }
        PresetStudy::FragmentationScan { a, d_values } => {
            let mut rows = Vec::new();
            for &d in d_values {
                let mut cfg_d = cfg.clone();
                cfg_d.domain = presets::fragmented_domain(*a, d)?;
                let scen = Scenario::build(cfg_d)?;
                let res = equilibrium::solve_equilibrium(
                    &scen,
                    cfg.epsilon,
                    &InitSpec::Constant { value: 1.0 },
                )?;
                let rep = asymptotics::detect_emergent_traits(&scen, &res.state.n, cfg.epsilon);
                // mass fraction of the trait marginal inside |theta| < 0.25
                let (nx, nt) = (scen.grid.x.len(), scen.grid.theta.len());
                let mut center = 0.0;
                let mut total = 0.0;
                for m in 0..nt {
                    let mass: f64 =
                        (0..nx).map(|j| res.state.n.at(j, m) * scen.grid.x.weights[j]).sum();
                    total += mass;
                    if scen.grid.theta.nodes[m].abs() < 0.25 {
                        center += mass;
                    }
                }
                let frac = if total > 0.0 { center / total } else { 0.0 };
                ctx.note(
                    &format!("d.{d}"),
                    format!(
                        "classification={} traits={} center_mass_fraction={frac:.6}",
                        rep.classification,
                        rep.traits.len()
                    ),
                );
                rows.push(vec![d, rep.traits.len() as f64, frac]);
            }
            ctx.write(
                &format!("{name}_table.txt"),
                &io::render_table(&["d", "n_traits", "center_mass_fraction"], &rows),
            )?;
        }
    }
    ctx.finish(&cfg, &format!("preset-{name}"))
}

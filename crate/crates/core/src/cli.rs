//! The `epd` command line. Every subcommand prints a JSON summary on stdout
//! and writes its CSV artifact to `--out` when one is given.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::complexfield::{c, CPoint};
use crate::critical::{clinants, find_critical_with, scan_critical, tangent_angles, CriticalOptions, CriticalPoint};
use crate::darios::{self, DaRiosOptions, Flow, Grid};
use crate::density::Density;
use crate::epd::{dual_gradient, dual_residual, dual_value_at, epd_residual, EvalOptions, Jet2, JetSource, SolutionSpec};
use crate::error::{EpdError, Result};
use crate::hamiltonian::{self as ham, Differencing, FieldState, Functional, Operator};
use crate::hydro::{self, Axis};
use crate::params::FlowLabel;
use crate::report::ResidualReport;

const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "epd",
    version,
    about = "Solutions, critical points and hierarchies of the elliptic Euler-Poisson-Darboux equation",
    after_help = "Environment:\n  EPD_THREADS  maximum number of worker threads (default: one per core)\n\n\
                  Exit status: 0 when every checked residual is within tolerance, 1 on a tolerance\n\
                  or numerical failure, 2 on a bad configuration."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Solution spec as inline JSON or a path to a JSON file.
    #[arg(long, global = true)]
    spec: Option<String>,

    /// Sample grid: `a:b:n` for one axis, `a:b:n,c:d:m` for two (endpoints included).
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Residual tolerance; each command documents its default.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Output path for the CSV artifact.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Starting quadrature nodes for contour evaluation, or grid points for `ham`.
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Use the unnormalized jet (circle variants keep the 2πi factor).
    #[arg(long, global = true)]
    raw: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate W and its derivatives over a grid in the upper half-plane (tol 1e-9).
    Evaluate,
    /// Locate a critical point of W (tol 1e-9 on |∇W|).
    Critical {
        /// Starting point `re,im`.
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        guess: String,
    },
    /// Solve the hodograph equations over a two-parameter grid and check a flow (tol 100·h²).
    Evolve {
        #[arg(long, value_enum, default_value_t = EvolveFlow::Dtoda)]
        flow: EvolveFlow,
        /// Two flow labels such as `x1,y0` or `delta-x:0,delta-x:1`.
        #[arg(long, default_value = "x1,y0")]
        axes: String,
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        guess: String,
    },
    /// Check an identity over a grid in the upper half-plane (tol 1e-9, relative to the local 2-jet).
    Verify {
        #[arg(long, value_enum, default_value_t = Identity::Epd)]
        identity: Identity,
    },
    /// Tabulate the dual potential W* over a grid (tol 1e-9 on its equation, relative to the local 2-jet).
    Dual,
    /// Poisson-operator checks on a periodic state (tol 1e-10 on skew-adjointness).
    Ham {
        #[arg(long, value_enum, default_value_t = HamOp::J1)]
        op: HamOp,
        /// ε for `--op j1-eps`.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// State CSV with columns `x, rho, u`; a random smooth state is used otherwise.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = HamFunctional::Toda)]
        functional: HamFunctional,
        /// RK4 steps at Courant number 0.1; the final state goes to `--out`.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = HamDiff::Spectral)]
        differencing: HamDiff,
    },
    /// Da Rios filament histories from real densities over an `x,t` grid (tol 100·h²).
    Darios {
        /// φ as a density JSON object, e.g. `{"kind":"gaussian","amplitude":1,"center":0,"width":1}`.
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, value_enum, default_value_t = DaRiosFlow::DaRios)]
        flow: DaRiosFlow,
        /// Starting `τ,K` for the first node.
        #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
        guess: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EvolveFlow {
    /// dToda in Riemann form and in the φ form, on axes x1, y0.
    Dtoda,
    /// The hodograph equation between the two axes.
    Pde,
    /// The delta-basis equation for u = 1 - λ/β.
    Delta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Identity {
    Epd,
    Dual,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HamOp {
    J0,
    J1,
    J1Eps,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HamFunctional {
    Casimir,
    Toda,
    Dnls,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HamDiff {
    Spectral,
    Central4,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DaRiosFlow {
    DaRios,
    Higher2,
    Dtoda,
    Log2,
}

impl From<DaRiosFlow> for Flow {
    fn from(f: DaRiosFlow) -> Self {
        match f {
            DaRiosFlow::DaRios => Flow::DaRios,
            DaRiosFlow::Higher2 => Flow::Higher2,
            DaRiosFlow::Dtoda => Flow::DToda,
            DaRiosFlow::Log2 => Flow::Log2,
        }
    }
}

/// Outcome of a command: the JSON summary and whether every check passed.
struct Outcome {
    summary: Value,
    pass: bool,
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{}", e.render());
            return 2;
        }
        Err(e) => {
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(stderr, "error: {e}");
        return 2;
    }
    match execute(&cli) {
        Ok(o) => {
            let mut summary = o.summary;
            summary["schema"] = SCHEMA.into();
            summary["pass"] = o.pass.into();
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if is_config_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn is_config_error(e: &EpdError) -> bool {
    matches!(e, EpdError::Parse(_) | EpdError::InvalidSpec(_) | EpdError::Io(_))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("EPD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| EpdError::Parse(format!("EPD_THREADS must be a positive integer, got '{v}'")))?;
    // A second call in the same process keeps the existing pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: &Cli) -> Result<Outcome> {
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(EpdError::Parse(format!("--tol must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Evaluate => evaluate(cli),
        Command::Critical { guess } => critical(cli, parse_point(guess)?),
        Command::Evolve { flow, axes, guess } => evolve(cli, *flow, axes, parse_point(guess)?),
        Command::Verify { identity } => verify(cli, *identity),
        Command::Dual => dual(cli),
        Command::Ham {
            op,
            eps,
            state,
            functional,
            steps,
            differencing,
        } => hamiltonian(cli, *op, *eps, state.as_deref(), *functional, *steps, *differencing),
        Command::Darios { phi, psi, flow, guess } => {
            let phi = parse_density(phi.as_deref())?;
            let psi = parse_density(psi.as_deref())?;
            let (tau, k) = parse_pair(guess)?;
            da_rios(cli, &phi, &psi, (*flow).into(), darios::from_filament(k, tau)?)
        }
    }
}

fn load_spec(cli: &Cli) -> Result<SolutionSpec> {
    let s = cli.spec.as_deref().ok_or_else(|| EpdError::Parse("--spec is required".into()))?;
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        fs::read_to_string(s).map_err(|e| EpdError::Io(format!("{s}: {e}")))?
    };
    let spec = SolutionSpec::from_json(&text)?;
    spec.validate()?;
    Ok(spec)
}

fn parse_density(s: Option<&str>) -> Result<Density> {
    let Some(s) = s else {
        return Ok(Density::Zero);
    };
    let d: Density = serde_json::from_str(s)?;
    d.validate()?;
    Ok(d)
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let bad = || EpdError::Parse(format!("expected 're,im', got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn parse_point(s: &str) -> Result<CPoint> {
    let (a, b) = parse_pair(s)?;
    Ok(c(a, b))
}

/// `a:b:n` with both endpoints included.
fn parse_axis(s: &str) -> Result<Grid> {
    let bad = || EpdError::Parse(format!("expected 'a:b:n', got '{s}'"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, n] = parts[..] else {
        return Err(bad());
    };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    Ok(Grid::new(a, step, n))
}

fn parse_grid2(cli: &Cli, default: &str) -> Result<(Grid, Grid)> {
    let s = cli.grid.as_deref().unwrap_or(default);
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| EpdError::Parse(format!("expected two axes 'a:b:n,c:d:m', got '{s}'")))?;
    Ok((parse_axis(a)?, parse_axis(b)?))
}

/// Points of the complex grid `re × im`; all must lie in the upper half-plane.
fn plane_points(cli: &Cli) -> Result<Vec<CPoint>> {
    let (re, im) = parse_grid2(cli, "-1:1:5,0.5:1.5:5")?;
    if im.values().iter().any(|&v| v <= 0.0) {
        return Err(EpdError::Parse("imaginary grid values must be positive".into()));
    }
    Ok(im
        .values()
        .iter()
        .flat_map(|&y| re.values().into_iter().map(move |x| c(x, y)))
        .collect())
}

fn eval_options(cli: &Cli) -> EvalOptions {
    let mut o = EvalOptions::default();
    if let Some(n) = cli.nodes {
        o.nodes = n.max(8);
    }
    o
}

fn jet(spec: &SolutionSpec, cli: &Cli, z: CPoint) -> Result<Jet2> {
    let o = eval_options(cli);
    if cli.raw {
        spec.eval_jet_with(z, z.conj(), &o)
    } else {
        spec.eval_normalized_with(z, z.conj(), &o)
    }
}

fn write_artifact(cli: &Cli, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<Option<String>> {
    let Some(path) = &cli.out else {
        return Ok(None);
    };
    let mut file = fs::File::create(path).map_err(|e| EpdError::Io(format!("{}: {e}", path.display())))?;
    f(&mut file)?;
    file.flush()?;
    Ok(Some(path.display().to_string()))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn cjson(z: CPoint) -> Value {
    json!([z.re, z.im])
}

fn report_json(r: &ResidualReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

/// Local size of a 2-jet; stays meaningful at critical points where ∇W and
/// W_zz̄ vanish together.
fn jet_scale(j: &Jet2, z: CPoint) -> f64 {
    let second = j.wzz.norm() + j.wzbzb.norm() + j.wzzb.norm();
    let scale = (z - z.conj()).norm() * second + 0.5 * (j.wz.norm() + j.wzb.norm());
    scale.max(1e-300)
}

fn epd_relative(j: &Jet2, z: CPoint) -> f64 {
    epd_residual(j, z, z.conj(), 0.5).norm() / jet_scale(j, z)
}

fn evaluate(cli: &Cli) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let pts = plane_points(cli)?;
    let jets: Vec<Jet2> = pts.par_iter().map(|&z| jet(&spec, cli, z)).collect::<Result<_>>()?;
    let rel: Vec<f64> = jets
        .iter()
        .zip(&pts)
        .map(|(j, &z)| epd_relative(j, z))
        .collect();
    let artifact = write_artifact(cli, |w| {
        let mut w = csv::Writer::from_writer(w);
        let names = ["w", "wz", "wzb", "wzz", "wzbzb", "wzzb"];
        let mut header = vec!["re".to_string(), "im".to_string()];
        for n in names {
            header.push(format!("{n}_re"));
            header.push(format!("{n}_im"));
        }
        header.push("epd_rel".into());
        w.write_record(&header)?;
        for ((z, j), r) in pts.iter().zip(&jets).zip(&rel) {
            let mut row = vec![fmt(z.re), fmt(z.im)];
            for v in j.to_array() {
                row.push(fmt(v.re));
                row.push(fmt(v.im));
            }
            row.push(fmt(*r));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    let report = ResidualReport::from_values("epd", &rel, vec![pts.len()], 0.0);
    let pass = report.passes(cli.tol.unwrap_or(1e-9));
    Ok(Outcome {
        summary: json!({ "command": "evaluate", "report": report_json(&report), "out": artifact }),
        pass,
    })
}

fn critical_json(cp: &CriticalPoint) -> Value {
    json!({
        "beta": cjson(cp.beta),
        "beta_bar": cjson(cp.beta_bar),
        "order": cp.order,
        "residual": cp.residual,
        "iterations": cp.iterations,
        "w_beta_beta": cjson(cp.wbb),
        "w_beta_betabar": cjson(cp.wbmix),
    })
}

fn locate(src: &(impl JetSource + ?Sized), guess: CPoint) -> Result<CriticalPoint> {
    let opts = CriticalOptions::default();
    find_critical_with(src, guess, guess.conj(), &opts)
        .or_else(|_| scan_critical(src, guess, c(-4.0, 0.05), c(4.0, 4.0), 8, &opts))
}

fn critical(cli: &Cli, guess: CPoint) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let cp = locate(&spec, guess)?;
    let mut summary = critical_json(&cp);
    summary["command"] = "critical".into();
    if let (Ok(cl), Ok(angles)) = (clinants(&cp), tangent_angles(&cp)) {
        summary["clinants"] = cl.into_iter().map(cjson).collect();
        summary["tangent_angles"] = angles.into();
    }
    let pass = cp.residual <= cli.tol.unwrap_or(1e-9);
    Ok(Outcome { summary, pass })
}

fn evolve(cli: &Cli, flow: EvolveFlow, axes: &str, guess: CPoint) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let labels: Vec<FlowLabel> = axes
        .split(',')
        .map(|s| FlowLabel::parse_for(s, &spec))
        .collect::<Result<_>>()?;
    let [l0, l1] = labels[..] else {
        return Err(EpdError::Parse(format!("--axes needs two labels, got '{axes}'")));
    };
    let (g0, g1) = parse_grid2(cli, "0.96:1.04:5,0.96:1.04:5")?;
    let axes = [Axis::new(l0, g0.start, g0.step, g0.count), Axis::new(l1, g1.start, g1.step, g1.count)];
    let first = spec.with_param(l0, g0.start)?.with_param(l1, g1.start)?;
    let seed = locate(&first, guess)?;
    let field = hydro::hodograph_solve(&spec, axes, &seed, &CriticalOptions::default())?;
    let artifact = write_artifact(cli, |w| field.write_csv(w))?;
    let reports = match flow {
        EvolveFlow::Dtoda => vec![hydro::dtodab_residual(&field)?, hydro::dtoda_phi_residual(&field)?],
        EvolveFlow::Pde => vec![hydro::pde_residual(&field, l0, l1)?],
        EvolveFlow::Delta => vec![hydro::delta_flow_residual(&field)?],
    };
    let h = g0.step.abs().max(g1.step.abs());
    let tol = cli.tol.unwrap_or(100.0 * h * h);
    let pass = reports.iter().all(|r| r.passes(tol));
    Ok(Outcome {
        summary: json!({
            "command": "evolve",
            "converged": field.converged.iter().filter(|&&b| b).count(),
            "nodes": field.converged.len(),
            "tol": tol,
            "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
            "out": artifact,
        }),
        pass,
    })
}

fn dual_check(spec: &SolutionSpec, z: CPoint) -> Result<f64> {
    let r = dual_residual(spec, z, z.conj())?;
    let dj = dual_gradient(&spec.jet(z, z.conj())?, z, z.conj());
    Ok(r.norm() / jet_scale(&dj, z))
}

fn verify(cli: &Cli, identity: Identity) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let pts = plane_points(cli)?;
    let values: Vec<f64> = pts
        .par_iter()
        .map(|&z| match identity {
            Identity::Epd => {
                Ok(epd_relative(&jet(&spec, cli, z)?, z))
            }
            Identity::Dual => dual_check(&spec, z),
        })
        .collect::<Result<_>>()?;
    let name = match identity {
        Identity::Epd => "epd",
        Identity::Dual => "dual",
    };
    let report = ResidualReport::from_values(name, &values, vec![pts.len()], 0.0);
    let pass = report.passes(cli.tol.unwrap_or(1e-9));
    let summary = json!({ "command": "verify", "report": report_json(&report) });
    write_artifact(cli, |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&summary)?)?;
        Ok(())
    })?;
    Ok(Outcome { summary, pass })
}

fn dual(cli: &Cli) -> Result<Outcome> {
    let spec = load_spec(cli)?;
    let pts = plane_points(cli)?;
    let rows: Vec<(CPoint, f64)> = pts
        .par_iter()
        .map(|&z| Ok((dual_value_at(&spec, z)?, dual_check(&spec, z)?)))
        .collect::<Result<_>>()?;
    let artifact = write_artifact(cli, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["re", "im", "wstar_re", "wstar_im", "residual"])?;
        for (z, (v, r)) in pts.iter().zip(&rows) {
            w.write_record([fmt(z.re), fmt(z.im), fmt(v.re), fmt(v.im), fmt(*r)])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let report = ResidualReport::from_values("dual", &values, vec![pts.len()], 0.0);
    let pass = report.passes(cli.tol.unwrap_or(1e-9));
    Ok(Outcome {
        summary: json!({ "command": "dual", "report": report_json(&report), "out": artifact }),
        pass,
    })
}

fn random_state(n: usize, seed: u64) -> Result<FieldState> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (a, p, b) = (rng.random_range(0.1..0.5), rng.random_range(0.0..6.0), rng.random_range(-0.5..0.5));
    let k = rng.random_range(1..4) as f64;
    let length = 2.0 * std::f64::consts::PI;
    FieldState::sample(n, length, |x| 1.0 + a * (x + p).cos(), |x| b * (k * x).sin() + 0.3)
}

fn hamiltonian(
    cli: &Cli,
    op: HamOp,
    eps: f64,
    state: Option<&Path>,
    functional: HamFunctional,
    steps: usize,
    diff: HamDiff,
) -> Result<Outcome> {
    let s = match state {
        Some(p) => FieldState::read_csv(p)?,
        None => random_state(cli.nodes.unwrap_or(64), cli.seed)?,
    };
    let m = match diff {
        HamDiff::Spectral => Differencing::Spectral,
        HamDiff::Central4 => Differencing::Central4,
    };
    let op = match op {
        HamOp::J0 => Operator::J0,
        HamOp::J1 => Operator::J1,
        HamOp::J1Eps => Operator::J1Eps(eps),
    };
    let f = match functional {
        HamFunctional::Casimir => Functional::CasimirU,
        HamFunctional::Toda => Functional::H1Toda,
        HamFunctional::Dnls => Functional::DNLSEnergy,
    };
    let tol = cli.tol.unwrap_or(1e-10);
    let skew = ham::skew_check(op, &s, 8, cli.seed, m)?;
    let mut pass = skew.passes(tol);
    let mut summary = json!({ "command": "ham", "skew": report_json(&skew) });
    if !matches!(op, Operator::J1Eps(_)) {
        let g = ham::grad(&Functional::CasimirU, &s)?;
        let (a, b) = ham::apply(op, &g, &s, m)?;
        let casimir = a.iter().chain(&b).fold(0.0f64, |w, v| w.max(v.abs()));
        pass &= casimir <= 1e-12;
        summary["casimir"] = casimir.into();
    }
    let lf = ham::limit_flow(&s, &[0.1, 0.05, 0.025, 0.0125], m)?;
    summary["limit"] = json!({ "eps": lf.eps, "errors": lf.errors, "orders": lf.orders });
    if steps > 0 {
        let dt = ham::cfl_step(&s, 0.1);
        let end = ham::evolve(&s, &f, op, dt, steps, m)?;
        let (m0, p0) = s.integrals();
        let (m1, p1) = end.integrals();
        summary["evolve"] = json!({ "dt": dt, "steps": steps, "mass_drift": m1 - m0, "momentum_drift": p1 - p0 });
        summary["out"] = write_artifact(cli, |w| end.write_csv(w))?.into();
    }
    Ok(Outcome { summary, pass })
}

fn da_rios(cli: &Cli, phi: &Density, psi: &Density, flow: Flow, guess: CPoint) -> Result<Outcome> {
    let (x, t) = parse_grid2(cli, "-1:-0.6:5,0:0.04:5")?;
    let opts = DaRiosOptions {
        flow,
        guess,
        ..Default::default()
    };
    let hist = darios::solve_hodograph_darios(phi, psi, x, t, &opts)?;
    let artifact = write_artifact(cli, |w| hist.write_csv(w))?;
    let converged = hist.states.iter().flat_map(|s| &s.converged).filter(|&&b| b).count();
    let mut summary = json!({
        "command": "darios",
        "flow": flow,
        "converged": converged,
        "nodes": x.count * t.count,
        "out": artifact,
    });
    let mut pass = converged == x.count * t.count;
    if t.count >= 3 && x.count >= 3 {
        let r = darios::flow_residual(&hist, flow)?;
        let h = x.step.abs().max(t.step.abs());
        let tol = cli.tol.unwrap_or(100.0 * h * h);
        pass &= r.passes(tol);
        summary["tol"] = tol.into();
        summary["report"] = report_json(&r);
    }
    Ok(Outcome { summary, pass })
}

mod config;
mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cogpower::error::ErrorClass;
use cogpower::hierarchy::{best_response_gap, equilibrium};
use cogpower::learning::{best_response_dynamics, fictitious_play, LearningLimit, LearningTrace};
use cogpower::sensing::{
    build_sensing_game, classify_2player, correlated_segment, hybrid_game_check, hybrid_grid,
    mixed_equilibrium, nash_bargaining, NeCount,
};
use cogpower::welfare::{load_sweep, optimal_leaders_exact, role_gains};
use cogpower::{nash_powers, Action, Profile, Role, RolePartition};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use config::{ConfigError, Dynamics, ExperimentConfig, Init, Priors};
use output::{num, opt, Table};

const DEFAULT_ALPHAS: [f64; 4] = [0.0, 0.05, 0.10, 0.15];

#[derive(Parser)]
#[command(
    name = "cogpower",
    version,
    about = "Energy-efficient power control games with cognitive transmitters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination (defaults to [output] path, then stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random learning initializations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress the summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Nash equilibrium, plus the Stackelberg one when leaders are configured.
    Equilibrium,
    /// Welfare and total power for every number of leaders.
    WelfareSweep,
    /// Per-role utility gains over the Nash equilibrium.
    RoleGain,
    /// Two-player sensing game: payoffs, equilibria, correlated segment, bargaining.
    #[command(name = "sensing-2x2")]
    Sensing2x2,
    /// Largest welfare gain against load for several sensing costs.
    LoadSweep,
    /// Best-response and fictitious-play traces on the sensing game.
    Learn,
    /// Joint sensing-and-power game check on two players.
    Hybrid,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::WelfareSweep => "welfare-sweep",
            Command::RoleGain => "role-gain",
            Command::Sensing2x2 => "sensing-2x2",
            Command::LoadSweep => "load-sweep",
            Command::Learn => "learn",
            Command::Hybrid => "hybrid",
        }
    }
}

enum Failure {
    Config(String),
    Model(cogpower::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<cogpower::Error> for Failure {
    fn from(e: cogpower::Error) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Run = Result<Table, Failure>;

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    quiet: bool,
}

impl Context<'_> {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::Leader => "leader",
        Role::Follower => "follower",
    }
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

fn run_equilibrium(ctx: &Context) -> Run {
    let (net, f) = (&ctx.cfg.network, &ctx.cfg.efficiency);
    let ne = nash_powers(net, f)?;
    let mut reports = vec![("nash", ne.clone())];
    if let Some(leaders) = &ctx.cfg.leaders {
        let part = RolePartition::new(leaders.clone(), net.num_users())?;
        reports.push(("stackelberg", equilibrium(net, &part, f)?));
    }
    let mut t = Table::new(&[
        "kind",
        "user",
        "role",
        "power",
        "sinr",
        "target_sinr",
        "utility",
        "ratio_to_ne",
    ]);
    for (kind, rep) in &reports {
        let c = rep.constants;
        for k in 0..rep.powers.len() {
            let target = match rep.roles[k] {
                Role::Leader => c.gamma_star_l,
                Role::Follower => c.beta_star,
            };
            t.push(vec![
                kind.to_string(),
                (k + 1).to_string(),
                role_name(rep.roles[k]).into(),
                num(rep.powers[k]),
                num(rep.sinrs[k]),
                num(target),
                num(rep.utilities[k]),
                num(rep.utilities[k] / ne.utilities[k]),
            ]);
        }
        ctx.note(format!(
            "{kind}: welfare {} total power {} best-response gap {:.1e}{}",
            num(rep.welfare()),
            num(rep.total_power()),
            best_response_gap(net, f, rep),
            if rep.power_cap_hit.iter().any(|h| *h) {
                " (power cap exceeded)"
            } else {
                ""
            }
        ));
    }
    Ok(t)
}

fn run_welfare_sweep(ctx: &Context) -> Run {
    let (best, rows) = optimal_leaders_exact(&ctx.cfg.network, &ctx.cfg.efficiency)?;
    let mut t = Table::new(&["L", "F", "w", "w_ne", "gain_pct", "total_power", "feasible"]);
    for r in &rows {
        t.push(vec![
            r.leaders.to_string(),
            r.followers.to_string(),
            num(r.welfare),
            num(r.welfare_ne),
            num(r.gain_pct),
            num(r.total_power),
            flag(r.feasible),
        ]);
    }
    ctx.note(format!(
        "optimal number of leaders {best}, gain {}%",
        num(rows[best - 1].gain_pct)
    ));
    Ok(t)
}

fn run_role_gain(ctx: &Context) -> Run {
    let rows = role_gains(&ctx.cfg.network, &ctx.cfg.efficiency)?;
    let mut t = Table::new(&[
        "L",
        "F",
        "leader_gain_pct",
        "follower_gain_pct",
        "sum_gain_pct",
        "feasible",
    ]);
    for r in &rows {
        t.push(vec![
            r.leaders.to_string(),
            r.followers.to_string(),
            num(r.leader_gain_pct),
            opt(r.follower_gain_pct),
            num(r.sum_gain_pct),
            flag(r.feasible),
        ]);
    }
    Ok(t)
}

fn record(t: &mut Table, rec: &str, label: &str, x: [Option<f64>; 2], u: Option<&[f64]>) {
    t.push(vec![
        rec.into(),
        label.into(),
        opt(x[0]),
        opt(x[1]),
        opt(u.map(|u| u[0])),
        opt(u.map(|u| u[1])),
    ]);
}

fn ns_indicator(p: Profile) -> [Option<f64>; 2] {
    [0, 1].map(|i| {
        Some(if p.action(i) == Action::NotSense {
            1.0
        } else {
            0.0
        })
    })
}

fn run_sensing(ctx: &Context) -> Run {
    let (net, f) = (&ctx.cfg.network, &ctx.cfg.efficiency);
    let class = classify_2player(net, f)?;
    let game = build_sensing_game(net, f)?;
    let mut t = Table::new(&["record", "label", "x1", "x2", "u1", "u2"]);
    for p in game.profiles() {
        record(
            &mut t,
            "payoff",
            &p.label(2),
            ns_indicator(p),
            Some(game.payoffs(p)),
        );
    }
    record(
        &mut t,
        "classification",
        &class.count.to_string(),
        [Some(class.threshold), Some(class.closed_form_threshold)],
        None,
    );
    for p in &class.pure {
        record(
            &mut t,
            "pure",
            &p.label(2),
            ns_indicator(*p),
            Some(game.payoffs(*p)),
        );
    }
    if class.count == NeCount::Three {
        let m = mixed_equilibrium(net, f)?;
        let probs = [Some(m.profile.ns_probs[0]), Some(m.profile.ns_probs[1])];
        record(&mut t, "mixed", "ns_prob", probs, Some(&m.utilities));
        record(
            &mut t,
            "mixed_closed_form",
            "ns_prob",
            [Some(m.closed_form), Some(m.discrepancy)],
            None,
        );
        for i in 0..=10 {
            let lambda = i as f64 / 10.0;
            let point = correlated_segment(&game, lambda)?;
            record(
                &mut t,
                "correlated",
                "lambda",
                [Some(lambda), None],
                Some(&point.utilities),
            );
        }
        let nbs = nash_bargaining(&game)?;
        record(
            &mut t,
            "bargaining",
            "lambda",
            [Some(nbs.lambda), None],
            Some(&nbs.utilities),
        );
        record(
            &mut t,
            "disagreement",
            "mixed",
            [None, None],
            Some(&nbs.disagreement),
        );
    }
    ctx.note(format!(
        "{} equilibria (sensing pays against NS while alpha < {})",
        class.count,
        num(class.threshold)
    ));
    Ok(t)
}

fn run_load_sweep(ctx: &Context) -> Run {
    let alphas: Vec<f64> = if ctx.cfg.alphas.is_empty() {
        DEFAULT_ALPHAS.to_vec()
    } else {
        ctx.cfg.alphas.clone()
    };
    let (n, f) = (ctx.cfg.network.spreading, &ctx.cfg.efficiency);
    // one thread per sensing cost; rows are collected in input order
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = alphas
            .iter()
            .map(|&a| s.spawn(move || load_sweep(n, f, &[a])))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut t = Table::new(&["alpha", "K", "load", "best_L", "max_gain_pct"]);
    for rows in results {
        for r in rows? {
            t.push(vec![
                num(r.alpha),
                r.users.to_string(),
                num(r.load),
                r.best_leaders.to_string(),
                num(r.max_gain_pct),
            ]);
        }
    }
    Ok(t)
}

fn push_trace(
    t: &mut Table,
    run: usize,
    kind: &str,
    trace: &LearningTrace,
    every: usize,
    k: usize,
) {
    let last = trace.iterations.len() - 1;
    for (idx, s) in trace.iterations.iter().enumerate() {
        if idx % every != 0 && idx != last {
            continue;
        }
        let mut row = vec![
            run.to_string(),
            kind.into(),
            s.step.to_string(),
            s.profile.label(k),
        ];
        row.extend(s.ns_freq.iter().map(|x| num(*x)));
        row.extend(s.utilities.iter().map(|x| num(*x)));
        t.push(row);
    }
}

fn describe(trace: &LearningTrace, k: usize) -> String {
    let limit = match &trace.limit {
        LearningLimit::Pure(p) => p.label(k),
        LearningLimit::Mixed(m) => format!(
            "mixed NS probs [{}]",
            m.ns_probs
                .iter()
                .map(|x| num(*x))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    format!(
        "converged = {}, {} switches, limit {limit}",
        trace.converged, trace.switches
    )
}

fn run_learn(ctx: &Context) -> Run {
    let game = build_sensing_game(&ctx.cfg.network, &ctx.cfg.efficiency)?;
    let k = game.num_players();
    let l = &ctx.cfg.learning;
    let mut rng = StdRng::seed_from_u64(ctx.seed);
    let mut header: Vec<String> = ["run", "dynamics", "step", "profile"]
        .map(String::from)
        .to_vec();
    header.extend((1..=k).map(|i| format!("ns_freq_{i}")));
    header.extend((1..=k).map(|i| format!("u_{i}")));
    let mut t = Table::new(&header);
    for run in 1..=l.runs {
        let init = match &l.init {
            Init::Profile(p) => *p,
            Init::Random => Profile(rng.gen_range(0..1u32 << k)),
        };
        let priors: Vec<f64> = match &l.priors {
            Priors::Given(v) => v.clone(),
            Priors::Random => (0..k).map(|_| rng.gen::<f64>()).collect(),
        };
        if matches!(l.dynamics, Dynamics::BestResponse | Dynamics::Both) {
            let trace = best_response_dynamics(&game, init, l.max_steps)?;
            push_trace(&mut t, run, "br", &trace, 1, k);
            ctx.note(format!(
                "run {run} br from {}: {}",
                init.label(k),
                describe(&trace, k)
            ));
        }
        if matches!(l.dynamics, Dynamics::Fictitious | Dynamics::Both) {
            let trace = fictitious_play(&game, l.horizon, &priors)?;
            push_trace(&mut t, run, "fp", &trace, l.record_every, k);
            ctx.note(format!("run {run} fp: {}", describe(&trace, k)));
        }
    }
    Ok(t)
}

fn run_hybrid(ctx: &Context) -> Run {
    let (net, f) = (&ctx.cfg.network, &ctx.cfg.efficiency);
    let grid = hybrid_grid(net, f, ctx.cfg.grid_points, ctx.cfg.grid_spread)?;
    let r = hybrid_game_check(net, f, &grid)?;
    let mut t = Table::new(&["record", "label", "x1", "x2", "u1", "u2"]);
    for e in &r.equilibria {
        let label = format!("{},{}", e.actions[0], e.actions[1]);
        record(
            &mut t,
            "grid_equilibrium",
            &label,
            [Some(e.powers[0]), Some(e.powers[1])],
            None,
        );
    }
    let ne = nash_powers(net, f)?;
    record(
        &mut t,
        "hybrid_equilibrium",
        "NS,NS",
        [Some(ne.powers[0]), Some(ne.powers[1])],
        Some(&r.hybrid_utilities),
    );
    let game = build_sensing_game(net, f)?;
    for p in cogpower::sensing::pure_equilibria(&game)? {
        record(
            &mut t,
            "sensing_equilibrium",
            &p.label(2),
            ns_indicator(p),
            Some(game.payoffs(p)),
        );
    }
    let checks = [
        ("sensing_dominated", r.sensing_dominated),
        ("sensing_strictly_dominated", r.sensing_strictly_dominated),
        ("unique_nash", r.unique_nash),
        ("braess", r.braess),
        ("braess_strict", r.braess_strict),
    ];
    for (name, ok) in checks {
        record(
            &mut t,
            "check",
            name,
            [Some(if ok { 1.0 } else { 0.0 }), None],
            None,
        );
    }
    ctx.note(format!(
        "{} grid equilibria, unique Nash = {}, Braess = {}",
        r.equilibria.len(),
        r.unique_nash,
        r.braess
    ));
    Ok(t)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let cfg = config::parse(&text)?;
    let ctx = Context {
        cfg: &cfg,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    let table = match cli.command {
        Command::Equilibrium => run_equilibrium(&ctx),
        Command::WelfareSweep => run_welfare_sweep(&ctx),
        Command::RoleGain => run_role_gain(&ctx),
        Command::Sensing2x2 => run_sensing(&ctx),
        Command::LoadSweep => run_load_sweep(&ctx),
        Command::Learn => run_learn(&ctx),
        Command::Hybrid => run_hybrid(&ctx),
    }?;
    let provenance = format!(
        "cogpower {} {} scenario={} config-sha256={} seed={}",
        env!("CARGO_PKG_VERSION"),
        cli.command.name(),
        cfg.name,
        output::config_hash(&text),
        cli.seed
    );
    let dest = cli.out.clone().or(cfg.output.as_ref().map(PathBuf::from));
    match dest {
        Some(p) => {
            let file = fs::File::create(&p)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            table.write(io::BufWriter::new(file), &provenance)?;
            ctx.note(format!("wrote {} rows to {}", table.len(), p.display()));
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock, &provenance)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Model(e)) => {
            let (label, code) = match e.class() {
                ErrorClass::Input => ("config error", 2),
                ErrorClass::Infeasible => ("infeasible model", 3),
                ErrorClass::Numeric => ("numeric failure", 4),
            };
            eprintln!("{label}: {e}");
            ExitCode::from(code)
        }
    }
}

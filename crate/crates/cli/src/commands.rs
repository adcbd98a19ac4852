//! One function per subcommand, each producing a [`Report`].

use regretlab::bounds::{
    estimate_constants, flatness_check, log_t_bound, rademacher_upper_bound, stability_check,
    RademacherSearch,
};
use regretlab::divergence::decomposition;
use regretlab::engine::{
    hierarchy_eval, minimax_value, p_regret_exact, p_regret_mc, HierarchyConfig, OptimizerSettings,
    RegretReport,
};
use regretlab::games::ball::{khintchine_kahane_floor, walk_length_asymptote};
use regretlab::games::experts::{experts_general_scale, Evaluation};
use regretlab::games::quadratic::{series_deficit, DEFAULT_GRID};
use regretlab::games::{
    ball_iid_two_point, ball_orthogonal_strategy, ball_symmetric_iid_check, c_sequence,
    disjoint_interval_game, experts_general_lb, experts_simple_game, experts_simple_regret,
    quadratic_game, DisjointIntervalStrategy, ShrinkageAdversary,
};
use regretlab::registry::{
    builtin_games, builtin_optimizers, builtin_solvers, builtin_strategies, default_strategy,
    GameParams, DEFAULT_INTERVAL_GRID,
};
use regretlab::{AdversaryStrategy, Error, Game, SimplexDist};

use crate::error::{CliError, CliResult};
use crate::report::{Report, Row, Series};
use crate::spec::{load_spec, GameSpec};
use crate::{GameSource, RunConfig};

/// Tolerance on exact identities reported with a check.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Horizons of the `c-sequence` sweep.
pub const SWEEP_HORIZONS: [usize; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

/// Demos available to `demo <name>`.
pub const DEMOS: [&str; 5] = ["quadratic", "c-sequence", "ball", "experts", "interval"];

/// A resolved game with the name used to pick its default strategy.
pub struct LoadedGame {
    pub game: Game,
    pub builtin: Option<String>,
    pub params: GameParams,
}

impl RunConfig {
    fn horizon(&self) -> CliResult<usize> {
        self.horizon
            .ok_or_else(|| CliError::Invalid("this command needs --T".into()))
    }

    fn row(&self, game: &str, horizon: usize, quantity: &str, value: f64) -> Row {
        Row {
            game: game.to_string(),
            horizon,
            quantity: quantity.to_string(),
            value,
            stderr: 0.0,
            bound: None,
            holds: None,
            seed: self.seed,
        }
    }

    fn checked(
        &self,
        game: &str,
        horizon: usize,
        quantity: &str,
        value: f64,
        bound: f64,
        holds: bool,
    ) -> Row {
        Row {
            bound: Some(bound),
            holds: Some(holds),
            ..self.row(game, horizon, quantity, value)
        }
    }

    fn params(&self) -> GameParams {
        GameParams {
            n: self.n,
            horizon: self.horizon,
            d: self.d,
            grid: self.grid,
        }
    }

    pub fn load_game(&self) -> CliResult<LoadedGame> {
        let source = self
            .source
            .as_ref()
            .ok_or_else(|| CliError::Invalid("this command needs --builtin or --game".into()))?;
        let (builtin, params) = match source {
            GameSource::Builtin(name) => (name.clone(), self.params()),
            GameSource::File(path) => match load_spec(path)? {
                GameSpec::Explicit(game) => {
                    return Ok(LoadedGame {
                        game,
                        builtin: None,
                        params: self.params(),
                    })
                }
                GameSpec::Builtin { name, params } => {
                    let cli = self.params();
                    let merged = GameParams {
                        n: cli.n.or(params.n),
                        horizon: cli.horizon.or(params.horizon),
                        d: cli.d.or(params.d),
                        grid: cli.grid.or(params.grid),
                    };
                    (name, merged)
                }
            },
        };
        let game = builtin_games().get(&builtin)?(&params)?;
        Ok(LoadedGame {
            game,
            builtin: Some(builtin),
            params,
        })
    }

    fn strategy(&self, loaded: &LoadedGame) -> CliResult<Box<dyn AdversaryStrategy>> {
        let name = match (&self.strategy, &loaded.builtin) {
            (Some(s), _) => s.as_str(),
            (None, Some(b)) => default_strategy(b),
            (None, None) => "uniform-iid",
        };
        let mut params = loaded.params;
        params.horizon = Some(self.horizon()?);
        Ok(builtin_strategies().get(name)?(&loaded.game, &params)?)
    }

    /// Exact evaluation, or Monte Carlo once the sequence budget is exceeded.
    fn regret(&self, game: &Game, strategy: &dyn AdversaryStrategy) -> CliResult<RegretReport> {
        match p_regret_exact(game, strategy, self.budget) {
            Err(Error::ResourceLimit { .. }) => {
                Ok(p_regret_mc(game, strategy, self.samples, self.seed)?)
            }
            other => Ok(other?),
        }
    }
}

pub fn value(cfg: &RunConfig) -> CliResult<Report> {
    let loaded = cfg.load_game()?;
    let t = cfg.horizon()?;
    let solver = builtin_solvers().get(&cfg.solver)?;
    let r = minimax_value(&loaded.game, t, &*solver, cfg.budget)?;
    let name = loaded.game.name();
    Ok(Report {
        rows: vec![
            cfg.row(name, t, "minimax", r.value),
            cfg.row(name, t, "minimax_per_round", r.value / t as f64),
        ],
        series: vec![],
    })
}

pub fn regret(cfg: &RunConfig) -> CliResult<Report> {
    let loaded = cfg.load_game()?;
    let t = cfg.horizon()?;
    let strategy = cfg.strategy(&loaded)?;
    let r = cfg.regret(&loaded.game, &*strategy)?;
    let name = loaded.game.name();
    let label = format!("regret_{}[{}]", r.mode.name(), strategy.name());
    let mut total = cfg.row(name, t, &label, r.value);
    total.stderr = r.stderr;
    let mut per_round = cfg.row(name, t, "regret_per_round", r.per_round());
    per_round.stderr = r.stderr / t as f64;
    Ok(Report {
        rows: vec![total, per_round],
        series: vec![],
    })
}

pub fn decompose(cfg: &RunConfig) -> CliResult<Report> {
    let loaded = cfg.load_game()?;
    let t = cfg.horizon()?;
    let strategy = cfg.strategy(&loaded)?;
    let d = decomposition(&loaded.game, &*strategy, cfg.budget)?;
    let name = loaded.game.name();
    Ok(Report {
        rows: vec![
            cfg.row(name, t, "delta0", d.delta0),
            cfg.row(name, t, "delta1", d.delta1),
            cfg.row(name, t, "delta2", d.delta2),
            cfg.row(name, t, "regret_over_T", d.regret_over_t),
            cfg.checked(
                name,
                t,
                "residual",
                d.residual,
                IDENTITY_TOL,
                d.residual <= IDENTITY_TOL,
            ),
        ],
        series: vec![],
    })
}

fn has_embedding(game: &Game) -> bool {
    game.embedding_norm().is_some() && game.actions().iter().all(|a| a.coords.is_some())
}

/// A not-applicable outcome becomes `None`.
fn applicable<T>(r: regretlab::Result<T>) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotApplicable(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn bounds(cfg: &RunConfig) -> CliResult<Report> {
    let loaded = cfg.load_game()?;
    let game = &loaded.game;
    let t = cfg.horizon()?;
    let name = game.name();
    let solver = builtin_solvers().get(&cfg.solver)?;
    let mut rows = Vec::new();
    if has_embedding(game) {
        let c = estimate_constants(game)?;
        rows.push(cfg.row(name, t, "lipschitz_L", c.lipschitz));
        rows.push(cfg.row(name, t, "strong_convexity_sigma", c.sigma));
        rows.push(cfg.row(name, t, "alpha", c.alpha));
        if !c.alpha_infinite {
            let f = flatness_check(game, c.alpha, cfg.samples, cfg.seed)?;
            rows.push(cfg.checked(
                name,
                t,
                "flatness",
                f.observed_value,
                f.bound_value,
                f.holds,
            ));
            if t >= 2 {
                let bound = log_t_bound(c.alpha, t)?;
                let mm = minimax_value(game, t, &*solver, cfg.budget)?.value;
                rows.push(cfg.checked(name, t, "minimax_vs_4alpha_lnT", mm, bound, mm <= bound));
            }
        }
        if let Some(s) = applicable(stability_check(game, cfg.samples, cfg.seed))? {
            rows.push(cfg.checked(
                name,
                t,
                "stability",
                s.observed_value,
                s.bound_value,
                s.holds,
            ));
        }
    }
    let search = RademacherSearch {
        seed: cfg.seed,
        ..RademacherSearch::default()
    };
    let r = rademacher_upper_bound(game, t, &search, &*solver, cfg.budget)?;
    let mut row = cfg.checked(
        name,
        t,
        "minimax_vs_rademacher",
        r.minimax,
        r.result.bound_value,
        r.result.holds,
    );
    row.stderr = r.result.tolerance / 4.0;
    rows.push(row);
    Ok(Report {
        rows,
        series: vec![],
    })
}

pub fn hierarchy(cfg: &RunConfig) -> CliResult<Report> {
    let loaded = cfg.load_game()?;
    let t = cfg.horizon()?;
    let solver = builtin_solvers().get(&cfg.solver)?;
    let optimizer = builtin_optimizers().get(&cfg.optimizer)?;
    let settings = OptimizerSettings {
        seed: cfg.seed,
        ..OptimizerSettings::default()
    };
    let tol = 10.0 * settings.tol;
    let config = HierarchyConfig {
        solver: &*solver,
        optimizer: &*optimizer,
        settings,
        cap: cfg.budget,
    };
    let h = hierarchy_eval(&loaded.game, t, &config)?;
    let name = loaded.game.name();
    let levels = [
        ("iid", h.iid, Some(h.indep)),
        ("indep", h.indep, Some(h.joint)),
        ("joint", h.joint, Some(h.minimax)),
        ("minimax", h.minimax, None),
    ];
    let rows = levels
        .iter()
        .map(|&(q, v, next)| match next {
            Some(b) => cfg.checked(name, t, q, v, b, v <= b + tol && v >= -tol),
            None => cfg.row(name, t, q, v),
        })
        .collect();
    Ok(Report {
        rows,
        series: vec![],
    })
}

pub fn report(cfg: &RunConfig) -> CliResult<Report> {
    let mut all = Report::default();
    for part in [value, regret, decompose, bounds] {
        all.rows.extend(part(cfg)?.rows);
    }
    Ok(all)
}

pub fn demo(cfg: &RunConfig, which: &str) -> CliResult<Report> {
    match which {
        "quadratic" => demo_quadratic(cfg),
        "c-sequence" => demo_c_sequence(cfg),
        "ball" => demo_ball(cfg),
        "experts" => demo_experts(cfg),
        "interval" => demo_interval(cfg),
        other => Err(CliError::Invalid(format!(
            "unknown demo `{other}` (known: {})",
            DEMOS.join(", ")
        ))),
    }
}

/// Exact regret of the shrinkage adversary against `Σ c_t`.
fn demo_quadratic(cfg: &RunConfig) -> CliResult<Report> {
    let t = cfg.horizon.unwrap_or(8);
    let game = quadratic_game(cfg.grid.unwrap_or(DEFAULT_GRID), Some(t))?;
    let adversary = ShrinkageAdversary::new(t)?;
    let sum = adversary.schedule().sum();
    let exact = p_regret_exact(&game, &adversary, cfg.budget)?.value;
    let diff = (exact - sum).abs();
    let name = game.name();
    Ok(Report {
        rows: vec![
            cfg.row(name, t, "sum_c", sum),
            cfg.row(name, t, "exact_regret", exact),
            cfg.checked(
                name,
                t,
                "difference",
                diff,
                IDENTITY_TOL,
                diff <= IDENTITY_TOL,
            ),
        ],
        series: vec![],
    })
}

/// `Σ c_t` against `ln T - ln ln T` over a sweep of horizons.
fn demo_c_sequence(cfg: &RunConfig) -> CliResult<Report> {
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for t in SWEEP_HORIZONS {
        let sum = c_sequence(t)?.sum();
        let deficit = series_deficit(t)?;
        let lt = (t as f64).ln();
        rows.push(cfg.row("c-sequence", t, "sum_c", sum));
        rows.push(cfg.row("c-sequence", t, "deficit", deficit));
        points.push((lt - lt.ln(), sum));
    }
    Ok(Report {
        rows,
        series: vec![Series {
            name: "sum_c_vs_logT_minus_loglogT".into(),
            points,
        }],
    })
}

fn demo_ball(cfg: &RunConfig) -> CliResult<Report> {
    let t = cfg.horizon.unwrap_or(100);
    let d = cfg.d.unwrap_or(2);
    let name = format!("ball(d={d})");
    let trace = ball_orthogonal_strategy(d.max(2), t, cfg.seed)?;
    let err = trace.max_squared_norm_error();
    let walk = ball_iid_two_point(t, cfg.samples, cfg.seed)?;
    let sphere = ball_symmetric_iid_check(d, t, cfg.samples, cfg.seed)?;
    let floor = khintchine_kahane_floor(t);
    let mut walk_row = cfg.row(&name, t, "two_point_walk_length", walk.mean);
    walk_row.stderr = walk.stderr;
    let mut sphere_row = cfg.checked(
        &name,
        t,
        "sphere_walk_length_vs_sqrt_T_over_2",
        sphere.mean,
        floor,
        sphere.mean >= floor - 3.0 * sphere.stderr,
    );
    sphere_row.stderr = sphere.stderr;
    Ok(Report {
        rows: vec![
            cfg.checked(&name, t, "orthogonal_norm_error", err, 1e-7, err <= 1e-7),
            walk_row,
            cfg.row(
                &name,
                t,
                "walk_asymptote_sqrt_2T_over_pi",
                walk_length_asymptote(t),
            ),
            sphere_row,
        ],
        series: vec![],
    })
}

fn demo_experts(cfg: &RunConfig) -> CliResult<Report> {
    let n = cfg.n.unwrap_or(2);
    let t = cfg.horizon.unwrap_or(2);
    let game = experts_simple_game(n)?;
    let name = game.name().to_string();
    let exact = experts_simple_regret(n, t, Evaluation::Exact { budget: cfg.budget })?;
    let phi = game.phi_value(SimplexDist::uniform(n).weights());
    let lb = experts_general_lb(n, t, cfg.samples, cfg.seed)?;
    let mut lb_row = cfg.row(
        &format!("experts-general(N={n})"),
        t,
        "lb_estimate",
        lb.mean,
    );
    lb_row.stderr = lb.stderr;
    Ok(Report {
        rows: vec![
            cfg.row(&name, t, "regret_over_T", exact.mean),
            cfg.row(&name, t, "phi_uniform", phi),
            lb_row,
            cfg.row(
                &format!("experts-general(N={n})"),
                t,
                "scale_sqrt_logN_over_2T",
                experts_general_scale(n, t),
            ),
        ],
        series: vec![],
    })
}

fn demo_interval(cfg: &RunConfig) -> CliResult<Report> {
    let t = cfg.horizon.unwrap_or(4);
    let grid = cfg.grid.unwrap_or(DEFAULT_INTERVAL_GRID);
    let game = disjoint_interval_game(grid)?;
    let strategy = DisjointIntervalStrategy::new(t, grid)?;
    let r = cfg.regret(&game, &strategy)?;
    let quantity = format!("regret_{}", r.mode.name());
    // Negativity is claimed from T = 4 on.
    let mut row = if t >= 4 {
        let negative = r.value + 3.0 * r.stderr < 0.0;
        cfg.checked(game.name(), t, &quantity, r.value, 0.0, negative)
    } else {
        cfg.row(game.name(), t, &quantity, r.value)
    };
    row.stderr = r.stderr;
    Ok(Report {
        rows: vec![row],
        series: vec![],
    })
}

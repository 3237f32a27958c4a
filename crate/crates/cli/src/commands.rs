use serde_json::{json, Map, Value};

use shardprice::{
    cdf_rateless, empirical_cdf, expected_utility_schedule, fast_lane_price_bound, ks_distance,
    optimize_fast_lane, rlnc_innovation_rate, topk_expected_utility, utility_vs_alpha,
    ArrivalModel, FastLaneProblem, OptimizerConfig, RaceConfig, RankExperimentConfig, RankMode,
    RewardSchedule, Scheme, SimModel, SolutionKind, TurboModel,
};

use crate::config::{CommandName, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

type Result<T> = std::result::Result<T, CliError>;

/// Runs the configured command. A validation report comes back together with
/// the name of its first failing check, if any.
pub fn run(config: &RunConfig) -> Result<(Table, Option<String>)> {
    let table = match config.command {
        CommandName::Cdf => cdf(config)?,
        CommandName::Price => price(config)?,
        CommandName::TurboPrice => turbo_price(config)?,
        CommandName::Multideadline => multideadline(config)?,
        CommandName::Race => race(config)?,
        CommandName::Validate => return validate(config),
    };
    Ok((table, None))
}

fn base_models(c: &RunConfig, lambda: f64) -> Result<Vec<ArrivalModel>> {
    Scheme::ALL
        .iter()
        .map(|&s| ArrivalModel::new(s, c.k, c.n, lambda).map_err(CliError::from))
        .collect()
}

fn nonnegative_grid(c: &RunConfig, what: &str) -> Result<Vec<f64>> {
    if c.grid.min < 0.0 {
        return Err(CliError::param(format!("{what} grid must be nonnegative")));
    }
    Ok(c.grid.values())
}

fn cdf(c: &RunConfig) -> Result<Table> {
    let models = base_models(c, c.lambda1)?;
    let turbo: Vec<TurboModel> = if c.lambda2 > 0.0 {
        models
            .iter()
            .map(|&m| TurboModel::new(m, c.lambda2))
            .collect::<shardprice::Result<_>>()?
    } else {
        Vec::new()
    };
    let mut columns = vec!["tau".to_owned()];
    columns.extend(Scheme::ALL.iter().map(|s| format!("F_{s}")));
    columns.extend(turbo.iter().map(|t| format!("F_turbo_{}", t.base().scheme())));
    let mut table = Table::new(columns);
    for tau in nonnegative_grid(c, "tau")? {
        let mut row: Vec<Cell> = vec![tau.into()];
        for m in &models {
            row.push(m.cdf(tau)?.into());
        }
        for t in &turbo {
            row.push(t.cdf(tau)?.into());
        }
        table.push(row);
    }
    table.unit("tau", "time units");

    let mut quantiles = Map::new();
    for m in &models {
        quantiles.insert(m.scheme().to_string(), json!(m.quantile(c.service_level)?));
    }
    let q = |s: Scheme| quantiles[s.label()].as_f64().unwrap_or(f64::NAN);
    let ratios = json!({
        "unsharded_over_rateless": q(Scheme::Unsharded) / q(Scheme::Rateless),
        "unsharded_over_fixed_rate": q(Scheme::Unsharded) / q(Scheme::FixedRate),
    });
    table.note(
        "service_level",
        json!({ "q": c.service_level, "quantiles": quantiles, "ratios": ratios }),
    );
    Ok(table)
}

fn price(c: &RunConfig) -> Result<Table> {
    let models = base_models(c, c.lambda1)?;
    let mut columns = vec!["tau".to_owned()];
    columns.extend(Scheme::ALL.iter().map(|s| format!("price_{s}")));
    let mut table = Table::new(columns);
    for tau in nonnegative_grid(c, "tau")? {
        let mut row: Vec<Cell> = vec![tau.into()];
        for m in &models {
            row.push((m.cdf(tau)? / c.lambda1).into());
        }
        table.push(row);
    }
    table.unit("tau", "time units");
    table.unit("price_*", "per shard per time unit, relative to r");
    Ok(table)
}

fn solution_kind(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::ClosedForm => "closed_form",
        SolutionKind::GridArgmax => "grid_argmax",
        SolutionKind::NoRevenue => "no_revenue",
    }
}

fn turbo_price(c: &RunConfig) -> Result<Table> {
    let headroom = c.lambda_max - c.lambda1;
    if headroom <= 0.0 {
        return Err(CliError::param(format!(
            "--lambda-max {} leaves no room above --lambda1 {}",
            c.lambda_max, c.lambda1
        )));
    }
    if c.grid.max > headroom * (1.0 + 1e-12) {
        return Err(CliError::param(format!(
            "lambda2 grid reaches {} beyond the headroom {headroom}",
            c.grid.max
        )));
    }
    let rates: Vec<f64> = nonnegative_grid(c, "lambda2")?.into_iter().filter(|&l| l > 0.0).collect();
    if rates.is_empty() {
        return Err(CliError::param("lambda2 grid has no positive point"));
    }
    let problems = base_models(c, c.lambda1)?
        .into_iter()
        .map(|m| FastLaneProblem::new(m, c.lambda_max, c.tau, 1.0))
        .collect::<shardprice::Result<Vec<_>>>()?;

    let mut columns = vec!["lambda2".to_owned()];
    for s in Scheme::ALL {
        columns.push(format!("price_{s}"));
        columns.push(format!("revenue_{s}"));
    }
    let mut table = Table::new(columns);
    for &l2 in &rates {
        let mut row: Vec<Cell> = vec![l2.into()];
        for p in &problems {
            row.push(fast_lane_price_bound(p, l2)?.into());
            row.push(p.revenue(l2)?.into());
        }
        table.push(row);
    }
    table.unit("lambda2", "shards per time unit");
    table.unit("price_*", "per fast-lane shard, relative to r");
    table.unit("revenue_*", "per fast-lane user, relative to r");

    let mut optimum = Map::new();
    for p in &problems {
        let sol = optimize_fast_lane(p, &OptimizerConfig::default())?;
        let share = match sol.lambda2 {
            Some(l2) => json!(sol.revenue / p.turbo_utility(l2)?),
            None => Value::Null,
        };
        optimum.insert(
            p.base().scheme().to_string(),
            json!({
                "lambda2": sol.lambda2,
                "price": sol.price,
                "revenue": sol.revenue,
                "revenue_share": share,
                "kind": solution_kind(sol.kind),
            }),
        );
    }
    table.note("optimum", Value::Object(optimum));
    Ok(table)
}

fn multideadline(c: &RunConfig) -> Result<Table> {
    let schedule = RewardSchedule::harmonic(c.tau, c.r, c.horizon)?;
    let models = base_models(c, c.lambda1)?;
    let rates = nonnegative_grid(c, "lambda2")?;
    let mut columns = vec!["lambda2".to_owned()];
    columns.extend(Scheme::ALL.iter().map(|s| format!("EU_{s}")));
    let mut table = Table::new(columns);
    for &l2 in &rates {
        let mut row: Vec<Cell> = vec![l2.into()];
        for &m in &models {
            let t = TurboModel::new(m, l2)?;
            row.push(expected_utility_schedule(|x| t.cdf(x), &schedule)?.into());
        }
        table.push(row);
    }
    table.unit("lambda2", "shards per time unit");
    table.unit("EU_*", "expected utility in units of reward");

    let mut truncation = Map::new();
    for &m in &models {
        let t = TurboModel::new(m, rates[0])?;
        let mass = schedule.truncation_mass(|x| t.cdf(x).unwrap_or(f64::NAN));
        truncation.insert(m.scheme().to_string(), json!(mass));
    }
    table.note(
        "schedule",
        json!({
            "deadlines": schedule.deadlines(),
            "rewards": schedule.rewards(),
            "truncation_mass_at_lowest_lambda2": truncation,
        }),
    );
    Ok(table)
}

fn race(c: &RunConfig) -> Result<Table> {
    if c.grid.min < 0.0 || c.grid.max > 1.0 {
        return Err(CliError::param("alpha grid must lie in [0, 1]"));
    }
    let fast = ArrivalModel::rateless(c.k, c.lambda1)?;
    let base = ArrivalModel::uncoded(c.k, c.lambda1)?;
    let template = RaceConfig::linear_decay(c.big_n, c.s, c.r, c.gas, c.alpha, fast, base)?;
    let curve = utility_vs_alpha(&template, &c.grid.values())?;
    let mut table = Table::new(["alpha", "EU_fast", "EU_base"]);
    for p in &curve {
        table.push(vec![p.alpha.into(), (p.eu_fast / c.r).into(), (p.eu_base / c.r).into()]);
    }
    table.unit("EU_*", "expected utility relative to r");

    let attainable = topk_expected_utility(|_| Ok(1.0), &template)? / c.r;
    let crossing = curve.iter().find(|p| p.eu_base < 0.0).map(|p| p.alpha);
    table.note("attainable", json!(attainable));
    table.note("base_negative_from_alpha", json!(crossing));
    table.note(
        "deadlines_at_alpha",
        json!({ "alpha": c.alpha, "deadlines": template.deadlines()? }),
    );
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

struct Check {
    name: String,
    status: Status,
    statistic: f64,
    threshold: String,
}

fn check(name: impl Into<String>, ok: bool, statistic: f64, threshold: String) -> Check {
    let status = if ok { Status::Pass } else { Status::Fail };
    Check { name: name.into(), status, statistic, threshold }
}

/// Below this many samples a KS statistic says nothing useful.
const MIN_KS_TRIALS: usize = 1000;

fn ks_checks(c: &RunConfig, fast_rate: f64) -> Result<Vec<Check>> {
    let mut models: Vec<(String, SimModel)> = Vec::new();
    for m in base_models(c, c.lambda1)? {
        models.push((m.scheme().to_string(), m.into()));
    }
    for m in base_models(c, c.lambda1)?.into_iter().filter(|m| m.scheme().is_sharded()) {
        models.push((format!("turbo_{}", m.scheme()), TurboModel::new(m, fast_rate)?.into()));
    }
    let limit = (1.95 / (c.trials as f64).sqrt()).max(0.01);
    let mut out = Vec::new();
    for (i, (name, m)) in models.iter().enumerate() {
        let emp = empirical_cdf(m, c.trials, c.seed.wrapping_add(i as u64));
        let d = ks_distance(&emp, |t| m.cdf(t).unwrap_or(f64::NAN));
        let mut ch = check(format!("ks_{name}"), d < limit, d, format!("< {limit}"));
        if c.trials < MIN_KS_TRIALS {
            ch.status = Status::Inconclusive;
        }
        out.push(ch);
    }
    Ok(out)
}

fn validate(c: &RunConfig) -> Result<(Table, Option<String>)> {
    let fast_rate = if c.lambda2 > 0.0 { c.lambda2 } else { c.lambda1 };
    let mut checks = ks_checks(c, fast_rate)?;
    let models = base_models(c, c.lambda1)?;
    let [unsharded, uncoded, fixed, rateless] = [models[0], models[1], models[2], models[3]];
    let mean = rateless.mean();

    let wide = ArrivalModel::fixed_rate(c.k, 1 << 14, c.lambda1)?;
    let mut gap: f64 = 0.0;
    for i in 0..300 {
        let t = 3.0 * mean * i as f64 / 299.0;
        gap = gap.max((wide.cdf(t)? - rateless.cdf(t)?).abs());
    }
    checks.push(check("poisson_limit_n16384", gap < 5e-3, gap, "< 0.005".into()));

    let q = |m: &ArrivalModel| m.quantile(0.95);
    let r1 = q(&unsharded)? / q(&rateless)?;
    let r2 = q(&unsharded)? / q(&fixed)?;
    checks.push(check("ratio_unsharded_rateless", (2.0..=2.4).contains(&r1), r1, "in [2.0, 2.4]".into()));
    checks.push(check("ratio_unsharded_fixed_rate", (1.6..=1.8).contains(&r2), r2, "in [1.6, 1.8]".into()));

    let mut coding: f64 = 0.0;
    let mut turbo_gap: f64 = 0.0;
    let turbos = [uncoded, fixed, rateless]
        .iter()
        .map(|&m| TurboModel::new(m, fast_rate))
        .collect::<shardprice::Result<Vec<_>>>()?;
    for i in 0..=400 {
        let t = 4.0 * mean * i as f64 / 400.0;
        let (u, f, r) = (uncoded.cdf(t)?, fixed.cdf(t)?, rateless.cdf(t)?);
        coding = coding.max(u - f).max(f - r);
        for tm in &turbos {
            turbo_gap = turbo_gap.max(tm.base().cdf(t)? - tm.cdf(t)?);
        }
    }
    checks.push(check("dominance_coding", coding <= 1e-12, coding, "max violation <= 1e-12".into()));
    checks.push(check("dominance_turbo", turbo_gap <= 1e-12, turbo_gap, "max violation <= 1e-12".into()));

    let collapse = TurboModel::new(rateless, fast_rate)?;
    let mut diff: f64 = 0.0;
    for i in 0..100 {
        let t = 2.0 * mean * i as f64 / 99.0;
        diff = diff.max((collapse.cdf(t)? - cdf_rateless(t, c.k, c.lambda1 + fast_rate)?).abs());
    }
    checks.push(check("turbo_rateless_collapse", diff < 1e-12, diff, "< 1e-12".into()));

    let rank = |field: u32| -> Result<f64> {
        let cfg = RankExperimentConfig::new(c.k as usize, field, c.rank_trials, RankMode::FastLaneOnly)?;
        Ok(rlnc_innovation_rate(&cfg, c.seed).fraction())
    };
    let wide_field = rank(1 << 16)?;
    let binary = rank(2)?;
    checks.push(check("rank_q65536", wide_field <= 1e-3, wide_field, "<= 0.001".into()));
    checks.push(check(
        "rank_q2",
        binary > wide_field,
        binary,
        format!("> {wide_field}"),
    ));

    let mut table = Table::new(["check", "status", "statistic", "threshold"]);
    for ch in &checks {
        table.push(vec![
            ch.name.as_str().into(),
            ch.status.label().into(),
            ch.statistic.into(),
            ch.threshold.clone().into(),
        ]);
    }
    let count = |s: Status| checks.iter().filter(|ch| ch.status == s).count();
    let first_failure = checks.iter().find(|ch| ch.status == Status::Fail).map(|ch| ch.name.clone());
    table.note("passed", json!(count(Status::Pass)));
    table.note("failed", json!(count(Status::Fail)));
    table.note("inconclusive", json!(count(Status::Inconclusive)));
    table.note("first_failure", json!(first_failure));
    Ok((table, first_failure))
}

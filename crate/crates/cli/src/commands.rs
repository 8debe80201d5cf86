use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use bjbench::betting::{
    bankroll_simulate, bet_grid, bet_sweep, ruin_monotonicity_check, scaling_check, standard_strategies,
    unit_returns, BankrollConfig, BetStrategy,
};
use bjbench::export::{policy_dump, regret_csv, solution_dump, strategy_chart, CellDump, Header, ARTIFACT_VERSION};
use bjbench::heatmap::{Chart as HeatChart, Grid};
use bjbench::metrics::{cell_regret, gap_thresholds, median, score_logits, RegretReport, SummaryRow, ThresholdReport};
use bjbench::optim::{cem_train, pg_train, spsa_train, LogitTable, TrainObserver, TrainOutput};
use bjbench::oracle::{evaluate_exact, OracleSolution};
use bjbench::rng::RngStream;
use bjbench::{solve as solve_rules, Error, Rules, Variant};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{config_hash, resolve_rules, resolve_seed, RunConfig};
use crate::output::{OutDir, Stamp};
use crate::plot::{self, Series};
use crate::{BetMode, MethodArg, RulesArgs};

fn load_config(args: &RulesArgs) -> Result<RunConfig> {
    match &args.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn stamp(effective: &serde_json::Value, seed: Option<u64>) -> Result<Stamp> {
    Ok(Stamp { artifact_version: ARTIFACT_VERSION.to_string(), config_hash: config_hash(effective)?, seed })
}

fn report_written(out: &OutDir) {
    for p in out.written() {
        eprintln!("wrote {}", p.display());
    }
}

#[derive(Debug, Serialize)]
struct VariantRecord {
    variant: String,
    label: String,
    game_ev: f64,
    delta_vs_benchmark: f64,
}

pub fn solve(args: &RulesArgs, out: &Path) -> Result<()> {
    let cfg = load_config(args)?;
    let (name, rules) = resolve_rules(args.preset.as_deref(), args.rules.as_deref(), &cfg)?;
    let effective = json!({ "command": "solve", "rules": rules });
    let mut out = OutDir::create(out, stamp(&effective, None)?)?;
    let t0 = Instant::now();
    let sol = solve_rules(&rules)?;
    let seconds = t0.elapsed().as_secs_f64();
    let bench = if rules == Rules::benchmark() { sol.game_ev } else { solve_rules(&Rules::benchmark())?.game_ev };
    let label = name.parse::<Variant>().map(|v| v.label().to_string()).unwrap_or_else(|_| name.clone());
    let mut header = Header::new("solution", &out.stamp.config_hash, None, rules);
    header.game_ev = Some(sol.game_ev);
    out.json("solution.json", &solution_dump(&sol, header))?;
    out.text("strategy.txt", &strategy_chart(sol.space(), &sol.optimal_action))?;
    let mut dealer = Vec::new();
    sol.model().dealer().write_csv(&mut dealer)?;
    out.text("dealer.csv", &String::from_utf8(dealer)?)?;
    let summary = json!({
        "preset": name,
        "rules": rules,
        "game_ev": sol.game_ev,
        "cells": sol.space().len(),
        "solve_seconds": seconds,
        "variant": VariantRecord { variant: name.clone(), label, game_ev: sol.game_ev, delta_vs_benchmark: sol.game_ev - bench },
    });
    out.json("summary.json", &summary)?;
    println!("game_ev {:.6} over {} cells ({name}, {:.3} s)", sol.game_ev, sol.space().len(), seconds);
    report_written(&out);
    Ok(())
}

/// Writes a policy dump at each checkpoint.
struct CheckpointWriter<'a> {
    dir: PathBuf,
    space: &'a bjbench::CellSpace,
    header: Header,
}

impl TrainObserver for CheckpointWriter<'_> {
    fn checkpoint(&mut self, hands: u64, theta: &LogitTable) -> bjbench::Result<()> {
        let greedy = bjbench::metrics::greedy_policy(theta, self.space)?;
        let dump = policy_dump(theta, &greedy, None, self.space, self.header.clone());
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(format!("theta-{hands:012}.json"));
        crate::output::write_atomic(&path, dump.to_json()?.as_bytes())
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunReport {
    summary: SummaryRow,
    thresholds: ThresholdReport,
    argmax_cell: usize,
    argmax_cell_label: String,
    rules: Rules,
    preset: String,
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Pg => "pg",
        MethodArg::Spsa => "spsa",
        MethodArg::Cem => "cem",
    }
}

pub fn train(
    method: MethodArg,
    args: &RulesArgs,
    seed: Option<u64>,
    budget: Option<u64>,
    checkpoint_every: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(args)?;
    let (preset, rules) = resolve_rules(args.preset.as_deref(), args.rules.as_deref(), &cfg)?;
    let seed = resolve_seed(seed, &cfg);
    let name = method_name(method);
    let (mut pg, mut spsa, mut cem) = (cfg.pg.clone(), cfg.spsa.clone(), cfg.cem.clone());
    match method {
        MethodArg::Pg => {
            if let Some(b) = budget {
                pg.budget_hands = b;
            }
            pg.checkpoint_every = checkpoint_every.or(pg.checkpoint_every);
            pg.validate()?;
        }
        MethodArg::Spsa => {
            if let Some(b) = budget {
                spsa = spsa.with_budget(b)?;
            }
            spsa.checkpoint_every = checkpoint_every.or(spsa.checkpoint_every);
            spsa.validate()?;
        }
        MethodArg::Cem => {
            if let Some(b) = budget {
                cem = cem.with_budget(b)?;
            }
            cem.checkpoint_every = checkpoint_every.or(cem.checkpoint_every);
            cem.validate()?;
        }
    }
    let method_cfg = match method {
        MethodArg::Pg => serde_json::to_value(&pg)?,
        MethodArg::Spsa => serde_json::to_value(&spsa)?,
        MethodArg::Cem => serde_json::to_value(&cem)?,
    };
    let effective = json!({ "command": "train", "method": name, "rules": rules, "seed": seed, "config": method_cfg });
    let out_path = out.unwrap_or_else(|| PathBuf::from(format!("runs/{name}-seed{seed}")));
    let mut out = OutDir::create(&out_path, stamp(&effective, Some(seed))?)?;
    let sol = solve_rules(&rules)?;
    let space = sol.space();
    let header = Header::new("policy", &out.stamp.config_hash, Some(seed), rules);
    let mut observer = CheckpointWriter { dir: out.path("checkpoints"), space, header: header.clone() };
    let stream = RngStream::new(seed, 1 + method as u64);
    let t0 = Instant::now();
    let TrainOutput { theta, curve, hands } = match method {
        MethodArg::Pg => pg_train(&pg, space, stream, &mut observer)?,
        MethodArg::Spsa => spsa_train(&spsa, space, stream, &mut observer)?,
        MethodArg::Cem => cem_train(&cem, space, stream, &mut observer)?,
    };
    let seconds = t0.elapsed().as_secs_f64();
    let report = score_logits(&theta, &sol)?;
    let thresholds = gap_thresholds(&curve, sol.game_ev)?;
    let greedy = bjbench::metrics::greedy_policy(&theta, space)?;
    let values = evaluate_exact(sol.model(), |i| theta.probs(i, space.mask(i))).values;
    let mut header = header;
    header.game_ev = Some(report.learned_ev);
    out.json("policy.json", &policy_dump(&theta, &greedy, Some(&values), space, header))?;
    out.text("curve.csv", &curve.to_csv())?;
    let chart = plot::Chart {
        series: vec![Series {
            points: curve.points.iter().map(|p| (p.hands as f64, p.smoothed_ev)).collect(),
            color: plot::BLUE,
            markers: false,
        }],
        hlines: vec![(sol.game_ev, plot::RED)],
        width: 800,
        height: 480,
    };
    let (img, ranges) = chart.render();
    out.png("curve.png", &img, &ranges.describe())?;
    out.text("regret.csv", &regret_csv(space, &sol, &greedy, &report))?;
    let summary = SummaryRow::new(name, seed, hands, &report, Some(&thresholds));
    let run = RunReport {
        summary: summary.clone(),
        thresholds,
        argmax_cell: report.argmax_cell,
        argmax_cell_label: space.cell(report.argmax_cell).to_string(),
        rules,
        preset,
    };
    out.json("report.json", &json!({ "run": run, "train_seconds": seconds }))?;
    println!("{}", SummaryRow::CSV_HEADER);
    println!("{}", summary.csv_line());
    report_written(&out);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn bet(
    mode: BetMode,
    args: &RulesArgs,
    seed: Option<u64>,
    strategy: &str,
    fixed: Option<f64>,
    fraction: Option<f64>,
    trials: Option<u64>,
    hands: Option<u64>,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(args)?;
    let (_, rules) = resolve_rules(args.preset.as_deref(), args.rules.as_deref(), &cfg)?;
    let b = &cfg.bet;
    let strategies: Vec<(String, BetStrategy)> = match (fixed, fraction) {
        (Some(x), _) => vec![(format!("fixed-{x}"), BetStrategy::fixed(x)?)],
        (None, Some(f)) => vec![(format!("proportional-{f}"), BetStrategy::proportional(f)?)],
        (None, None) => {
            let all = standard_strategies();
            if strategy == "all" {
                all.into_iter().map(|(n, s)| (n.to_string(), s)).collect()
            } else {
                let (n, s) = all.into_iter().find(|(n, _)| *n == strategy).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "unknown strategy {strategy:?}; valid: min, mid, max, proportional, all"
                    ))
                })?;
                vec![(n.to_string(), s)]
            }
        }
    };
    let seed = resolve_seed(seed, &cfg);
    let mode_name = format!("{mode:?}").to_lowercase();
    let effective = json!({
        "command": "bet", "mode": mode_name, "rules": rules, "seed": seed, "config": b,
        "strategies": strategies, "trials": trials, "hands": hands,
    });
    let mut out = OutDir::create(out, stamp(&effective, Some(seed))?)?;
    let sol = solve_rules(&rules)?;
    let space = sol.space();
    let policy = &sol.optimal_action;
    match mode {
        BetMode::Sweep => {
            let grid = bet_grid(b.grid_min, b.grid_max, b.grid_points);
            let per = hands.unwrap_or(b.hands_per_bet);
            let r = bet_sweep(space, policy, &grid, per, &RngStream::new(seed, 10))?;
            let mut csv = String::from("bet,mean_return,stderr,per_unit,per_unit_stderr\n");
            for row in &r.rows {
                csv.push_str(&format!(
                    "{},{:.6},{:.6},{:.6},{:.6}\n",
                    row.bet, row.mean_return, row.stderr, row.per_unit, row.per_unit_stderr
                ));
            }
            out.text("sweep.csv", &csv)?;
            out.json(
                "sweep.json",
                &json!({
                    "chosen_bet": r.chosen_bet,
                    "raw_argmax_bet": r.raw_argmax_bet,
                    "pooled_edge": r.pooled_edge,
                    "oracle_ev": sol.game_ev,
                    "hands_per_bet": r.hands_per_bet,
                    "ratio_constant_3sigma": r.ratio_constant(),
                    "outlier_bets": r.outliers,
                }),
            )?;
            let chart = plot::Chart {
                series: vec![
                    Series {
                        points: r.rows.iter().map(|x| (x.bet, x.mean_return)).collect(),
                        color: plot::BLUE,
                        markers: true,
                    },
                    Series {
                        points: r.rows.iter().map(|x| (x.bet, x.bet * sol.game_ev)).collect(),
                        color: plot::RED,
                        markers: false,
                    },
                ],
                hlines: vec![(0.0, plot::GREY)],
                width: 800,
                height: 480,
            };
            let (img, ranges) = chart.render();
            out.png("sweep.png", &img, &ranges.describe())?;
            println!("chosen bet {} (pooled edge {:.5} +- {:.5})", r.chosen_bet, r.pooled_edge.mean, r.pooled_edge.stderr);
        }
        BetMode::Bankroll => {
            let config = BankrollConfig {
                starting_bankroll: b.starting_bankroll,
                hands_per_trial: hands.unwrap_or(b.hands_per_trial),
                trials: trials.unwrap_or(b.trials),
                reset_on_ruin: true,
            };
            let named: Vec<(&str, BetStrategy)> = strategies.iter().map(|(n, s)| (n.as_str(), *s)).collect();
            let res = bankroll_simulate(space, policy, &named, &config, &RngStream::new(seed, 11))?;
            let mut csv = String::from(
                "strategy,trial,final_bankroll,net_profit,total_return,total_wagered,ruin_events,first_ruin\n",
            );
            let mut table = Vec::new();
            for s in &res {
                for t in &s.trials {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        s.name,
                        t.trial,
                        t.final_bankroll,
                        t.net_profit,
                        t.total_return,
                        t.total_wagered,
                        t.ruin_events,
                        t.first_ruin.map(|x| x.to_string()).unwrap_or_default()
                    ));
                }
                table.push(json!({
                    "strategy": s.name,
                    "bet": s.strategy,
                    "mean_ev_per_hand_units": s.mean_ev_per_hand,
                    "mean_ev_per_unit_wagered": s.mean_ev_per_unit,
                    "mean_net_profit": s.mean_net_profit,
                    "mean_ruin_events": s.mean_ruin_events,
                }));
                println!(
                    "{:<14} ev/hand {:>10.4} ev/unit {:>9.5} net {:>10.2} ruin {:.4}",
                    s.name, s.mean_ev_per_hand, s.mean_ev_per_unit, s.mean_net_profit, s.mean_ruin_events
                );
            }
            out.text("bankroll_trials.csv", &csv)?;
            out.json("bankroll.json", &json!({ "config": config, "strategies": table }))?;
        }
        BetMode::Monotonicity => {
            let n = trials.unwrap_or(b.monotonicity_trials);
            let h = hands.unwrap_or(b.hands_per_trial);
            let stream = RngStream::new(seed, 12);
            let rep = ruin_monotonicity_check(space, policy, &b.monotonicity_bets, b.starting_bankroll, h, n, &stream)?;
            let mut scaling = Vec::new();
            for t in 0..n {
                let r = unit_returns(space, policy, h, &stream.derive(t))?;
                for lambda in [2.0, 10.0] {
                    scaling.push(scaling_check(1.0, b.starting_bankroll, lambda, &r)?);
                }
            }
            let holds = scaling.iter().all(|c| c.holds());
            out.json("monotonicity.json", &json!({ "ruin": rep, "scaling_identity_holds": holds, "scaling": scaling }))?;
            for r in &rep.rows {
                println!("bet {:>6} ruin {:.3} [{:.3}, {:.3}]", r.bet, r.frequency, r.ci_low, r.ci_high);
            }
            println!("non-decreasing {} scaling identity {}", rep.non_decreasing, holds);
        }
    }
    report_written(&out);
    Ok(())
}

fn write_heatmaps(out: &mut OutDir, prefix: &str, sol: &OracleSolution, report: &RegretReport) -> Result<()> {
    for chart in HeatChart::ALL {
        let g = Grid::build(chart, sol.space(), &report.per_cell);
        out.text(&format!("{prefix}{}.csv", chart.name()), &g.to_csv())?;
        let extra = [("color-scale", format!("linear white=0 darkred={}", g.max()))];
        out.png(&format!("{prefix}{}.png", chart.name()), &g.render(), &extra)?;
    }
    Ok(())
}

fn load_policy(path: &Path) -> Result<CellDump> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(CellDump::from_json(&src)?)
}

pub fn heatmaps(policy: Option<&Path>, args: &RulesArgs, out: &Path) -> Result<()> {
    let cfg = load_config(args)?;
    let dump = policy.map(load_policy).transpose()?;
    let rules = match &dump {
        Some(d) => d.header.rules,
        None => resolve_rules(args.preset.as_deref(), args.rules.as_deref(), &cfg)?.1,
    };
    let effective = json!({ "command": "heatmaps", "rules": rules, "policy": policy.map(|p| p.display().to_string()) });
    let mut out = OutDir::create(out, stamp(&effective, dump.as_ref().and_then(|d| d.header.seed))?)?;
    let sol = solve_rules(&rules)?;
    let (actions, report) = match &dump {
        Some(d) => {
            d.check_space(sol.space())?;
            let report = match d.logits() {
                Ok(theta) => score_logits(&theta, &sol)?,
                Err(_) => cell_regret(&d.actions(), &sol)?,
            };
            (d.actions(), report)
        }
        None => (sol.optimal_action.clone(), cell_regret(&sol.optimal_action, &sol)?),
    };
    write_heatmaps(&mut out, "", &sol, &report)?;
    out.text("cells.csv", &regret_csv(sol.space(), &sol, &actions, &report))?;
    println!("mean regret {:.5} max {:.5} amr {:.4}", report.mean_regret, report.max_regret, report.amr);
    report_written(&out);
    Ok(())
}

fn median_row(method: &str, rows: &[&SummaryRow]) -> SummaryRow {
    let m = |f: fn(&SummaryRow) -> f64| median(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
    let mopt = |f: fn(&SummaryRow) -> Option<u64>| {
        let v: Vec<f64> = rows.iter().filter_map(|r| f(r)).map(|x| x as f64).collect();
        if v.len() * 2 > rows.len() {
            Some(median(&v) as u64)
        } else {
            None
        }
    };
    SummaryRow {
        method: format!("{method} (median)"),
        seed: 0,
        budget: m(|r| r.budget as f64) as u64,
        final_ev: m(|r| r.final_ev),
        oracle_ev: m(|r| r.oracle_ev),
        ev_gap: m(|r| r.ev_gap),
        amr: m(|r| r.amr),
        mean_regret: m(|r| r.mean_regret),
        max_regret: m(|r| r.max_regret),
        mean_regret_depth0: m(|r| r.mean_regret_depth0),
        threshold_95: mopt(|r| r.threshold_95),
        threshold_99: mopt(|r| r.threshold_99),
    }
}

pub fn report(runs: &Path, out: Option<PathBuf>) -> Result<()> {
    let mut found: Vec<(PathBuf, RunReport)> = Vec::new();
    let mut unreadable = Vec::new();
    if runs.is_dir() {
        let mut dirs: Vec<PathBuf> = fs::read_dir(runs)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
        dirs.sort();
        for d in dirs {
            let f = d.join("report.json");
            if !f.exists() {
                continue;
            }
            let parsed = fs::read_to_string(&f)
                .ok()
                .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok())
                .and_then(|v| serde_json::from_value::<RunReport>(v["run"].clone()).ok());
            match parsed {
                Some(r) => found.push((d, r)),
                None => unreadable.push(f.display().to_string()),
            }
        }
    }
    let rules = found.first().map(|(_, r)| r.rules).unwrap_or_else(Rules::benchmark);
    let sol = solve_rules(&rules)?;
    let mut by_method: BTreeMap<String, Vec<&SummaryRow>> = BTreeMap::new();
    for (_, r) in &found {
        by_method.entry(r.summary.method.clone()).or_default().push(&r.summary);
    }
    let missing: Vec<&str> = ["pg", "spsa", "cem"].into_iter().filter(|m| !by_method.contains_key(*m)).collect();
    let oracle_report = cell_regret(&sol.optimal_action, &sol)?;
    let mut rows = vec![SummaryRow::new("oracle", 0, 0, &oracle_report, None)];
    for (method, rs) in &by_method {
        rows.extend(rs.iter().map(|r| (*r).clone()));
        if rs.len() > 1 {
            rows.push(median_row(method, rs));
        }
    }
    let effective = json!({
        "command": "report",
        "rules": rules,
        "runs": found.iter().map(|(d, r)| json!({ "dir": d.display().to_string(), "summary": r.summary })).collect::<Vec<_>>(),
    });
    let out_path = out.unwrap_or_else(|| runs.join("report"));
    let mut out = OutDir::create(&out_path, stamp(&effective, None)?)?;
    let mut csv = String::from(SummaryRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    out.text("comparison.csv", &csv)?;
    out.json("comparison.json", &json!({ "rows": rows, "missing_methods": missing, "unreadable": unreadable }))?;
    for (dir, r) in &found {
        let policy = dir.join("policy.json");
        if let Ok(d) = load_policy(&policy) {
            if r.rules != rules {
                eprintln!("skipping heatmaps for {}: different ruleset", dir.display());
                continue;
            }
            let rep = score_logits(&d.logits()?, &sol)?;
            let tag = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            write_heatmaps(&mut out, &format!("heatmaps/{tag}/"), &sol, &rep)?;
        }
    }
    print!("{csv}");
    if !missing.is_empty() {
        eprintln!("missing runs for: {}", missing.join(", "));
    }
    for f in &unreadable {
        eprintln!("could not read {f}");
    }
    report_written(&out);
    Ok(())
}

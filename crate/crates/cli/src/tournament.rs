use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use log::warn;
use oodchess::arena::{
    rating_games, run_tournament, write_results, ArenaError, MatchResult, OpeningSource, PlayerBacking,
    TournamentPlan,
};
use oodchess::elo::{estimate, rank_consistency, Game, RatingTable, DEFAULT_CONFIDENCE};

use crate::args::{RateArgs, TournamentArgs};
use crate::run::{ErrorClass, Run};

/// Relative paths in a plan are taken relative to the plan file when
/// something exists there.
fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        let candidate = base.join(&*path);
        if candidate.exists() {
            *path = candidate;
        }
    }
}

pub fn load_plan(path: &Path) -> Result<TournamentPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).context(ErrorClass::Config)?;
    let mut plan: TournamentPlan =
        toml::from_str(&text).with_context(|| format!("invalid tournament plan {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in &mut plan.players {
        if let PlayerBacking::Engine { path, .. } = &mut p.backing {
            resolve(base, path);
        }
    }
    match &mut plan.openings {
        OpeningSource::Book { path: Some(p) } => resolve(base, p),
        OpeningSource::Chess960 { prep: Some(prep) } => resolve(base, &mut prep.path),
        _ => {}
    }
    Ok(plan)
}

fn write_ratings(run: &mut Run, games: &[Game], confidence: f64) -> Result<RatingTable> {
    let table = estimate(games, confidence)?;
    let consistency = rank_consistency(&table, &table.scores());
    let mut text = table.to_text();
    text.push_str(&format!(
        "white advantage {:+.1} Elo, draw parameter {:.3}; rating order {} score order\n",
        table.advantage,
        table.draw_parameter,
        if consistency.consistent { "matches" } else { "differs from" }
    ));
    run.write("ratings.txt", &text)?;
    run.write(
        "ratings.json",
        serde_json::to_string_pretty(&serde_json::json!({"ratings": table, "consistency": consistency}))? + "\n",
    )?;
    print!("{text}");
    Ok(table)
}

pub fn tournament(args: &TournamentArgs, run: &mut Run) -> Result<()> {
    run.input(&args.config);
    let mut plan = load_plan(&args.config)?;
    if let Some(seed) = args.seed {
        plan.seed = seed;
    }
    if let Some(g) = args.games_per_pair {
        plan.games_per_pair = g;
    }
    if let Some(m) = args.max_plies {
        plan.max_plies = m;
    }
    plan.workers = Some(run.workers);
    for p in &plan.players {
        match &p.backing {
            PlayerBacking::Engine { path, .. } => {
                if !path.is_file() {
                    return Err(anyhow!("player {}: engine binary {} does not exist", p.name, path.display()))
                        .context(ErrorClass::Engine);
                }
                run.engine(path)
            }
            PlayerBacking::Policy { .. } => run.nondeterministic("remote policy"),
            _ => {}
        }
    }
    if let OpeningSource::Chess960 { prep: Some(prep) } = &plan.openings {
        run.engine(&prep.path);
    }
    plan.validate()?;
    run.write("plan.json", serde_json::to_string_pretty(&plan)? + "\n")?;

    let report = match run_tournament(&plan) {
        Ok(r) => r,
        Err(ArenaError::Aborted { partial, reason }) => {
            run.create_out()?;
            write_results(&run.out, &partial)?;
            for f in ["results.jsonl", "games.pgn"] {
                run.output(&run.out_path(f));
            }
            return Err(anyhow!("tournament aborted after {} game(s): {reason}", partial.len()))
                .context(ErrorClass::Engine);
        }
        Err(e) => return Err(e.into()),
    };
    run.create_out()?;
    oodchess::arena::write_tournament(&run.out, &report)?;
    for f in ["results.jsonl", "games.pgn", "scores.txt"] {
        run.output(&run.out_path(f));
    }
    print!("{}", report.scores.to_text());
    match write_ratings(run, &rating_games(&report.results), DEFAULT_CONFIDENCE) {
        Ok(_) => {}
        Err(e) => warn!("no rating table: {e:#}"),
    }
    Ok(())
}

/// Accepts tournament results or bare `{white, black, white_score}` rows.
fn read_games(path: &Path) -> Result<Vec<Game>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut games = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let value: serde_json::Value = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: not JSON", path.display(), i + 1))
            .context(ErrorClass::Data)?;
        let parsed = if value.get("white_score").is_some() {
            serde_json::from_value::<Game>(value).map(|g| vec![g])
        } else {
            let result = serde_json::from_value::<MatchResult>(value);
            if let Ok(r) = &result {
                r.validate()
                    .map_err(|e| anyhow!("{}:{}: game does not replay: {e}", path.display(), i + 1))
                    .context(ErrorClass::Data)?;
            }
            result.map(|r| rating_games(std::slice::from_ref(&r)))
        };
        games.extend(
            parsed
                .with_context(|| format!("{}:{}: not a game result", path.display(), i + 1))
                .context(ErrorClass::Data)?,
        );
    }
    Ok(games)
}

pub fn rate(args: &RateArgs, run: &mut Run) -> Result<()> {
    let mut games = Vec::new();
    for path in &args.results {
        run.input(path);
        games.extend(read_games(path)?);
    }
    write_ratings(run, &games, args.confidence).context(ErrorClass::Data)?;
    Ok(())
}

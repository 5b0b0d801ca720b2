use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use anyhow::{anyhow, Context, Result};
use oodchess::lichess::{online_stats, read_logs, run_bot, stats_table, BotConfig, GameLogWriter, LichessClient, TOKEN_VAR};

use crate::args::BotCommand;
use crate::policy::PolicySource;
use crate::run::{ErrorClass, Run};

pub fn bot(cmd: &BotCommand, run: &mut Run) -> Result<()> {
    match cmd {
        BotCommand::Run { policy, variants, max_games, max_reconnects, server, log } => {
            let token = std::env::var(TOKEN_VAR)
                .ok()
                .filter(|t| !t.trim().is_empty())
                .ok_or_else(|| anyhow!("set {TOKEN_VAR} to a bot account's API token"))
                .context(ErrorClass::Config)?;
            let source = PolicySource::parse(policy)?;
            source.record(run);
            run.nondeterministic("online play");
            // Fail before connecting if the policy cannot start at all.
            drop(source.instantiate(0).with_context(|| format!("starting policy {}", policy.policy))?);

            let log_path = log.clone().unwrap_or_else(|| run.out_path("online_games.jsonl"));
            let mut writer = GameLogWriter::open(&log_path)?;
            let client = LichessClient::new(server, token.trim())?;
            let config = BotConfig {
                variants: variants.clone(),
                max_games: *max_games,
                max_reconnects: *max_reconnects,
                ..BotConfig::default()
            };
            let seeds = AtomicU64::new(0);
            let factory = || source.instantiate(seeds.fetch_add(1, Ordering::Relaxed));
            let report = run_bot(&client, &factory, &config, &mut writer, &AtomicBool::new(false))?;
            run.output(&log_path);
            println!(
                "{} game(s) logged to {}, {} challenge(s) declined, {} reconnect(s), {} failed game(s)",
                report.games.len(),
                log_path.display(),
                report.declined.len(),
                report.reconnects,
                report.failed_games.len()
            );
        }
        BotCommand::Stats { log } => {
            run.input(log);
            let logs = read_logs(log).with_context(|| format!("reading {}", log.display()))?;
            let stats = online_stats(&logs);
            let table = stats_table(&stats);
            run.write("online_stats.txt", &table)?;
            run.write("online_stats.json", serde_json::to_string_pretty(&stats)? + "\n")?;
            print!("{table}");
        }
    }
    Ok(())
}

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use oodchess::datahub::{load_boards, load_records, read_manifest, PuzzleRecord};
use oodchess::engine::SearchLimit;
use oodchess::kernel::Position;
use oodchess::metrics::{
    format_denominators, format_table, legal_accuracy, opening_move_histogram, puzzle_sequence_accuracy,
    topk_accuracy, EngineOracle, EvalReport,
};

use crate::args::{EvalArgs, EvalCommand};
use crate::policy;
use crate::run::{ErrorClass, Run};

/// The dataset's manifest name, or the file stem for bare JSONL.
fn dataset_name(path: &Path) -> String {
    read_manifest(path).map(|m| m.name).unwrap_or_else(|_| {
        path.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().trim_end_matches(".manifest").to_string())
    })
}

fn boards(args: &EvalArgs, run: &mut Run) -> Result<Vec<Position>> {
    run.input(&args.dataset);
    let boards = load_boards(&args.dataset).with_context(|| format!("loading {}", args.dataset.display()))?;
    if boards.is_empty() {
        return Err(anyhow!("{} has no boards", args.dataset.display()).context(ErrorClass::Data));
    }
    Ok(boards)
}

pub fn eval(cmd: &EvalCommand, run: &mut Run) -> Result<()> {
    let args = match cmd {
        EvalCommand::Legal(a) | EvalCommand::Puzzles(a) | EvalCommand::Openings(a) => a,
        EvalCommand::Topk(t) => &t.eval,
    };
    let mut report = EvalReport { dataset: dataset_name(&args.dataset), ..EvalReport::default() };
    let mut extra = String::new();
    match cmd {
        EvalCommand::Legal(_) => {
            let boards = boards(args, run)?;
            let mut policy = policy::build(&args.policy, args.seed, run)?;
            report.policy = policy.name().to_string();
            report.legal = Some(legal_accuracy(policy.as_mut(), &boards)?);
        }
        EvalCommand::Topk(t) => {
            let boards = boards(args, run)?;
            let variant = boards[0].variant();
            if boards.iter().any(|b| b.variant() != variant) {
                return Err(anyhow!("top-K needs a single-variant dataset").context(ErrorClass::Data));
            }
            let mut policy = policy::build(&args.policy, args.seed, run)?;
            report.policy = policy.name().to_string();
            let engine = policy::oracle_engine(t.oracle.clone(), variant, run)?;
            let mut oracle = EngineOracle { engine, limit: SearchLimit::Depth(t.oracle_depth) };
            let topk = topk_accuracy(policy.as_mut(), &boards, &t.ks, &mut oracle)?;
            extra = format_denominators(std::slice::from_ref(&EvalReport { topk: Some(topk.clone()), ..report.clone() }));
            report.topk = Some(topk);
        }
        EvalCommand::Puzzles(_) => {
            run.input(&args.dataset);
            let puzzles: Vec<PuzzleRecord> =
                load_records(&args.dataset).with_context(|| format!("loading {}", args.dataset.display()))?;
            let cases: Vec<_> = puzzles.iter().map(PuzzleRecord::to_case).collect();
            let mut policy = policy::build(&args.policy, args.seed, run)?;
            report.policy = policy.name().to_string();
            report.puzzles = Some(puzzle_sequence_accuracy(policy.as_mut(), &cases));
        }
        EvalCommand::Openings(_) => {
            let boards = boards(args, run)?;
            let mut policy = policy::build(&args.policy, args.seed, run)?;
            report.policy = policy.name().to_string();
            let hist = opening_move_histogram(policy.as_mut(), &boards)?;
            let _ = writeln!(extra, "{} boards, top-10 share {:.1}%", hist.total, 100.0 * hist.top_share(10));
            for (bucket, n) in hist.ranked().into_iter().take(20) {
                let _ = writeln!(extra, "{bucket:<8} {n:>6}  {:>5.1}%", 100.0 * n as f64 / hist.total as f64);
            }
            report.openings = Some(hist);
        }
    }
    run.write("report.json", serde_json::to_string_pretty(&report)? + "\n")?;
    let mut text = format!("policy: {}\n", report.policy);
    if report.openings.is_none() {
        text.push_str(&format_table(std::slice::from_ref(&report)));
    }
    if let Some(l) = &report.legal {
        let _ = writeln!(text, "legal {}/{} = {}", l.legal, l.total, l.accuracy);
        for (cause, n) in &l.illegal_causes {
            let _ = writeln!(text, "  {cause:?}: {n}");
        }
    }
    if let Some(p) = &report.puzzles {
        let _ = writeln!(text, "puzzles solved {}/{} = {}", p.solved, p.total, p.accuracy);
    }
    text.push_str(&extra);
    run.write("report.txt", &text)?;
    print!("{text}");
    Ok(())
}

use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use oodchess::datahub::{
    filter_training_corpus, group_by_primary_flag, ingest_puzzles, load_records, manifest_path, partition_id_ood,
    split_id_ood, write_dataset, BoardRecord, PuzzleRecord, Record,
};
use oodchess::ood::{gen_all_starting, gen_chess960, gen_knights_rooks, KnightsRooksParams, Origin};

use crate::args::{GenCommand, IngestArgs, SplitArgs, SplitKind};
use crate::run::{ErrorClass, Run};

/// Writes a dataset into the output directory and records both files.
fn save<T: Record>(run: &mut Run, name: &str, seed: Option<u64>, records: &[T]) -> Result<()> {
    let manifest = write_dataset(&run.out, name, seed, records)?;
    let path = manifest_path(&run.out, name);
    run.output(&run.out.join(&manifest.file));
    run.output(&path);
    println!("{name}: {} rows -> {}", manifest.count, path.display());
    Ok(())
}

pub fn gen(cmd: &GenCommand, run: &mut Run) -> Result<()> {
    let (name, origin, seed, boards) = match cmd {
        GenCommand::Chess960 { seed, exclude_classical } => {
            ("chess960", Origin::Chess960Start, *seed, gen_chess960(*seed, !exclude_classical).collect())
        }
        GenCommand::AllStarts { seed, n } => (
            "all_starts",
            Origin::NonstandardStart,
            *seed,
            gen_all_starting(*seed, *n).context(ErrorClass::Usage)?,
        ),
        GenCommand::KnightsRooks { seed, n, rooks, knights } => {
            let params = KnightsRooksParams { rooks: rooks.lo..=rooks.hi, knights: knights.lo..=knights.hi };
            let boards = gen_knights_rooks(*seed, *n, &params).context(ErrorClass::Usage)?;
            ("knights_rooks", Origin::KnightsRooks, *seed, boards)
        }
    };
    let records: Vec<BoardRecord> = boards.iter().map(|p| BoardRecord::generated(p, origin, "test", seed)).collect();
    save(run, name, Some(seed), &records)
}

pub fn ingest(args: &IngestArgs, run: &mut Run) -> Result<()> {
    run.input(&args.csv);
    let file = File::open(&args.csv).with_context(|| format!("opening {}", args.csv.display()))?;
    let report = ingest_puzzles(file)?;
    if !report.dropped.is_empty() {
        let mut text = String::from("line\treason\n");
        for (line, reason) in &report.dropped {
            text.push_str(&format!("{line}\t{reason}\n"));
        }
        let path = run.write(&format!("{}.dropped.tsv", args.name), text)?;
        eprintln!("dropped {} row(s); see {}", report.dropped.len(), path.display());
    }
    save(run, &args.name, None, &report.records)
}

fn load<T: Record>(path: &Path, run: &mut Run) -> Result<Vec<T>> {
    run.input(path);
    load_records(path).with_context(|| format!("loading {}", path.display()))
}

pub fn split(args: &SplitArgs, run: &mut Run) -> Result<()> {
    match args.kind {
        SplitKind::Puzzles => {
            let records: Vec<PuzzleRecord> = load(&args.dataset, run)?;
            let (id, ood) = match args.per_side {
                Some(n) => split_id_ood(&records, n, args.seed)?,
                None => partition_id_ood(&records),
            };
            info!("{} puzzles: {} ID, {} OOD", records.len(), id.len(), ood.len());
            save(run, "puzzles_id", Some(args.seed), &id)?;
            save(run, "puzzles_ood", Some(args.seed), &ood)?;
            for (flag, group) in group_by_primary_flag(&ood) {
                let name = serde_json::to_value(flag)?.as_str().unwrap_or("flag").to_string();
                save(run, &format!("puzzles_ood_{name}"), Some(args.seed), &group)?;
            }
        }
        SplitKind::Corpus => {
            let records: Vec<BoardRecord> = load(&args.dataset, run)?;
            let (kept, removed, stats) = filter_training_corpus(&records);
            save(run, "train", None, &kept)?;
            save(run, "removed", None, &removed)?;
            run.write("filter_stats.json", serde_json::to_string_pretty(&stats)? + "\n")?;
        }
    }
    Ok(())
}

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use oodchess::datahub::load_boards;
use oodchess::kernel::Position;
use oodchess::notation::fen::{format_fen, parse_fen, parse_fen_any};
use oodchess::policy::Policy;
use oodchess::probes::{dynamics_series, legal_mass, origin_heatmap, Checkpoint, BOARDS_PER_PIECE};
use serde::Deserialize;

use crate::args::{BoardArgs, DynamicsArgs, PolicyArgs, ProbeCommand};
use crate::policy;
use crate::run::{ErrorClass, Run};

fn boards(args: &BoardArgs, run: &mut Run) -> Result<Vec<Position>> {
    let mut out = Vec::new();
    for fen in &args.fen {
        let pos = match args.variant {
            Some(v) => parse_fen(fen, v),
            None => parse_fen_any(fen),
        };
        out.push(pos.with_context(|| format!("bad FEN {fen:?}")).context(ErrorClass::Usage)?);
    }
    if let Some(path) = &args.dataset {
        run.input(path);
        out.extend(load_boards(path).with_context(|| format!("loading {}", path.display()))?);
    }
    if out.is_empty() {
        return Err(anyhow!("no boards: pass --fen or --dataset")).context(ErrorClass::Usage);
    }
    Ok(out)
}

fn distribution_policy(args: &PolicyArgs, run: &mut Run) -> Result<Box<dyn Policy>> {
    let policy = policy::build(args, 0, run)?;
    if !policy.supports_distribution() {
        return Err(anyhow!("policy {} does not expose a move distribution", args.policy)).context(ErrorClass::Usage);
    }
    Ok(policy)
}

pub fn probe(cmd: &ProbeCommand, run: &mut Run) -> Result<()> {
    match cmd {
        ProbeCommand::Heatmap { policy, boards: b, label, cell } => {
            let boards = boards(b, run)?;
            let mut policy = distribution_policy(policy, run)?;
            let label = if label.is_empty() { policy.name().to_string() } else { label.clone() };
            let mut grids = Vec::new();
            for (i, pos) in boards.iter().enumerate() {
                let grid = origin_heatmap(&policy.distribution(pos)?, pos, &label);
                run.write(&format!("heatmap_{i:03}.csv"), grid.to_csv())?;
                let png = run.out_path(&format!("heatmap_{i:03}.png"));
                grid.write_png(&png, *cell)?;
                run.output(&png);
                grids.push(grid);
            }
            run.write("heatmaps.json", serde_json::to_string_pretty(&grids)? + "\n")?;
            println!("{} heatmap(s) in {}", grids.len(), run.out.display());
        }
        ProbeCommand::LegalMass { policy, boards: b } => {
            let boards = boards(b, run)?;
            let mut policy = distribution_policy(policy, run)?;
            let mut csv = String::from("fen,legal_moves,legal_mass\n");
            let mut total = 0.0;
            for pos in &boards {
                let mass = legal_mass(&policy.distribution(pos)?, pos);
                total += mass;
                let _ = writeln!(csv, "\"{}\",{},{mass}", format_fen(pos), pos.legal_moves().len());
            }
            run.write("legal_mass.csv", csv)?;
            let mean = total / boards.len() as f64;
            run.write(
                "legal_mass.json",
                serde_json::to_string_pretty(&serde_json::json!({
                    "policy": policy.name(), "boards": boards.len(), "mean_legal_mass": mean,
                }))? + "\n",
            )?;
            println!("mean legal mass over {} board(s): {mean}", boards.len());
        }
        ProbeCommand::Dynamics(args) => dynamics(args, run)?,
    }
    Ok(())
}

/// Checkpoint list for `probe dynamics --config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsConfig {
    #[serde(default)]
    checkpoints: Vec<CheckpointSpec>,
    id_dataset: Option<PathBuf>,
    ood_dataset: Option<PathBuf>,
    seed: Option<u64>,
    boards_per_piece: Option<usize>,
    /// Applies to every checkpoint policy.
    timeout_ms: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointSpec {
    label: String,
    step: u64,
    policy: String,
}

impl std::str::FromStr for CheckpointSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<CheckpointSpec> {
        let mut parts = s.splitn(3, ':');
        match (parts.next(), parts.next().map(str::parse::<u64>), parts.next()) {
            (Some(label), Some(Ok(step)), Some(policy)) if !label.is_empty() => {
                Ok(CheckpointSpec { label: label.into(), step, policy: policy.into() })
            }
            _ => Err(anyhow!("checkpoint must be LABEL:STEP:POLICY, got {s:?}")).context(ErrorClass::Usage),
        }
    }
}

fn dynamics(args: &DynamicsArgs, run: &mut Run) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            run.input(path);
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
                .context(ErrorClass::Config)?;
            let mut c: DynamicsConfig = toml::from_str(&text).with_context(|| format!("invalid {}", path.display()))?;
            let base = path.parent().unwrap_or(std::path::Path::new("."));
            for p in [&mut c.id_dataset, &mut c.ood_dataset].into_iter().flatten() {
                if p.is_relative() && base.join(&*p).exists() {
                    *p = base.join(&*p);
                }
            }
            c
        }
        None => DynamicsConfig::default(),
    };
    if !args.checkpoint.is_empty() {
        config.checkpoints = args.checkpoint.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    let id_path = args.id_dataset.clone().or(config.id_dataset).ok_or_else(|| anyhow!("no ID dataset"))
        .context(ErrorClass::Usage)?;
    let ood_path = args.ood_dataset.clone().or(config.ood_dataset).ok_or_else(|| anyhow!("no OOD dataset"))
        .context(ErrorClass::Usage)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let per_piece = args.boards_per_piece.or(config.boards_per_piece).unwrap_or(BOARDS_PER_PIECE);

    let load = |path: &PathBuf, run: &mut Run| -> Result<Vec<Position>> {
        run.input(path);
        load_boards(path).with_context(|| format!("loading {}", path.display()))
    };
    let id_boards = load(&id_path, run)?;
    let ood_boards = load(&ood_path, run)?;

    let mut policies = Vec::new();
    for cp in &config.checkpoints {
        let args = PolicyArgs {
            policy: cp.policy.clone(),
            depth: None,
            movetime: 50,
            skill: None,
            timeout_ms: config.timeout_ms.unwrap_or(30_000),
        };
        policies.push(distribution_policy(&args, run).with_context(|| format!("checkpoint {}", cp.label))?);
    }
    let mut checkpoints: Vec<Checkpoint<'_>> = config
        .checkpoints
        .iter()
        .zip(policies.iter_mut())
        .map(|(cp, policy)| Checkpoint { label: cp.label.clone(), step: cp.step, policy: policy.as_mut() })
        .collect();
    let series = dynamics_series(&mut checkpoints, &id_boards, &ood_boards, seed, per_piece)
        .map_err(|e| match e {
            oodchess::probes::ProbeError::TooFewCheckpoints(_) | oodchess::probes::ProbeError::UnorderedCheckpoints(..) => {
                anyhow::Error::new(e).context(ErrorClass::Usage)
            }
            e => e.into(),
        })?;
    let mut csv = Vec::new();
    series.write_csv(&mut csv)?;
    run.write("dynamics.csv", &csv)?;
    run.write("dynamics.svg", series.to_svg())?;
    run.write("dynamics.json", serde_json::to_string_pretty(&series)? + "\n")?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}

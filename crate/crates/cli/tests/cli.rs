use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn oodchess(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oodchess"))
        .args(args)
        .current_dir(cwd)
        .env_remove("OODCHESS_ENGINE")
        .env_remove("OODCHESS_VARIANT_ENGINE")
        .env_remove("LICHESS_BOT_TOKEN")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = oodchess(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str], cwd: &Path) -> (i32, Value) {
    let out = oodchess(args, cwd);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let json = stderr.lines().rev().find_map(|l| serde_json::from_str::<Value>(l).ok()).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json)
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path.as_ref()).unwrap()).unwrap()
}

fn data_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(json(dir.join(format!("{name}.manifest.json")))["file"].as_str().unwrap())
}

#[test]
fn gen_chess960_writes_960_rows_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    ok(&["gen", "chess960", "--seed", "7", "-o", "out/"], cwd);
    let out = cwd.join("out");
    let rows = fs::read_to_string(data_file(&out, "chess960")).unwrap();
    assert_eq!(rows.lines().count(), 960);
    let fens: std::collections::HashSet<&str> =
        rows.lines().map(|l| serde_json::from_str::<Value>(l).unwrap()["fen"].as_str().unwrap().to_owned().leak() as &str).collect();
    assert_eq!(fens.len(), 960);

    let manifest = json(out.join("run.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config"]["command"]["gen"]["chess960"]["seed"], 7);
    assert_eq!(manifest["nondeterministic"], Value::Array(vec![]));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);

    // The manifest re-executes the identical run.
    ok(&["rerun", "out/run.json", "-o", "again"], cwd);
    for name in ["chess960.manifest.json", "run.json"] {
        assert_eq!(fs::read(out.join(name)).unwrap(), fs::read(cwd.join("again").join(name)).unwrap(), "{name}");
    }
    assert_eq!(fs::read(data_file(&out, "chess960")).unwrap(), fs::read(data_file(&cwd.join("again"), "chess960")).unwrap());

    ok(&["gen", "chess960", "--exclude-classical", "-o", "959"], cwd);
    assert_eq!(fs::read_to_string(data_file(&cwd.join("959"), "chess960")).unwrap().lines().count(), 959);
}

#[test]
fn other_generators_and_legal_accuracy_of_random_legal() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    ok(&["gen", "knights-rooks", "--seed", "1", "-n", "300", "-o", "kr"], cwd);
    ok(&["gen", "all-starts", "--seed", "1", "-n", "50", "-o", "as"], cwd);
    assert_eq!(fs::read_to_string(data_file(&cwd.join("as"), "all_starts")).unwrap().lines().count(), 50);

    let stdout = ok(
        &["eval", "legal", "--policy", "random-legal", "--dataset", "kr/knights_rooks.manifest.json", "-o", "ev"],
        cwd,
    );
    assert!(stdout.contains("legal 300/300 = 1"), "{stdout}");
    let report = json(cwd.join("ev/report.json"));
    assert_eq!(report["legal"]["accuracy"], 1.0);
    assert_eq!(report["dataset"], "knights_rooks");
    // The bare JSONL works as well.
    let bare = data_file(&cwd.join("kr"), "knights_rooks");
    ok(&["eval", "legal", "--policy", "random-legal", "--dataset", bare.to_str().unwrap(), "-o", "ev2"], cwd);
    assert_eq!(json(cwd.join("ev2/report.json"))["legal"]["accuracy"], 1.0);

    ok(&["eval", "openings", "--policy", "random-legal", "--dataset", "as/all_starts.manifest.json", "-o", "op"], cwd);
    assert_eq!(json(cwd.join("op/report.json"))["openings"]["total"], 50);

    // Too many boards for the universe is a usage error.
    assert_eq!(exit_code(&["gen", "all-starts", "-n", "100000", "-o", "x"], cwd).0, 2);
}

const PUZZLES: &str = "\
PuzzleId,FEN,Moves,Rating,RatingDeviation,Popularity,NbPlays,Themes,GameUrl,OpeningTags
twoRooks,7k/5ppp/8/8/8/8/8/RR4K1 b - - 0 1,h8g8 a1a8,812,75,95,120,mate mateIn1 oneMove,,
italian,rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1,e7e5 g1f3 b8c6 f1b5,1500,80,90,100,opening,,
threeQueens,7k/8/8/8/8/8/8/1QQQ2K1 b - - 0 1,h8g8 d1d5,1000,80,90,100,,,
sameColor,7k/8/8/8/8/4B3/8/2B3K1 b - - 0 1,h8g8 e3d4,1000,80,90,100,,,
illegal,7k/5ppp/8/8/8/8/8/RR4K1 b - - 0 1,h8h1 a1a8,900,80,90,100,,,
";

#[test]
fn ingest_split_and_puzzle_accuracy() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    fs::write(cwd.join("puzzles.csv"), PUZZLES).unwrap();
    ok(&["ingest", "puzzles.csv", "-o", "data"], cwd);
    let data = cwd.join("data");
    assert_eq!(json(data.join("puzzles.manifest.json"))["count"], 4);
    assert!(fs::read_to_string(data.join("puzzles.dropped.tsv")).unwrap().contains("illegal"));

    ok(&["split", "data/puzzles.manifest.json", "-o", "split"], cwd);
    let split = cwd.join("split");
    assert_eq!(json(split.join("puzzles_id.manifest.json"))["count"], 2);
    assert_eq!(json(split.join("puzzles_ood.manifest.json"))["count"], 2);
    assert_eq!(json(split.join("puzzles_ood_more_pieces.manifest.json"))["count"], 1);
    assert_eq!(json(split.join("puzzles_ood_same_color_bishops.manifest.json"))["count"], 1);

    ok(&["eval", "puzzles", "--policy", "random-legal", "--dataset", "data/puzzles.manifest.json", "-o", "pz"], cwd);
    let report = json(cwd.join("pz/report.json"));
    assert_eq!(report["puzzles"]["total"], 4);

    // A tampered data file fails the manifest hash check: data error.
    let file = data_file(&data, "puzzles");
    let mut text = fs::read_to_string(&file).unwrap();
    text = text.replacen("twoRooks", "twoRookz", 1);
    fs::write(&file, text).unwrap();
    let (code, err) =
        exit_code(&["eval", "puzzles", "--policy", "random-legal", "--dataset", "data/puzzles.manifest.json"], cwd);
    assert_eq!((code, err["error"].as_str()), (5, Some("data")));
}

const PLAN: &str = r#"
name = "smoke"
variant = "standard"
games_per_pair = 4
seed = 11
max_plies = 120

[openings]
type = "book"

[[players]]
name = "alpha"
type = "random_legal"

[[players]]
name = "beta"
type = "random_legal"
"#;

#[test]
fn tournament_smoke_two_players_four_games() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    fs::write(cwd.join("std.toml"), PLAN).unwrap();
    let stdout = ok(&["tournament", "--config", "std.toml", "-o", "t", "--workers", "2"], cwd);
    assert!(stdout.contains("Rel. Elo"), "{stdout}");
    let t = cwd.join("t");
    let results = fs::read_to_string(t.join("results.jsonl")).unwrap();
    let rows: Vec<Value> = results.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let white_alpha = rows.iter().filter(|r| r["white"] == "alpha").count();
    assert_eq!(white_alpha, 2, "colors alternate");
    let pgn = fs::read_to_string(t.join("games.pgn")).unwrap();
    assert_eq!(pgn.matches("[Event \"smoke\"]").count(), 4);
    assert!(t.join("ratings.txt").is_file() && t.join("scores.txt").is_file());
    let manifest = json(t.join("run.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 1);

    // Results feed the rating command; a rerun with other worker counts
    // reproduces them byte for byte.
    ok(&["rate", "t/results.jsonl", "-o", "r"], cwd);
    let ratings = json(cwd.join("r/ratings.json"));
    let sum: f64 = ratings["ratings"]["players"].as_array().unwrap().iter().map(|p| p["rating"].as_f64().unwrap()).sum();
    assert!(sum.abs() < 1e-9);
    ok(&["rerun", "t/run.json", "-o", "t2", "--workers", "1"], cwd);
    assert_eq!(results, fs::read_to_string(cwd.join("t2/results.jsonl")).unwrap());

    // CLI overrides beat the file.
    ok(&["tournament", "--config", "std.toml", "--games-per-pair", "2", "-o", "t3"], cwd);
    assert_eq!(fs::read_to_string(cwd.join("t3/results.jsonl")).unwrap().lines().count(), 2);
}

#[test]
fn tournament_against_an_engine() {
    let Some(engine) = std::env::var_os("OODCHESS_ENGINE").filter(|p| Path::new(p).is_file()) else {
        eprintln!("OODCHESS_ENGINE not set; skipping");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    let plan = format!(
        "{PLAN}\n[[players]]\nname = \"engine\"\ntype = \"engine\"\npath = {:?}\nskill = 0\ndepth = 1\n",
        engine.to_str().unwrap()
    );
    fs::write(cwd.join("std.toml"), plan).unwrap();
    ok(&["tournament", "--config", "std.toml", "-o", "t"], cwd);
    assert_eq!(fs::read_to_string(cwd.join("t/results.jsonl")).unwrap().lines().count(), 12);
    let manifest = json(cwd.join("t/run.json"));
    assert_eq!(manifest["nondeterministic"][0], "engine search");
    assert_eq!(manifest["engines"].as_array().unwrap().len(), 1);
}

#[test]
fn failures_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    // Usage.
    assert_eq!(exit_code(&["gen", "chess960", "--bogus"], cwd).0, 2);
    assert_eq!(exit_code(&["frobnicate"], cwd).0, 2);
    assert_eq!(exit_code(&["eval", "legal", "--policy", "nonsense", "--dataset", "x"], cwd).0, 5, "dataset first");
    ok(&["gen", "knights-rooks", "-n", "5", "-o", "kr"], cwd);
    let (code, err) = exit_code(&["eval", "legal", "--policy", "nonsense", "--dataset", "kr/knights_rooks.manifest.json"], cwd);
    assert_eq!((code, err["error"].as_str()), (2, Some("usage")));
    // Config.
    fs::write(cwd.join("bad.toml"), "name = \"x\"\nvariant = \"atomic\"\n").unwrap();
    assert_eq!(exit_code(&["tournament", "--config", "bad.toml"], cwd).0, 3);
    fs::write(cwd.join("odd.toml"), PLAN.replace("games_per_pair = 4", "games_per_pair = 3")).unwrap();
    assert_eq!(exit_code(&["tournament", "--config", "odd.toml"], cwd).0, 3);
    assert_eq!(exit_code(&["tournament", "--config", "missing.toml"], cwd).0, 3);
    assert_eq!(exit_code(&["bot", "run", "--policy", "random-legal"], cwd).0, 3, "no token");
    // Engine.
    let plan = format!("{PLAN}\n[[players]]\nname = \"ghost\"\ntype = \"engine\"\npath = \"/nonexistent/engine\"\n");
    fs::write(cwd.join("ghost.toml"), plan).unwrap();
    let (code, err) = exit_code(&["tournament", "--config", "ghost.toml"], cwd);
    assert_eq!((code, err["error"].as_str()), (4, Some("engine")));
    assert!(err["message"].as_str().unwrap().contains("/nonexistent/engine"));
    assert_eq!(
        exit_code(&["eval", "topk", "--policy", "random-legal", "--dataset", "kr/knights_rooks.manifest.json"], cwd).0,
        4,
        "no oracle engine"
    );
    // Data.
    fs::write(cwd.join("results.jsonl"), "{\"white\": \"a\", \"black\": \"b\", \"white_score\": 0.7}\n").unwrap();
    assert_eq!(exit_code(&["rate", "results.jsonl"], cwd).0, 5);
}

#[test]
fn rate_bare_game_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    let mut rows = String::new();
    for i in 0..30 {
        let (w, b) = if i % 2 == 0 { ("strong", "weak") } else { ("weak", "strong") };
        let score = if i % 5 == 0 { 0.5 } else if w == "strong" { 1.0 } else { 0.0 };
        rows.push_str(&format!("{{\"white\": \"{w}\", \"black\": \"{b}\", \"white_score\": {score}}}\n"));
    }
    fs::write(cwd.join("games.jsonl"), rows).unwrap();
    let stdout = ok(&["rate", "games.jsonl", "-o", "r"], cwd);
    let first = stdout.lines().nth(1).unwrap();
    assert!(first.contains("strong"), "{stdout}");
    assert_eq!(json(cwd.join("r/ratings.json"))["consistency"]["consistent"], true);
}

#[test]
fn probes_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    let start = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
    let stdout = ok(&["probe", "legal-mass", "--policy", "uniform", "--fen", start, "-o", "lm"], cwd);
    assert!(stdout.contains(&(20.0 / 1968.0f64).to_string()), "{stdout}");
    assert_eq!(json(cwd.join("lm/legal_mass.json"))["mean_legal_mass"], 20.0 / 1968.0);

    ok(&["probe", "heatmap", "--policy", "uniform", "--fen", start, "--cell", "8", "-o", "hm"], cwd);
    let csv = fs::read_to_string(cwd.join("hm/heatmap_000.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    let max = csv.split([',', '\n']).filter(|s| !s.is_empty()).map(|v| v.parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert_eq!(max, 1.0);
    assert!(cwd.join("hm/heatmap_000.png").is_file());

    // Random-legal has no distribution.
    assert_eq!(exit_code(&["probe", "heatmap", "--policy", "random-legal", "--fen", start], cwd).0, 2);

    ok(&["gen", "chess960", "-o", "id"], cwd);
    ok(&["gen", "knights-rooks", "-n", "20", "-o", "ood"], cwd);
    fs::write(
        cwd.join("dyn.toml"),
        "id_dataset = \"id/chess960.manifest.json\"\nood_dataset = \"ood/knights_rooks.manifest.json\"\n\
         boards_per_piece = 8\n\n[[checkpoints]]\nlabel = \"a\"\nstep = 0\npolicy = \"uniform\"\n\n\
         [[checkpoints]]\nlabel = \"b\"\nstep = 100\npolicy = \"uniform\"\n",
    )
    .unwrap();
    ok(&["probe", "dynamics", "--config", "dyn.toml", "-o", "dy"], cwd);
    let csv = fs::read_to_string(cwd.join("dy/dynamics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(fs::read_to_string(cwd.join("dy/dynamics.svg")).unwrap().starts_with("<svg"));
    // Steps must increase.
    let (code, _) = exit_code(
        &["probe", "dynamics", "--config", "dyn.toml", "--checkpoint", "x:5:uniform", "--checkpoint", "y:5:uniform"],
        cwd,
    );
    assert_eq!(code, 2);
}

#[test]
fn bot_stats_from_a_log() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    let start = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
    let after = "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1";
    let entry = |id: &str, winner: &str| {
        format!(
            "{{\"game_id\":\"{id}\",\"variant\":\"standard\",\"speed\":\"blitz\",\"rated\":true,\"our_color\":\"white\",\
             \"opponent\":\"x\",\"opponent_rating\":1600,\"opponent_human\":true,\"initial_fen\":\"{start}\",\
             \"moves\":[\"e2e4\"],\"final_fen\":\"{after}\",\"status\":\"resign\",\"winner\":{winner},\"illegal\":null}}\n"
        )
    };
    fs::write(cwd.join("games.jsonl"), entry("a", "\"white\"") + &entry("b", "\"black\"")).unwrap();
    let stdout = ok(&["bot", "stats", "games.jsonl", "-o", "st"], cwd);
    assert!(stdout.contains("Blitz") && stdout.contains("50%") && stdout.contains("1600"), "{stdout}");

    fs::write(cwd.join("bad.jsonl"), entry("c", "\"white\"").replace("e2e4", "e2e5")).unwrap();
    assert_eq!(exit_code(&["bot", "stats", "bad.jsonl"], cwd).0, 5);
}

#[test]
fn help_lists_every_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let help = ok(&["--help"], tmp.path());
    for sub in ["gen", "ingest", "split", "eval", "tournament", "rate", "probe", "bot", "rerun", "--workers", "--out"] {
        assert!(help.contains(sub), "{sub} missing from --help");
    }
    for (cmd, subs) in [
        ("gen", &["chess960", "all-starts", "knights-rooks"][..]),
        ("eval", &["legal", "topk", "puzzles", "openings"][..]),
        ("probe", &["heatmap", "legal-mass", "dynamics"][..]),
    ] {
        let help = ok(&[cmd, "--help"], tmp.path());
        for s in subs {
            assert!(help.contains(s), "{cmd} {s}");
        }
    }
}

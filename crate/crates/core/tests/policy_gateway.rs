use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use oodchess::kernel::{Position, Variant};
use oodchess::notation::actions::{decode, encode, encode_move};
use oodchess::notation::fen::{format_fen, parse_fen};
use oodchess::notation::uci::parse_legal_move;
use oodchess::ood::gen_chess960;
use oodchess::policy::wire::serve;
use oodchess::policy::{
    DistributionFn, Policy, PolicyDistribution, PolicyEndpoint, PolicyError, RandomLegal, ScriptedPolicy, UniformPolicy,
    WirePolicy,
};

const SHORT: Duration = Duration::from_millis(300);

/// Serves `policy` on a fresh local port for a single connection.
fn spawn_server(mut policy: impl Policy + 'static) -> PolicyEndpoint {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let reader = BufReader::new(stream.try_clone().unwrap());
        let _ = serve(reader, stream, &mut policy);
    });
    PolicyEndpoint::Tcp(addr.to_string())
}

/// A hand-written server: `script` gets each request and returns the reply
/// line, or `None` to stay silent.
fn spawn_raw(script: impl Fn(&str) -> Option<String> + Send + 'static) -> PolicyEndpoint {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut out = stream.try_clone().unwrap();
        for line in BufReader::new(stream).lines() {
            let Ok(line) = line else { break };
            if let Some(reply) = script(&line) {
                if writeln!(out, "{reply}").is_err() {
                    break;
                }
            }
        }
    });
    PolicyEndpoint::Tcp(addr.to_string())
}

fn connect(ep: &PolicyEndpoint) -> Result<WirePolicy, PolicyError> {
    WirePolicy::connect(ep, Duration::from_secs(10))
}

fn boards() -> Vec<Position> {
    let mut v: Vec<Position> = gen_chess960(3, true).take(20).collect();
    v.push(Position::standard());
    v.push(parse_fen("r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1", Variant::Standard).unwrap());
    v
}

#[test]
fn random_legal_is_legal_and_reproducible() {
    let (mut a, mut b) = (RandomLegal::new(11), RandomLegal::new(11));
    for pos in boards() {
        let (x, y) = (a.choose(&pos).unwrap().text, b.choose(&pos).unwrap().text);
        assert_eq!(x, y);
        assert!(parse_legal_move(&pos, &x).is_some(), "{x} on {}", format_fen(&pos));
    }
    let mate = parse_fen("R6k/6pp/8/8/8/8/8/K7 b - - 0 1", Variant::Standard).unwrap();
    assert_eq!(RandomLegal::new(0).choose(&mate).unwrap().text, "0000");
}

#[test]
fn random_legal_seeds_differ() {
    let pos = Position::standard();
    let picks: std::collections::BTreeSet<String> =
        (0..20).map(|s| RandomLegal::new(s).choose(&pos).unwrap().text).collect();
    assert!(picks.len() > 1);
}

#[test]
fn handshake_and_move_over_tcp() {
    let ep = spawn_server(ScriptedPolicy::constant("e2e4"));
    let mut client = connect(&ep).unwrap();
    assert!(client.caps().is_empty());
    assert!(!client.supports_distribution());
    assert_eq!(client.choose(&Position::standard()).unwrap().text, "e2e4");
    assert!(matches!(client.distribution(&Position::standard()), Err(PolicyError::Unsupported(_))));
}

#[test]
fn illegal_and_malformed_text_pass_through_verbatim() {
    let ep = spawn_server(ScriptedPolicy::constant("z9z9"));
    let mut client = connect(&ep).unwrap();
    let v = client.choose(&Position::standard()).unwrap();
    assert_eq!(v.text, "z9z9");
    assert!(v.uci().is_err());
}

/// Later legal moves get more weight; illegal actions keep a little.
fn peaked(pos: &Position) -> PolicyDistribution {
    let mut logits = vec![0.0; 1968];
    for (i, m) in pos.legal_moves().into_iter().enumerate() {
        logits[encode_move(pos, m).unwrap()] = 1.0 + i as f64 * 0.25;
    }
    PolicyDistribution::from_logits(logits).unwrap()
}

#[test]
fn distribution_round_trips_and_verdict_is_argmax() {
    let mut local = DistributionFn::new("peaked", peaked);
    let mut remote = connect(&spawn_server(DistributionFn::new("peaked", peaked))).unwrap();
    assert_eq!(remote.caps(), ["dist"]);
    for pos in boards() {
        let here = local.distribution(&pos).unwrap();
        let there = remote.distribution(&pos).unwrap();
        for i in 0..1968 {
            assert!((here.prob(i) - there.prob(i)).abs() < 1e-12);
        }
        let verdict = remote.choose(&pos).unwrap();
        assert_eq!(verdict.text, decode(there.argmax()).unwrap().to_string());
        assert_eq!(encode(verdict.uci().unwrap()).unwrap(), here.argmax());
    }
}

#[test]
fn uniform_server_argmax_is_first_action() {
    let mut c = connect(&spawn_server(UniformPolicy)).unwrap();
    let v = c.choose(&Position::standard()).unwrap();
    assert_eq!(v.text, decode(0).unwrap().to_string());
    assert!(v.distribution.unwrap().is_normalized());
}

#[test]
fn server_reports_bad_fen_and_unknown_frames() {
    let ep = spawn_server(RandomLegal::new(1));
    let mut c = connect(&ep).unwrap();
    match c.request_move("not a fen") {
        Err(PolicyError::Remote { code, .. }) => assert_eq!(code, "fen"),
        other => panic!("{other:?}"),
    }
    // Remote errors do not poison the connection.
    assert!(c.request_move(&format_fen(&Position::standard())).is_ok());
    match c.request_distribution(&format_fen(&Position::standard())) {
        Err(PolicyError::Remote { code, .. }) => assert_eq!(code, "unsupported"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reference_server_requires_hello_first() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let reader = BufReader::new(stream.try_clone().unwrap());
        let _ = serve(reader, stream, &mut RandomLegal::new(0));
    });
    let mut s = TcpStream::connect(addr).unwrap();
    let mut r = BufReader::new(s.try_clone().unwrap());
    let mut line = String::new();
    writeln!(s, "MOVE {}", format_fen(&Position::standard())).unwrap();
    r.read_line(&mut line).unwrap();
    assert!(line.starts_with("ERR handshake"), "{line}");
    line.clear();
    writeln!(s, "HELLO oodchess-policy 2").unwrap();
    r.read_line(&mut line).unwrap();
    assert!(line.starts_with("ERR version"), "{line}");
    line.clear();
    writeln!(s, "HELLO oodchess-policy 1").unwrap();
    r.read_line(&mut line).unwrap();
    assert_eq!(line.trim(), "OK 1 caps=");
    line.clear();
    writeln!(s, "PING").unwrap();
    r.read_line(&mut line).unwrap();
    assert!(line.starts_with("ERR frame"), "{line}");
}

#[test]
fn version_mismatch_is_rejected() {
    let ep = spawn_raw(|_| Some("OK 2 caps=dist".into()));
    assert!(matches!(connect(&ep), Err(PolicyError::VersionMismatch(v)) if v == "2"));
    let ep = spawn_raw(|_| Some("HI".into()));
    assert!(matches!(connect(&ep), Err(PolicyError::Malformed(_))));
}

#[test]
fn silence_times_out_and_poisons() {
    let ep = spawn_raw(|line| line.starts_with("HELLO").then(|| "OK 1 caps=".to_string()));
    let mut c = WirePolicy::connect(&ep, SHORT).unwrap();
    assert!(matches!(c.choose(&Position::standard()), Err(PolicyError::Timeout(_))));
    assert!(matches!(c.choose(&Position::standard()), Err(PolicyError::Poisoned)));
}

#[test]
fn malformed_replies_are_errors() {
    let ep = spawn_raw(|line| {
        Some(match line.split(' ').next().unwrap() {
            "HELLO" => "OK 1 caps=dist".into(),
            "DIST" => "DIST 0.0 0.0 0.0".into(),
            _ => "BEST".into(),
        })
    });
    let mut c = connect(&ep).unwrap();
    let fen = format_fen(&Position::standard());
    assert!(matches!(c.request_distribution(&fen), Err(PolicyError::BadLength(3))));
    assert!(matches!(c.request_move(&fen), Err(PolicyError::Malformed(_))));

    let ep = spawn_raw(|line| {
        Some(if line.starts_with("HELLO") { "OK 1 caps=dist".into() } else { format!("DIST {}", vec!["x"; 1968].join(" ")) })
    });
    let mut c = connect(&ep).unwrap();
    assert!(matches!(c.request_distribution(&fen), Err(PolicyError::Malformed(_))));
}

#[test]
fn closed_connection_is_reported() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut out = stream.try_clone().unwrap();
        let mut r = BufReader::new(stream);
        let mut line = String::new();
        r.read_line(&mut line).unwrap();
        writeln!(out, "OK 1 caps=").unwrap();
        // hang up without answering anything else
    });
    let mut c = connect(&PolicyEndpoint::Tcp(addr.to_string())).unwrap();
    let err = c.choose(&Position::standard()).unwrap_err();
    assert!(matches!(err, PolicyError::Closed | PolicyError::Transport(_)), "{err:?}");
    assert!(matches!(c.choose(&Position::standard()), Err(PolicyError::Poisoned)));
}

#[test]
fn endpoints_parse() {
    assert_eq!("tcp://127.0.0.1:9000".parse::<PolicyEndpoint>().unwrap(), PolicyEndpoint::Tcp("127.0.0.1:9000".into()));
    assert_eq!(
        "stdio:python3 -m toy_policy".parse::<PolicyEndpoint>().unwrap(),
        PolicyEndpoint::Command(vec!["python3".into(), "-m".into(), "toy_policy".into()])
    );
    for bad in ["tcp://nohost", "stdio:", "http://x:1", ""] {
        assert!(bad.parse::<PolicyEndpoint>().is_err(), "{bad}");
    }
    let ep: PolicyEndpoint = "stdio:a b".parse().unwrap();
    assert_eq!(ep.to_string(), "stdio:a b");
}

#[test]
fn stdio_child_process_speaks_the_protocol() {
    // A tiny shell server: always answers e2e4.
    let script = r#"while read verb rest; do case "$verb" in HELLO) echo "OK 1 caps=";; MOVE) echo "BEST e2e4";; QUIT) exit 0;; *) echo "ERR frame unknown";; esac; done"#;
    let ep = PolicyEndpoint::Command(vec!["sh".into(), "-c".into(), script.into()]);
    let mut c = connect(&ep).unwrap();
    assert_eq!(c.choose(&Position::standard()).unwrap().text, "e2e4");
}

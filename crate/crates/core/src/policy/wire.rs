//! Policy wire protocol, version 1.
//!
//! Newline-framed ASCII over TCP or a child process's stdio:
//!
//! ```text
//! > HELLO oodchess-policy 1        < OK 1 caps=dist
//! > MOVE <fen>                     < BEST <uci>
//! > DIST <fen>                     < DIST <1968 log-probs>
//! any request may be answered by   < ERR <code> <message>
//! > QUIT
//! ```
//!
//! The client lives here; [`serve`] is a reference server that exposes any
//! in-process [`Policy`], used by the conformance tests.

use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use log::{trace, warn};

use super::{Policy, PolicyDistribution, PolicyError, PolicyVerdict};
use crate::kernel::Position;
use crate::notation::actions::ACTION_COUNT;
use crate::notation::fen::{format_fen, parse_fen_any};

pub const HELLO: &str = "HELLO oodchess-policy 1";
pub const VERSION: &str = "1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Where an out-of-process policy lives: `tcp://host:port` or
/// `stdio:<program> [args…]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyEndpoint {
    Tcp(String),
    Command(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("policy endpoint must look like tcp://host:port or stdio:<command>, got {0:?}")]
pub struct BadEndpoint(pub String);

impl FromStr for PolicyEndpoint {
    type Err = BadEndpoint;

    fn from_str(s: &str) -> Result<PolicyEndpoint, BadEndpoint> {
        if let Some(addr) = s.strip_prefix("tcp://") {
            if addr.contains(':') {
                return Ok(PolicyEndpoint::Tcp(addr.to_string()));
            }
        } else if let Some(cmd) = s.strip_prefix("stdio:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if !argv.is_empty() {
                return Ok(PolicyEndpoint::Command(argv));
            }
        }
        Err(BadEndpoint(s.to_string()))
    }
}

impl fmt::Display for PolicyEndpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyEndpoint::Tcp(addr) => write!(f, "tcp://{addr}"),
            PolicyEndpoint::Command(argv) => write!(f, "stdio:{}", argv.join(" ")),
        }
    }
}

/// Client end of one policy connection.
pub struct WirePolicy {
    name: String,
    writer: Box<dyn Write + Send>,
    lines: Receiver<String>,
    child: Option<Child>,
    caps: Vec<String>,
    timeout: Duration,
    poisoned: bool,
}

impl WirePolicy {
    pub fn connect(endpoint: &PolicyEndpoint, timeout: Duration) -> Result<WirePolicy, PolicyError> {
        match endpoint {
            PolicyEndpoint::Tcp(addr) => {
                let stream = TcpStream::connect(addr)?;
                let reader = stream.try_clone()?;
                WirePolicy::over(endpoint.to_string(), reader, stream, None, timeout)
            }
            PolicyEndpoint::Command(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                WirePolicy::over(endpoint.to_string(), stdout, stdin, Some(child), timeout)
            }
        }
    }

    /// Runs the handshake over an arbitrary byte stream pair.
    pub fn over(
        name: String,
        reader: impl Read + Send + 'static,
        writer: impl Write + Send + 'static,
        child: Option<Child>,
        timeout: Duration,
    ) -> Result<WirePolicy, PolicyError> {
        let (tx, rx) = mpsc::channel();
        thread::Builder::new().name("policy-reader".into()).spawn(move || {
            for line in BufReader::new(reader).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        })?;
        let mut policy =
            WirePolicy { name, writer: Box::new(writer), lines: rx, child, caps: Vec::new(), timeout, poisoned: false };
        policy.handshake()?;
        Ok(policy)
    }

    fn handshake(&mut self) -> Result<(), PolicyError> {
        let reply = self.request(HELLO)?;
        let mut tokens = reply.split_whitespace();
        match tokens.next() {
            Some("OK") => {}
            _ => return Err(self.fail(PolicyError::Malformed(reply))),
        }
        match tokens.next() {
            Some(VERSION) => {}
            Some(v) => return Err(self.fail(PolicyError::VersionMismatch(v.to_string()))),
            None => return Err(self.fail(PolicyError::Malformed(reply))),
        }
        for tok in tokens {
            if let Some(list) = tok.strip_prefix("caps=") {
                self.caps = list.split(',').filter(|c| !c.is_empty()).map(str::to_string).collect();
            }
        }
        Ok(())
    }

    /// Capabilities announced in the handshake.
    pub fn caps(&self) -> &[String] {
        &self.caps
    }

    /// `MOVE`: the policy's move text, verbatim.
    pub fn request_move(&mut self, fen: &str) -> Result<String, PolicyError> {
        let reply = self.request(&format!("MOVE {fen}"))?;
        match reply.strip_prefix("BEST ").map(str::trim) {
            Some(text) if !text.is_empty() && !text.contains(char::is_whitespace) => Ok(text.to_string()),
            _ => Err(PolicyError::Malformed(reply)),
        }
    }

    /// `DIST`: the full log-probability vector.
    pub fn request_distribution(&mut self, fen: &str) -> Result<PolicyDistribution, PolicyError> {
        let reply = self.request(&format!("DIST {fen}"))?;
        let Some(body) = reply.strip_prefix("DIST ") else {
            return Err(PolicyError::Malformed(reply));
        };
        let values: Result<Vec<f64>, _> = body.split_whitespace().map(f64::from_str).collect();
        let values = values.map_err(|_| PolicyError::Malformed(truncate(&reply)))?;
        if values.len() != ACTION_COUNT {
            return Err(PolicyError::BadLength(values.len()));
        }
        PolicyDistribution::from_logits(values)
    }

    fn request(&mut self, frame: &str) -> Result<String, PolicyError> {
        if self.poisoned {
            return Err(PolicyError::Poisoned);
        }
        trace!("policy> {frame}");
        if let Err(e) = writeln!(self.writer, "{frame}").and_then(|_| self.writer.flush()) {
            return Err(self.fail(e.into()));
        }
        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => return Err(self.fail(PolicyError::Timeout(self.timeout))),
            Err(RecvTimeoutError::Disconnected) => return Err(self.fail(PolicyError::Closed)),
        };
        trace!("policy< {}", truncate(&reply));
        if let Some(rest) = reply.strip_prefix("ERR") {
            let mut parts = rest.trim().splitn(2, ' ');
            let code = parts.next().unwrap_or("").to_string();
            let message = parts.next().unwrap_or("").to_string();
            return Err(PolicyError::Remote { code, message });
        }
        Ok(reply)
    }

    fn fail(&mut self, e: PolicyError) -> PolicyError {
        warn!("policy {} failed: {e}; poisoning connection", self.name);
        self.poisoned = true;
        e
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(80).collect()
}

impl Policy for WirePolicy {
    fn name(&self) -> &str {
        &self.name
    }

    /// Distribution-capable servers are asked for the full vector and the
    /// move is its argmax; move-only servers are asked for a move.
    fn choose(&mut self, pos: &Position) -> Result<PolicyVerdict, PolicyError> {
        let fen = format_fen(pos);
        if self.supports_distribution() {
            Ok(PolicyVerdict::from_distribution(self.request_distribution(&fen)?))
        } else {
            Ok(PolicyVerdict::text(self.request_move(&fen)?))
        }
    }

    fn supports_distribution(&self) -> bool {
        self.caps.iter().any(|c| c == "dist")
    }

    fn distribution(&mut self, pos: &Position) -> Result<PolicyDistribution, PolicyError> {
        if !self.supports_distribution() {
            return Err(PolicyError::Unsupported(self.name.clone()));
        }
        self.request_distribution(&format_fen(pos))
    }
}

impl Drop for WirePolicy {
    fn drop(&mut self) {
        if !self.poisoned {
            let _ = writeln!(self.writer, "QUIT").and_then(|_| self.writer.flush());
        }
        if let Some(child) = &mut self.child {
            for _ in 0..50 {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Serves `policy` on one connection until `QUIT` or end of input.
pub fn serve(reader: impl BufRead, mut writer: impl Write, policy: &mut dyn Policy) -> io::Result<()> {
    let mut greeted = false;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end();
        let (verb, arg) = line.split_once(' ').unwrap_or((line, ""));
        let reply = match verb {
            "QUIT" => return Ok(()),
            "HELLO" if arg == "oodchess-policy 1" => {
                greeted = true;
                let caps = if policy.supports_distribution() { "dist" } else { "" };
                format!("OK 1 caps={caps}")
            }
            "HELLO" => "ERR version only protocol version 1 is supported".to_string(),
            _ if !greeted => "ERR handshake expected HELLO first".to_string(),
            "MOVE" => match parse_fen_any(arg) {
                Ok(pos) => match policy.choose(&pos) {
                    Ok(v) => format!("BEST {}", v.text),
                    Err(e) => format!("ERR policy {e}"),
                },
                Err(e) => format!("ERR fen {e}"),
            },
            "DIST" => match parse_fen_any(arg) {
                Ok(pos) => match policy.distribution(&pos) {
                    Ok(d) => {
                        let mut s = String::from("DIST");
                        for lp in d.log_probs() {
                            s.push(' ');
                            s.push_str(&lp.to_string());
                        }
                        s
                    }
                    Err(PolicyError::Unsupported(_)) => "ERR unsupported this policy has no distribution".to_string(),
                    Err(e) => format!("ERR policy {e}"),
                },
                Err(e) => format!("ERR fen {e}"),
            },
            _ => format!("ERR frame unknown request {verb:?}"),
        };
        writeln!(writer, "{reply}")?;
        writer.flush()?;
    }
    Ok(())
}

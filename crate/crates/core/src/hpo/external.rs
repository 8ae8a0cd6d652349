//! Client for external evaluators speaking line-delimited JSON over the
//! child's stdin/stdout.
//!
//! ```text
//! -> {"op":"info"}            <- {"dim":d,"lower":[..],"upper":[..],"name":".."}
//! -> {"op":"eval","x":[..]}   <- {"y":v}
//! -> {"op":"quit"}
//! ```
//!
//! One request is in flight per process. A timed-out or broken handle is
//! poisoned and its process killed; later calls fail with `BrokenChannel`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use crate::problem::{BoxDomain, EvalError, Problem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExternalError {
    #[error("failed to start evaluator: {0}")]
    Spawn(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("evaluator channel closed: {0}")]
    BrokenChannel(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorInfo {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub name: String,
}

struct Channel {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    poisoned: bool,
}

impl Channel {
    fn request(&mut self, msg: &Value, timeout: Duration) -> Result<Value, ExternalError> {
        if self.poisoned {
            return Err(ExternalError::BrokenChannel("handle poisoned by an earlier failure".into()));
        }
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| ExternalError::BrokenChannel("stdin closed".into()))?;
        let sent = writeln!(stdin, "{msg}").and_then(|_| stdin.flush());
        if let Err(e) = sent {
            self.poison();
            return Err(ExternalError::BrokenChannel(e.to_string()));
        }
        match self.lines.recv_timeout(timeout) {
            Ok(line) => serde_json::from_str(&line).map_err(|e| {
                ExternalError::Protocol(format!("malformed response {line:?}: {e}"))
            }),
            Err(RecvTimeoutError::Timeout) => {
                self.poison();
                Err(ExternalError::Timeout(timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.poison();
                Err(ExternalError::BrokenChannel("evaluator exited".into()))
            }
        }
    }

    fn poison(&mut self) {
        self.poisoned = true;
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Handle on a running evaluator process with a completed handshake.
pub struct ExternalEvaluator {
    id: String,
    info: EvaluatorInfo,
    domain: BoxDomain,
    timeout: Duration,
    channel: Mutex<Channel>,
}

impl std::fmt::Debug for ExternalEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalEvaluator")
            .field("id", &self.id)
            .field("info", &self.info)
            .finish()
    }
}

impl ExternalEvaluator {
    /// Starts `command[0]` with the remaining arguments and performs the
    /// `info` handshake.
    pub fn spawn(id: &str, command: &[String], timeout: Duration) -> Result<Self, ExternalError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| ExternalError::Spawn("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ExternalError::Spawn(format!("{program}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut channel = Channel {
            child,
            stdin,
            lines: rx,
            poisoned: false,
        };
        let resp = channel.request(&json!({"op": "info"}), timeout)?;
        let info = parse_info(&resp)?;
        let domain = BoxDomain::new(info.lower.clone(), info.upper.clone())
            .map_err(|e| ExternalError::Protocol(format!("invalid box: {e}")))?;
        Ok(Self {
            id: id.to_owned(),
            info,
            domain,
            timeout,
            channel: Mutex::new(channel),
        })
    }

    pub fn info(&self) -> &EvaluatorInfo {
        &self.info
    }

    pub fn evaluate(&self, z: &[f64], timeout: Duration) -> Result<f64, ExternalError> {
        if z.len() != self.info.dim {
            return Err(ExternalError::Protocol(format!(
                "point has {} coordinates, evaluator expects {}",
                z.len(),
                self.info.dim
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(ExternalError::Protocol("non-finite coordinate".into()));
        }
        let mut ch = self.channel.lock().unwrap_or_else(|e| e.into_inner());
        let resp = ch.request(&json!({"op": "eval", "x": z}), timeout)?;
        if let Some(msg) = resp.get("error") {
            return Err(ExternalError::Protocol(format!("evaluator error: {msg}")));
        }
        resp.get("y")
            .and_then(Value::as_f64)
            .ok_or_else(|| ExternalError::Protocol(format!("response lacks numeric \"y\": {resp}")))
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        let ch = self.channel.get_mut().unwrap_or_else(|e| e.into_inner());
        if !ch.poisoned {
            if let Some(stdin) = ch.stdin.as_mut() {
                let _ = writeln!(stdin, "{}", json!({"op": "quit"}));
                let _ = stdin.flush();
            }
            ch.stdin = None;
            // give the evaluator a moment to exit on its own
            for _ in 0..50 {
                if matches!(ch.child.try_wait(), Ok(Some(_))) {
                    return;
                }
                thread::sleep(Duration::from_millis(10));
            }
        }
        let _ = ch.child.kill();
        let _ = ch.child.wait();
    }
}

pub fn evaluate_external(
    endpoint: &ExternalEvaluator,
    z: &[f64],
    timeout: Duration,
) -> Result<f64, ExternalError> {
    endpoint.evaluate(z, timeout)
}

fn parse_info(v: &Value) -> Result<EvaluatorInfo, ExternalError> {
    let bad = |what: &str| ExternalError::Protocol(format!("info response {what}: {v}"));
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("lacks dim"))? as usize;
    let vec_of = |key: &str| -> Result<Vec<f64>, ExternalError> {
        v.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| bad(&format!("lacks {key}")))?
            .iter()
            .map(|e| e.as_f64().ok_or_else(|| bad(&format!("has non-numeric {key}"))))
            .collect()
    };
    let lower = vec_of("lower")?;
    let upper = vec_of("upper")?;
    if lower.len() != dim || upper.len() != dim {
        return Err(bad("has bounds inconsistent with dim"));
    }
    let name = v
        .get("name")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_owned();
    Ok(EvaluatorInfo {
        dim,
        lower,
        upper,
        name,
    })
}

impl Problem for ExternalEvaluator {
    fn id(&self) -> &str {
        &self.id
    }

    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        ExternalEvaluator::evaluate(self, x, self.timeout).map_err(|e| EvalError::External(e.to_string()))
    }
}

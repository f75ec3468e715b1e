//! Adapter for an externally served opponent model, over HTTP or a child
//! process speaking line-delimited JSON.

use super::{reject_reason, OpponentFault, OpponentPolicy};
use crate::plan::AtomicAction;
use crate::scenario::Scenario;
use crate::sim::{GlobalState, SeedInfo};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "transport", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdapterEndpoint {
    /// Base URL; requests go to `{url}/decide`.
    Http { url: String },
    /// Program exchanging one request line for one response line.
    Stdio {
        command: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecideRequest {
    pub tick: u64,
    pub history: Vec<GlobalState>,
    pub scenario_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecideResponse {
    pub actions: Vec<AtomicAction>,
}

struct ChildProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for ChildProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

enum Transport {
    Http(ureq::Agent),
    Stdio(Option<ChildProcess>),
}

pub struct ExternalPolicy {
    endpoint: AdapterEndpoint,
    timeout: Duration,
    history_tail: usize,
    transport: Transport,
    faults: Vec<String>,
    scenario_digest: Option<String>,
}

impl ExternalPolicy {
    pub fn new(endpoint: AdapterEndpoint, timeout_ms: u64, history_tail: usize) -> Self {
        let timeout = Duration::from_millis(timeout_ms);
        let transport = match &endpoint {
            AdapterEndpoint::Http { .. } => {
                let config = ureq::Agent::config_builder()
                    .timeout_global(Some(timeout))
                    .http_status_as_error(false)
                    .build();
                Transport::Http(ureq::Agent::new_with_config(config))
            }
            AdapterEndpoint::Stdio { .. } => Transport::Stdio(None),
        };
        ExternalPolicy {
            endpoint,
            timeout,
            history_tail: history_tail.max(1),
            transport,
            faults: Vec::new(),
            scenario_digest: None,
        }
    }

    fn timeout_fault(&self) -> OpponentFault {
        OpponentFault::Timeout(self.timeout.as_millis() as u64)
    }

    fn exchange(&mut self, body: &str) -> Result<String, OpponentFault> {
        let timeout = self.timeout;
        let timeout_fault = self.timeout_fault();
        match (&mut self.transport, &self.endpoint) {
            (Transport::Http(agent), AdapterEndpoint::Http { url }) => {
                let target = format!("{}/decide", url.trim_end_matches('/'));
                let result = agent
                    .post(&target)
                    .header("content-type", "application/json")
                    .send(body);
                let mut response = match result {
                    Ok(r) => r,
                    Err(ureq::Error::Timeout(_)) => return Err(timeout_fault),
                    Err(ureq::Error::Io(e)) if e.kind() == std::io::ErrorKind::TimedOut => {
                        return Err(timeout_fault)
                    }
                    Err(e) => return Err(OpponentFault::ProtocolError(e.to_string())),
                };
                if response.status() != 200 {
                    return Err(OpponentFault::ProtocolError(format!(
                        "HTTP status {}",
                        response.status().as_u16()
                    )));
                }
                response.body_mut().read_to_string().map_err(|e| match e {
                    ureq::Error::Timeout(_) => timeout_fault,
                    other => OpponentFault::ProtocolError(other.to_string()),
                })
            }
            (Transport::Stdio(slot), AdapterEndpoint::Stdio { command, args }) => {
                if slot.is_none() {
                    *slot = Some(spawn(command, args)?);
                }
                let proc = slot.as_mut().expect("spawned above");
                writeln!(proc.stdin, "{body}")
                    .and_then(|_| proc.stdin.flush())
                    .map_err(|e| OpponentFault::ProtocolError(format!("write to adapter: {e}")))?;
                match proc.lines.recv_timeout(timeout) {
                    Ok(Ok(line)) => Ok(line),
                    Ok(Err(e)) => Err(OpponentFault::ProtocolError(format!(
                        "read from adapter: {e}"
                    ))),
                    Err(RecvTimeoutError::Timeout) => Err(timeout_fault),
                    Err(RecvTimeoutError::Disconnected) => Err(OpponentFault::ProtocolError(
                        "adapter closed its output".into(),
                    )),
                }
            }
            _ => unreachable!("transport matches endpoint by construction"),
        }
    }
}

fn spawn(command: &str, args: &[String]) -> Result<ChildProcess, OpponentFault> {
    let mut child = Command::new(command)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| OpponentFault::ProtocolError(format!("cannot start {command}: {e}")))?;
    let stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    Ok(ChildProcess {
        child,
        stdin,
        lines: rx,
    })
}

/// Parse a response body. A body that is not an object with an `actions`
/// array is a schema error; individual malformed or inapplicable actions are
/// dropped and reported in the second return value.
pub(crate) fn parse_response(
    body: &str,
    state: &GlobalState,
) -> Result<(Vec<AtomicAction>, Vec<String>), OpponentFault> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| OpponentFault::SchemaError(format!("response is not JSON: {e}")))?;
    let items = value
        .get("actions")
        .and_then(|a| a.as_array())
        .ok_or_else(|| {
            OpponentFault::SchemaError("response must be an object with an `actions` array".into())
        })?;
    let mut actions = Vec::new();
    let mut dropped = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match serde_json::from_value::<AtomicAction>(item.clone()) {
            Err(e) => dropped.push(format!("tick {}: action {i} dropped: {e}", state.tick)),
            Ok(a) => match reject_reason(&a, state) {
                Some(why) => {
                    dropped.push(format!("tick {}: action {i} dropped: {why}", state.tick))
                }
                None => actions.push(a),
            },
        }
    }
    Ok((actions, dropped))
}

impl OpponentPolicy for ExternalPolicy {
    fn name(&self) -> &str {
        "external"
    }

    fn reset(&mut self, _seed: SeedInfo) {
        self.faults.clear();
        self.scenario_digest = None;
    }

    fn decide(
        &mut self,
        history: &[GlobalState],
        scenario: &Scenario,
    ) -> Result<Vec<AtomicAction>, OpponentFault> {
        let Some(state) = history.last() else {
            return Ok(Vec::new());
        };
        let digest = self
            .scenario_digest
            .get_or_insert_with(|| scenario.digest())
            .clone();
        let tail = &history[history.len().saturating_sub(self.history_tail)..];
        let request = DecideRequest {
            tick: state.tick,
            history: tail.to_vec(),
            scenario_digest: digest,
        };
        let body = serde_json::to_string(&request)
            .map_err(|e| OpponentFault::ProtocolError(e.to_string()))?;
        let reply = self.exchange(&body)?;
        let (actions, dropped) = parse_response(&reply, state)?;
        for d in &dropped {
            tracing::warn!(target: "opponent", "{d}");
        }
        self.faults.extend(dropped);
        Ok(actions)
    }

    fn drain_faults(&mut self) -> Vec<String> {
        std::mem::take(&mut self.faults)
    }
}

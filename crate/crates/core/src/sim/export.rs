//! Line-delimited event logs and trajectory tables.

use super::event::Event;
use super::rollout::RolloutRecord;
use crate::canonical;
use crate::scenario::{parse_json, ScenarioError};
use std::fmt::Write;

/// One canonical JSON object per line, each terminated by `\n`.
pub fn event_log_jsonl(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&canonical::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}

/// SHA-256 (hex) of the canonical event log bytes.
pub fn log_hash(events: &[Event]) -> String {
    canonical::sha256_hex(event_log_jsonl(events).as_bytes())
}

pub fn parse_event_log(text: &str) -> Result<Vec<Event>, ScenarioError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_json::<Event>(l).map_err(|e| match e {
                ScenarioError::Parse { path, message } => ScenarioError::Parse {
                    path: format!("line {}: {path}", i + 1),
                    message,
                },
                ScenarioError::Schema { path, message } => ScenarioError::Schema {
                    path: format!("line {}: {path}", i + 1),
                    message,
                },
                other => other,
            })
        })
        .collect()
}

/// `tick,entity_id,x,y,health,suppressed` for every entity at every tick.
pub fn trajectory_csv(record: &RolloutRecord) -> String {
    let mut out = String::from("tick,entity_id,x,y,health,suppressed\n");
    for tick in 0..=record.end_tick as usize {
        for track in &record.tracks {
            let p = track.positions[tick];
            let _ = writeln!(
                out,
                "{tick},{},{},{},{},{}",
                track.entity_id,
                p.x,
                p.y,
                track.health[tick],
                u8::from(track.suppressed[tick])
            );
        }
    }
    out
}

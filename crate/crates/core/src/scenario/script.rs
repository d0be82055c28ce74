//! The line-oriented scenario language.
//!
//! ```text
//! # comment
//! at <tick> set-env <mode> <criterion> <value>
//! ramp <t0> <t1> <mode> <criterion> <v0> <v1>
//! at <tick> set-priority <criterion> <mean>
//! at <tick> reset-habits
//! at <tick> set-flags biases=<on|off> habits=<on|off>
//! run-until <tick>
//! ```
//!
//! A command "at t" is applied when the clock reads `t`, i.e. just before the
//! frame for tick `t + 1` is computed.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::engine::Mutation;
use crate::model::{Criterion, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Command {
    At { tick: u64, mutation: Mutation },
    Ramp {
        from: u64,
        to: u64,
        mode: Mode,
        criterion: Criterion,
        start: f64,
        end: f64,
    },
    RunUntil { tick: u64 },
}

impl Command {
    /// The tick used for ordering checks.
    pub fn tick(&self) -> u64 {
        match *self {
            Command::At { tick, .. } | Command::RunUntil { tick } => tick,
            Command::Ramp { from, .. } => from,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub commands: Vec<Command>,
}

impl ScenarioScript {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        parse_scenario(text)
    }

    /// Final tick: the last `run-until`, or else the latest tick any command
    /// touches.
    pub fn end_tick(&self) -> u64 {
        let last_run = self.commands.iter().rev().find_map(|c| match c {
            Command::RunUntil { tick } => Some(*tick),
            _ => None,
        });
        last_run.unwrap_or_else(|| {
            self.commands
                .iter()
                .map(|c| match *c {
                    Command::Ramp { to, .. } => to,
                    other => other.tick(),
                })
                .max()
                .unwrap_or(0)
        })
    }
}

impl fmt::Display for ScenarioScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let on = |b: bool| if b { "on" } else { "off" };
        for c in &self.commands {
            match *c {
                Command::At { tick, mutation } => match mutation {
                    Mutation::SetEnv { mode, criterion, value } => {
                        writeln!(f, "at {tick} set-env {mode} {criterion} {value}")?
                    }
                    Mutation::SetPriority { criterion, target_mean } => {
                        writeln!(f, "at {tick} set-priority {criterion} {target_mean}")?
                    }
                    Mutation::ResetHabits => writeln!(f, "at {tick} reset-habits")?,
                    Mutation::SetFlags { biases, habits } => {
                        writeln!(f, "at {tick} set-flags biases={} habits={}", on(biases), on(habits))?
                    }
                },
                Command::Ramp { from, to, mode, criterion, start, end } => {
                    writeln!(f, "ramp {from} {to} {mode} {criterion} {start} {end}")?
                }
                Command::RunUntil { tick } => writeln!(f, "run-until {tick}")?,
            }
        }
        Ok(())
    }
}

struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
    end_col: usize,
}

impl<'a> Line<'a> {
    fn new(number: usize, raw: &'a str) -> Self {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in content.char_indices() {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    tokens.push((s + 1, &content[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &content[s..]));
        }
        Line { number, tokens, end_col: content.trim_end().len() + 1 }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Parse { line: self.number, column, message: message.into() }
    }

    fn token(&self, i: usize, what: &str) -> Result<(usize, &'a str), ScenarioError> {
        self.tokens
            .get(i)
            .copied()
            .ok_or_else(|| self.err(self.end_col, format!("expected {what}")))
    }

    fn tick(&self, i: usize) -> Result<u64, ScenarioError> {
        let (col, t) = self.token(i, "tick")?;
        t.parse().map_err(|_| self.err(col, format!("invalid tick {t:?}")))
    }

    fn mode(&self, i: usize) -> Result<Mode, ScenarioError> {
        let (col, t) = self.token(i, "mode")?;
        t.parse().map_err(|_| self.err(col, format!("unknown mode {t:?}")))
    }

    fn criterion(&self, i: usize) -> Result<Criterion, ScenarioError> {
        let (col, t) = self.token(i, "criterion")?;
        t.parse().map_err(|_| self.err(col, format!("unknown criterion {t:?}")))
    }

    fn score(&self, i: usize) -> Result<f64, ScenarioError> {
        let (col, t) = self.token(i, "value")?;
        let v: f64 = t.parse().map_err(|_| self.err(col, format!("invalid number {t:?}")))?;
        if !(0.0..=10.0).contains(&v) {
            return Err(self.err(col, format!("value {v} out of range [0, 10]")));
        }
        Ok(v)
    }

    fn switch(&self, i: usize, key: &str) -> Result<bool, ScenarioError> {
        let (col, t) = self.token(i, key)?;
        match t.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
            Some("on") => Ok(true),
            Some("off") => Ok(false),
            _ => Err(self.err(col, format!("expected {key}=on|off, got {t:?}"))),
        }
    }

    fn finish(&self, n: usize) -> Result<(), ScenarioError> {
        match self.tokens.get(n) {
            Some((col, t)) => Err(self.err(*col, format!("unexpected {t:?}"))),
            None => Ok(()),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioScript, ScenarioError> {
    let mut commands = Vec::new();
    let mut last_tick = 0u64;
    for (idx, raw) in text.lines().enumerate() {
        let line = Line::new(idx + 1, raw);
        let Some(&(col, head)) = line.tokens.first() else {
            continue;
        };
        let (cmd, used) = match head {
            "at" => {
                let tick = line.tick(1)?;
                let (vcol, verb) = line.token(2, "command")?;
                match verb {
                    "set-env" => {
                        let mutation = Mutation::SetEnv {
                            mode: line.mode(3)?,
                            criterion: line.criterion(4)?,
                            value: line.score(5)?,
                        };
                        (Command::At { tick, mutation }, 6)
                    }
                    "set-priority" => {
                        let mutation = Mutation::SetPriority {
                            criterion: line.criterion(3)?,
                            target_mean: line.score(4)?,
                        };
                        (Command::At { tick, mutation }, 5)
                    }
                    "reset-habits" => (Command::At { tick, mutation: Mutation::ResetHabits }, 3),
                    "set-flags" => {
                        let mutation = Mutation::SetFlags {
                            biases: line.switch(3, "biases")?,
                            habits: line.switch(4, "habits")?,
                        };
                        (Command::At { tick, mutation }, 5)
                    }
                    other => return Err(line.err(vcol, format!("unknown command {other:?}"))),
                }
            }
            "ramp" => {
                let from = line.tick(1)?;
                let to = line.tick(2)?;
                if to <= from {
                    return Err(line.err(line.tokens[2].0, format!("ramp end {to} must exceed start {from}")));
                }
                let cmd = Command::Ramp {
                    from,
                    to,
                    mode: line.mode(3)?,
                    criterion: line.criterion(4)?,
                    start: line.score(5)?,
                    end: line.score(6)?,
                };
                (cmd, 7)
            }
            "run-until" => (Command::RunUntil { tick: line.tick(1)? }, 2),
            other => return Err(line.err(col, format!("unknown command {other:?}"))),
        };
        line.finish(used)?;
        if cmd.tick() < last_tick {
            return Err(line.err(
                line.tokens[1].0,
                format!("tick {} precedes earlier tick {last_tick}", cmd.tick()),
            ));
        }
        last_tick = cmd.tick();
        commands.push(cmd);
    }
    Ok(ScenarioScript { commands })
}

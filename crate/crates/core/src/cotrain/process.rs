//! Predictors running as child processes that speak line-delimited JSON.
//!
//! Requests and responses are single JSON objects, one per line:
//!
//! ```text
//! -> {"op": "train", "iteration": 1, "dataset": [{"question": "...", "answers": ["..."]}]}
//! <- {"ok": true}
//! -> {"op": "predict", "id": "q1", "question": "...", "prefix": "..."}
//! <- {"id": "q1", "answers": ["..."]}
//! ```

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LabeledQuestion, Predictor, PredictorError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainItem {
    pub question: String,
    pub answers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum WireRequest {
    Train { iteration: usize, dataset: Vec<TrainItem> },
    Predict { id: String, question: String, prefix: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainResponse {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub id: String,
    pub answers: Vec<String>,
}

/// Program and arguments used to launch one predictor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
}

impl PredictorCommand {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { program: program.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

pub struct ProcessPredictor {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ProcessPredictor {
    pub fn spawn(command: &PredictorCommand, timeout: Duration) -> Result<Self, PredictorError> {
        let mut child = Command::new(&command.program)
            .args(&command.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().ok_or(PredictorError::Exited)?;
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines, timeout })
    }

    fn exchange(&mut self, request: &WireRequest) -> Result<String, PredictorError> {
        let stdin = self.stdin.as_mut().ok_or(PredictorError::Exited)?;
        let mut line = serde_json::to_string(request).map_err(|e| PredictorError::Protocol(e.to_string()))?;
        line.push('\n');
        stdin.write_all(line.as_bytes())?;
        stdin.flush()?;
        loop {
            match self.lines.recv_timeout(self.timeout) {
                Ok(Ok(line)) if line.trim().is_empty() => continue,
                Ok(Ok(line)) => return Ok(line),
                Ok(Err(e)) => return Err(e.into()),
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    return Err(PredictorError::Timeout(self.timeout));
                }
                Err(RecvTimeoutError::Disconnected) => return Err(PredictorError::Exited),
            }
        }
    }
}

fn decode<'a, T: Deserialize<'a>>(line: &'a str) -> Result<T, PredictorError> {
    serde_json::from_str(line).map_err(|e| PredictorError::Protocol(format!("{e}: {line}")))
}

impl Predictor for ProcessPredictor {
    fn train(&mut self, iteration: usize, dataset: &[LabeledQuestion]) -> Result<(), PredictorError> {
        let request = WireRequest::Train {
            iteration,
            dataset: dataset
                .iter()
                .map(|q| TrainItem { question: q.question.clone(), answers: q.answers.clone() })
                .collect(),
        };
        let response: TrainResponse = decode(&self.exchange(&request)?)?;
        if response.ok {
            Ok(())
        } else {
            Err(PredictorError::Protocol(format!(
                "training failed: {}",
                response.error.as_deref().unwrap_or("no reason given")
            )))
        }
    }

    fn predict(&mut self, id: &str, question: &str, prefix: Option<&str>) -> Result<Vec<String>, PredictorError> {
        let request = WireRequest::Predict {
            id: id.to_owned(),
            question: question.to_owned(),
            prefix: prefix.map(str::to_owned),
        };
        let response: PredictResponse = decode(&self.exchange(&request)?)?;
        if response.id != id {
            return Err(PredictorError::Protocol(format!("response id `{}` does not match request `{id}`", response.id)));
        }
        Ok(response.answers)
    }
}

impl Drop for ProcessPredictor {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved predictor exit on its own.
        drop(self.stdin.take());
        if matches!(self.child.try_wait(), Ok(None)) {
            thread::sleep(Duration::from_millis(20));
            if matches!(self.child.try_wait(), Ok(None)) {
                let _ = self.child.kill();
            }
        }
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        let req = WireRequest::Predict { id: "q1".into(), question: "who?".into(), prefix: None };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"op":"predict","id":"q1","question":"who?","prefix":null}"#
        );
        let req = WireRequest::Train {
            iteration: 2,
            dataset: vec![TrainItem { question: "q".into(), answers: vec!["a".into()] }],
        };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"op":"train","iteration":2,"dataset":[{"question":"q","answers":["a"]}]}"#
        );
        let back: WireRequest = serde_json::from_str(r#"{"op":"predict","id":"x","question":"q","prefix":"a"}"#).unwrap();
        assert!(matches!(back, WireRequest::Predict { prefix: Some(p), .. } if p == "a"));
    }

    fn sh(script: &str) -> PredictorCommand {
        PredictorCommand::new("sh", ["-c", script])
    }

    #[test]
    fn protocol_violation_is_reported() {
        let mut p = ProcessPredictor::spawn(&sh("read line; echo not-json"), Duration::from_secs(5)).unwrap();
        assert!(matches!(p.train(1, &[]), Err(PredictorError::Protocol(_))));
    }

    #[test]
    fn mismatched_id_is_reported() {
        let mut p = ProcessPredictor::spawn(&sh(r#"read line; echo '{"id":"other","answers":[]}'"#), Duration::from_secs(5)).unwrap();
        let err = p.predict("q1", "q", None).unwrap_err();
        assert!(err.to_string().contains("other"), "{err}");
    }

    #[test]
    fn timeout_and_exit() {
        let mut p = ProcessPredictor::spawn(&sh("sleep 5"), Duration::from_millis(100)).unwrap();
        assert!(matches!(p.predict("q", "q", None), Err(PredictorError::Timeout(_))));
        let mut p = ProcessPredictor::spawn(&sh("exit 0"), Duration::from_secs(5)).unwrap();
        assert!(p.predict("q", "q", None).is_err());
    }

    #[test]
    fn scripted_round_trip() {
        let script = r#"read a; echo '{"ok": true}'; read b; echo '{"id": "q1", "answers": ["x", "y"]}'"#;
        let mut p = ProcessPredictor::spawn(&sh(script), Duration::from_secs(5)).unwrap();
        p.train(1, &[]).unwrap();
        assert_eq!(p.predict("q1", "q", Some("x")).unwrap(), ["x", "y"]);
    }
}

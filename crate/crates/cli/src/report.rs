use irga_core::{Error, ErrorClass};
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Found,
    NotFound,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass | Outcome::Found => 0,
            Outcome::Fail | Outcome::NotFound => 1,
        }
    }

    pub fn check(ok: bool) -> Outcome {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outcome: Outcome,
    pub payload: Value,
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub summary: String,
}

impl RunReport {
    pub fn new(command: &str, inputs: &impl Serialize, outcome: Outcome, payload: Value, summary: String) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: serde_json::to_value(inputs).expect("inputs serialize"),
            outcome,
            payload,
            wall_time_ms: 0.0,
            summary,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Usage => 2,
            ErrorClass::Parse => 3,
            ErrorClass::Numeric => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

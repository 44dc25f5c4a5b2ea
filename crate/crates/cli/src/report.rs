use std::time::{Duration, Instant};

use serde_json::{Map, Number, Value};

/// Rounds every non-integer number to 12 significant digits so reports stay
/// byte-stable across platforms.
pub fn round_numbers(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            if let Some(r) = format!("{x:.11e}")
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(fields) => fields.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// `cost / optimum`, `null` when the optimum is zero and the cost is not.
pub fn ratio(cost: f64, optimum: f64) -> Value {
    if optimum > 0.0 {
        Value::from(cost / optimum)
    } else if cost == 0.0 {
        Value::from(1.0)
    } else {
        Value::Null
    }
}

/// Named wall-clock phases, in milliseconds.
#[derive(Default)]
pub struct Timings(Vec<(&'static str, Duration)>);

impl Timings {
    pub fn time<T>(&mut self, phase: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push((phase, start.elapsed()));
        out
    }

    pub fn to_json(&self) -> Value {
        let fields: Map<String, Value> = self
            .0
            .iter()
            .map(|(name, d)| (name.to_string(), Value::from(d.as_secs_f64() * 1e3)))
            .collect();
        Value::Object(fields)
    }
}

pub struct Report {
    pub problem: &'static str,
    pub parameters: Value,
    pub result: Value,
    pub counts: Value,
    pub timings: Timings,
}

impl Report {
    pub fn to_json(&self, with_timings: bool) -> Value {
        let mut out = Map::new();
        out.insert("problem".into(), Value::from(self.problem));
        out.insert("parameters".into(), self.parameters.clone());
        out.insert("result".into(), self.result.clone());
        out.insert("counts".into(), self.counts.clone());
        if with_timings {
            out.insert("timings_ms".into(), self.timings.to_json());
        }
        let mut out = Value::Object(out);
        round_numbers(&mut out);
        out
    }
}

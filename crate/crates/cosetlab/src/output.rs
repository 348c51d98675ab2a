//! Result formatting: JSON with floats cut to 12 significant digits, a fixed
//! CSV layout for game results, and short text summaries.

use std::fmt::Write as _;

use cosetlab_core::games::GameResult;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(f) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round12(x))) {
                *n = f;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub const GAME_CSV_HEADER: &str = "game,strategy,trials,successes,estimate,exact,seed,queries";

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn game_csv(results: &[GameResult]) -> String {
    let mut s = String::from(GAME_CSV_HEADER);
    s.push('\n');
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.game,
            r.strategy,
            r.trials,
            r.successes,
            round12(r.estimate),
            opt(r.exact.map(round12)),
            r.seed,
            opt(r.queries)
        );
    }
    s
}

pub fn game_text(r: &GameResult) -> String {
    let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let mut s = format!(
        "{} [{}] strategy={} trials={} successes={} estimate={}",
        r.game,
        params.join(" "),
        r.strategy,
        r.trials,
        r.successes,
        round12(r.estimate)
    );
    if let Some(e) = r.exact {
        let sigma = cosetlab_core::games::sigma(e, r.trials);
        let _ = write!(s, " exact={}", round12(e));
        if sigma > 0.0 {
            let _ = write!(s, " deviation={}σ", round12((r.estimate - e) / sigma));
        }
    }
    if let Some(q) = r.queries {
        let _ = write!(s, " queries={q}");
    }
    let _ = write!(s, " seed={}", r.seed);
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(13.0 / 24.0), 0.541666666667);
        assert_eq!(round12(0.0), 0.0);
        assert_eq!(to_json(&serde_json::json!({"x": 1.0 / 3.0})).unwrap(), "{\n  \"x\": 0.333333333333\n}\n");
    }
}

//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes the key-value config text and returns JSON, so the page
//! needs no bindings beyond strings.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use uwsn::harness::{parse_config, Experiment};
use uwsn::selection::{compromise, knee_point, FrontPoint};

/// Settings small enough to stay interactive in a browser tab.
pub const DEMO_CONFIG: &str = "\
filter.particles = 1000
nsga.population = 60
nsga.generations = 60
run.steps = 20
run.trials = 1
data.kind = quantized
data.bits = 5
select.metric = miub
select.rule = compromise
";

#[wasm_bindgen]
pub fn demo_config() -> String {
    DEMO_CONFIG.to_string()
}

fn experiment(config: &str) -> Result<Experiment, String> {
    let c = parse_config(config).map_err(|e| e.to_string())?;
    Experiment::new(c).map_err(|e| e.to_string())
}

fn sensors(exp: &Experiment) -> Value {
    exp.scene()
        .field
        .sensors
        .iter()
        .map(|s| json!({"id": s.id, "x": s.x, "y": s.y, "p_s": s.sensing_prob}))
        .collect()
}

fn point(p: &FrontPoint) -> Value {
    json!({"f1": p.f1, "f2": p.f2, "count": p.mask.count(), "mask": p.mask.to_hex()})
}

/// Pareto front of trial 0 at `step`, with the knee and compromise picks.
pub fn front_json(config: &str, step: usize) -> Result<Value, String> {
    let exp = experiment(config)?;
    let seed = exp.trial_seed(0);
    let snap = exp.snapshot(seed, step).map_err(|e| e.to_string())?;
    let mut rng = uwsn::rng::derived(seed, &[uwsn::rng::stream::OPTIMIZER, step as u64 - 1]);
    let front = match snap.decision.front {
        Some(f) => f,
        None => exp.pareto_front(&snap.table, &mut rng).map_err(|e| e.to_string())?,
    };
    let knee = knee_point(&front).map_err(|e| e.to_string())?;
    let comp = compromise(&front).map_err(|e| e.to_string())?;
    let index = |p: &FrontPoint| front.iter().position(|q| q == p);
    Ok(json!({
        "points": front.iter().map(point).collect::<Vec<_>>(),
        "knee": index(&knee),
        "compromise": index(&comp),
        "truth": [snap.truth.x, snap.truth.y],
    }))
}

/// Per-sensor information of trial 0 at `step`.
pub fn metrics_json(config: &str, step: usize) -> Result<Value, String> {
    let exp = experiment(config)?;
    let snap = exp.snapshot(exp.trial_seed(0), step).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = exp
        .sensor_metrics(&snap)
        .iter()
        .map(|r| json!({"id": r.sensor_id, "dist": r.dist, "p_s": r.p_s, "fi_gain": r.fi_logdet_gain, "mi_bits": r.mi_bits}))
        .collect();
    Ok(json!({"sensors": sensors(&exp), "metrics": rows, "truth": [snap.truth.x, snap.truth.y]}))
}

/// One tracking trial: truth, estimate, and selected sensors per step.
pub fn track_json(config: &str, seed: u64) -> Result<Value, String> {
    let exp = experiment(config)?;
    let trial = exp.run_trial(exp.trial_seed(seed as usize)).map_err(|e| e.to_string())?;
    let steps: Vec<Value> = trial
        .steps
        .iter()
        .map(|s| {
            json!({
                "truth": [s.truth.x, s.truth.y],
                "estimate": [s.estimate.x, s.estimate.y],
                "selected": s.selected_ids,
                "sensed": s.sensed,
                "sq_error": s.estimate.position_sq_error(&s.truth),
            })
        })
        .collect();
    Ok(json!({"sensors": sensors(&exp), "steps": steps}))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn pareto_front(config: &str, step: usize) -> Result<String, JsValue> {
    to_js(front_json(config, step))
}

#[wasm_bindgen]
pub fn sensor_metrics(config: &str, step: usize) -> Result<String, JsValue> {
    to_js(metrics_json(config, step))
}

#[wasm_bindgen]
pub fn track(config: &str, seed: u64) -> Result<String, JsValue> {
    to_js(track_json(config, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAST: &str = "filter.particles = 200\nnsga.population = 20\nnsga.generations = 10\nrun.steps = 4\n";

    #[test]
    fn front_has_anchors_and_picks() {
        let v = front_json(FAST, 2).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert!(pts.len() >= 2);
        assert_eq!(pts[0]["count"], 0);
        assert!(v["knee"].as_u64().unwrap() > 0);
        assert!(v["compromise"].is_u64());
    }

    #[test]
    fn metrics_cover_every_sensor() {
        let v = metrics_json(FAST, 1).unwrap();
        assert_eq!(v["metrics"].as_array().unwrap().len(), 36);
        assert_eq!(v["sensors"].as_array().unwrap().len(), 36);
    }

    #[test]
    fn track_is_reproducible() {
        let a = track_json(FAST, 3).unwrap();
        assert_eq!(a, track_json(FAST, 3).unwrap());
        assert_eq!(a["steps"].as_array().unwrap().len(), 4);
        assert!(front_json("bogus", 1).is_err());
    }

    #[test]
    fn demo_config_parses() {
        assert!(parse_config(DEMO_CONFIG).is_ok());
    }
}

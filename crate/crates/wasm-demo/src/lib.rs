//! Browser bindings: every export takes and returns strings so the page needs
//! no glue beyond the generated module. The `*_impl` functions hold the logic
//! and are what the native tests call.

use pgscout::bench::{
    desk_spec, gen_synthetic, run_cell, social_example, sweep, GroundTruth, NoiseProfile,
};
use pgscout::dataio::{parse_jsonl_str, to_jsonl_string};
use pgscout::lsh::LshMethod;
use pgscout::model::PropertyGraph;
use pgscout::pipeline::{discover, DiscoveryConfig};
use pgscout::serialize::{emit_pg_schema, schema_to_json, SchemaMode};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const NOISE_LEVELS: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

type Res<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn config(method: &str, seed: u64) -> Res<DiscoveryConfig> {
    Ok(DiscoveryConfig {
        method: method.parse::<LshMethod>().map_err(err)?,
        seed,
        ..Default::default()
    })
}

fn parse_graph(jsonl: &str) -> Res<PropertyGraph> {
    parse_jsonl_str(jsonl).map_err(err)
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Res<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("cannot parse `{s}`")))
        .collect()
}

pub fn sample_graph_impl(preset: &str, nodes: usize, edges: usize, seed: u64) -> Res<String> {
    let graph = match preset {
        "social" => social_example(),
        "desk" => gen_synthetic(&desk_spec(nodes, edges), seed).map_err(err)?,
        other => return Err(format!("unknown preset `{other}`")),
    };
    Ok(to_jsonl_string(&graph))
}

pub fn discover_impl(jsonl: &str, method: &str, postprocess: bool, seed: u64) -> Res<String> {
    let graph = parse_graph(jsonl)?;
    let cfg = DiscoveryConfig {
        postprocess,
        ..config(method, seed)?
    };
    let d = discover(&graph, &cfg).map_err(err)?;
    let strict = if postprocess {
        Some(emit_pg_schema(&d.schema, SchemaMode::Strict).map_err(err)?)
    } else {
        None
    };
    let schema: Value = serde_json::from_str(&schema_to_json(&d.schema)).map_err(err)?;
    Ok(json!({
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "loose": emit_pg_schema(&d.schema, SchemaMode::Loose).map_err(err)?,
        "strict": strict,
        "schema": schema,
        "seconds": d.timings.total(),
    })
    .to_string())
}

/// F1 per property-drop level at a fixed label availability. Ground truth is
/// the label keys of the input graph.
pub fn noise_curve_impl(
    jsonl: &str,
    method: &str,
    label_availability: f64,
    seed: u64,
) -> Res<String> {
    let graph = parse_graph(jsonl)?;
    let base = config(method, seed)?;
    let mut rows = Vec::new();
    for noise in NOISE_LEVELS {
        let profile = NoiseProfile {
            property_drop_pct: noise,
            label_availability,
            seed,
        };
        profile.validate().map_err(err)?;
        let row = run_cell("input", &graph, base.method, profile, &base);
        rows.push(json!({ "noise": noise, "nodeF1": row.node_f1, "edgeF1": row.edge_f1, "seconds": row.wall_seconds }));
    }
    Ok(Value::Array(rows).to_string())
}

pub fn sweep_impl(jsonl: &str, alphas: &str, tables: &str, seed: u64) -> Res<String> {
    let graph = parse_graph(jsonl)?;
    let rows = sweep(
        &graph,
        &GroundTruth::of(&graph),
        &parse_list::<f64>(alphas)?,
        &parse_list::<usize>(tables)?,
        &config("elsh", seed)?,
    )
    .map_err(err)?;
    serde_json::to_string(&rows).map_err(err)
}

fn js<T>(r: Res<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// JSONL text of a built-in graph: `social` or `desk`.
#[wasm_bindgen(js_name = sampleGraph)]
pub fn sample_graph(preset: &str, nodes: u32, edges: u32, seed: u32) -> Result<String, JsError> {
    js(sample_graph_impl(
        preset,
        nodes as usize,
        edges as usize,
        u64::from(seed),
    ))
}

#[wasm_bindgen(js_name = discoverSchema)]
pub fn discover_schema(
    jsonl: &str,
    method: &str,
    postprocess: bool,
    seed: u32,
) -> Result<String, JsError> {
    js(discover_impl(jsonl, method, postprocess, u64::from(seed)))
}

#[wasm_bindgen(js_name = noiseCurve)]
pub fn noise_curve(
    jsonl: &str,
    method: &str,
    label_availability: f64,
    seed: u32,
) -> Result<String, JsError> {
    js(noise_curve_impl(
        jsonl,
        method,
        label_availability,
        u64::from(seed),
    ))
}

#[wasm_bindgen(js_name = sweepGrid)]
pub fn sweep_grid(jsonl: &str, alphas: &str, tables: &str, seed: u32) -> Result<String, JsError> {
    js(sweep_impl(jsonl, alphas, tables, u64::from(seed)))
}

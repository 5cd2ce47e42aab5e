use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use super::metrics::{majority_f1, F1Report};
use super::noise::{inject_noise, GroundTruth, NoiseProfile};
use crate::error::{Error, Result};
use crate::lsh::LshMethod;
use crate::model::PropertyGraph;
use crate::pipeline::{discover, Discovery, DiscoveryConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub nodes: F1Report,
    pub edges: F1Report,
}

pub fn evaluate(discovery: &Discovery, truth: &GroundTruth) -> Result<Evaluation> {
    Ok(Evaluation {
        nodes: majority_f1(&discovery.schema.node_assignment, &truth.nodes)?,
        edges: majority_f1(&discovery.schema.edge_assignment, &truth.edges)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub dataset: String,
    pub method: LshMethod,
    pub noise_pct: f64,
    pub label_avail: f64,
    pub seed: u64,
    pub node_f1: f64,
    pub edge_f1: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub methods: Vec<LshMethod>,
    pub noise: Vec<f64>,
    pub label_availability: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for BenchGrid {
    fn default() -> Self {
        BenchGrid {
            methods: vec![LshMethod::Elsh, LshMethod::Minhash],
            noise: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            label_availability: vec![0.0, 0.5, 1.0],
            seeds: vec![42],
        }
    }
}

/// Noise, discovery and scoring for one grid cell. Failures yield NaN scores.
pub fn run_cell(
    dataset: &str,
    graph: &PropertyGraph,
    method: LshMethod,
    profile: NoiseProfile,
    base: &DiscoveryConfig,
) -> BenchRow {
    let start = Instant::now();
    let scored = (|| {
        let (noisy, truth) = inject_noise(graph, &profile)?;
        let config = DiscoveryConfig {
            method,
            seed: profile.seed,
            ..base.clone()
        };
        evaluate(&discover(&noisy, &config)?, &truth)
    })();
    let (node_f1, edge_f1) = match scored {
        Ok(e) => (e.nodes.f1, e.edges.f1),
        Err(e) => {
            log::error!("{dataset}/{method}/{profile:?}: {e}");
            (f64::NAN, f64::NAN)
        }
    };
    BenchRow {
        dataset: dataset.to_string(),
        method,
        noise_pct: profile.property_drop_pct,
        label_avail: profile.label_availability,
        seed: profile.seed,
        node_f1,
        edge_f1,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Rows come back in grid order: dataset, method, seed, noise, availability.
pub fn run_benchmark(
    datasets: &[(String, PropertyGraph)],
    grid: &BenchGrid,
    base: &DiscoveryConfig,
) -> Vec<BenchRow> {
    let mut cells = Vec::new();
    for (di, _) in datasets.iter().enumerate() {
        for &m in &grid.methods {
            for &seed in &grid.seeds {
                for &noise in &grid.noise {
                    for &avail in &grid.label_availability {
                        cells.push((
                            di,
                            m,
                            NoiseProfile {
                                property_drop_pct: noise,
                                label_availability: avail,
                                seed,
                            },
                        ));
                    }
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(di, m, p)| run_cell(&datasets[di].0, &datasets[di].1, m, p, base))
        .collect()
}

pub fn bench_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 in, utf-8 out"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    /// `None` marks the adaptive row.
    pub alpha: Option<f64>,
    pub tables: Option<usize>,
    pub node_f1: f64,
    pub edge_f1: f64,
    pub node_types: usize,
    pub edge_types: usize,
}

/// ELSH F1 over the `alphas × tables` grid, followed by one adaptive row.
pub fn sweep(
    graph: &PropertyGraph,
    truth: &GroundTruth,
    alphas: &[f64],
    tables: &[usize],
    base: &DiscoveryConfig,
) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() || tables.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep grid must have at least one alpha and one table count".into(),
        ));
    }
    let mut cells: Vec<(Option<f64>, Option<usize>)> = Vec::new();
    for &a in alphas {
        for &t in tables {
            cells.push((Some(a), Some(t)));
        }
    }
    cells.push((None, None));
    cells
        .into_par_iter()
        .map(|(alpha, t)| {
            let config = DiscoveryConfig {
                method: LshMethod::Elsh,
                adaptive: true,
                alpha,
                tables: t,
                bucket_length: None,
                ..base.clone()
            };
            let d = discover(graph, &config)?;
            let e = evaluate(&d, truth)?;
            Ok(SweepRow {
                alpha,
                tables: t,
                node_f1: e.nodes.f1,
                edge_f1: e.edges.f1,
                node_types: d.schema.node_types.len(),
                edge_types: d.schema.edge_types.len(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "alpha",
        "tables",
        "nodeF1",
        "edgeF1",
        "nodeTypes",
        "edgeTypes",
    ])?;
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "adaptive".to_string());
        w.write_record([
            opt(r.alpha.map(|a| a.to_string())),
            opt(r.tables.map(|t| t.to_string())),
            r.node_f1.to_string(),
            r.edge_f1.to_string(),
            r.node_types.to_string(),
            r.edge_types.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 in, utf-8 out"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synth::social_example;

    #[test]
    fn benchmark_grid_order_and_header() {
        let grid = BenchGrid {
            methods: vec![LshMethod::Elsh],
            noise: vec![0.0, 0.2],
            label_availability: vec![0.0, 1.0],
            seeds: vec![1],
        };
        let rows = run_benchmark(
            &[("soc".into(), social_example())],
            &grid,
            &DiscoveryConfig::default(),
        );
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[1].noise_pct, rows[1].label_avail), (0.0, 1.0));
        // alice (no label) joins Person: Person 0.8, unlabeled 0, three exact types
        assert!((rows[1].node_f1 - 3.8 / 5.0).abs() < 1e-12);
        assert_eq!(rows[1].edge_f1, 1.0);
        let csv = bench_csv(&rows).unwrap();
        assert!(
            csv.starts_with("dataset,method,noisePct,labelAvail,seed,nodeF1,edgeF1,wallSeconds\n")
        );
        assert!(csv.contains("soc,elsh,"));
    }

    #[test]
    fn sweep_appends_adaptive_row() {
        let g = social_example();
        let rows = sweep(
            &g,
            &GroundTruth::of(&g),
            &[0.8, 1.5],
            &[1, 4],
            &DiscoveryConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[4].alpha, None);
        assert!(sweep(
            &g,
            &GroundTruth::of(&g),
            &[],
            &[1],
            &DiscoveryConfig::default()
        )
        .is_err());
        assert!(sweep_csv(&rows)
            .unwrap()
            .lines()
            .last()
            .unwrap()
            .starts_with("adaptive,adaptive,"));
    }
}

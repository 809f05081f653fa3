use gfb_core::cartan::{equivariance_residual, horizontality_check, is_cartan_form};
use gfb_core::curvature::{bianchi_residual, einstein_panel, NESTED_STEP};
use gfb_core::flow::{flow, integrate_path_action, isotropy_scan, orbit_type_compare, AlgebraPath};
use gfb_core::klein::{build_catalog_entry, catalog_info, CatalogEntry};
use gfb_core::{CurvaturePanel, GfbError, IsotropyFinding, OrbitTypeOrdering};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::report::{envelope, Csv, Outputs};

/// Result of a command: the JSON report, extra files, and whether it counts as a pass.
pub struct Outcome {
    pub report: Value,
    pub outputs: Outputs,
    pub pass: bool,
}

fn entry(cfg: &RunConfig) -> CliResult<CatalogEntry> {
    build_catalog_entry(&cfg.example, &cfg.params).map_err(|e| match e {
        GfbError::UnknownId(_) | GfbError::InvalidParameter { .. } => CliError::Config(e.to_string()),
        other => other.into(),
    })
}

fn coord_names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

fn seeded_points(e: &CatalogEntry, seed: u64, count: usize, margin: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| e.field.domain().sample(&mut rng, margin)).collect()
}

pub fn catalog(id: Option<&str>) -> CliResult<Value> {
    match id {
        None => Ok(serde_json::to_value(catalog_info())?),
        Some(id) => {
            let e = build_catalog_entry(id, &Value::Null).map_err(|e| CliError::Config(e.to_string()))?;
            let mut v = serde_json::to_value(e.info())?;
            v["algebra_labels"] = json!(e.field.algebra().labels());
            Ok(v)
        }
    }
}

#[derive(Serialize)]
struct EquivarianceSummary {
    points: usize,
    max_horizontality: f64,
    max_equivariance: f64,
    max_gap: f64,
}

pub fn validate(cfg: &RunConfig, raw: &str) -> CliResult<Outcome> {
    let e = entry(cfg)?;
    let tol = cfg.validate_tol();
    let rep = is_cartan_form(&e.field, cfg.validate.samples, tol, cfg.seed, cfg.h);

    let equivariance = if cfg.validate.equivariance_points > 0 {
        let m = e.field.model().m();
        let eps = cfg.validate.flow_eps;
        let margin = 10.0 * cfg.h + eps;
        let points = seeded_points(&e, cfg.seed.wrapping_add(1), cfg.validate.equivariance_points, margin);
        let rows: Vec<(f64, f64)> = points
            .par_iter()
            .map(|p| -> CliResult<(f64, f64)> {
                let mut worst = (0.0_f64, 0.0_f64);
                for i in 0..m {
                    let mut xi = vec![0.0; m];
                    xi[i] = 1.0;
                    let hz = horizontality_check(&e.field, p, cfg.h, &xi)?;
                    let eq = equivariance_residual(&e.field, p, &xi, cfg.h, eps)?;
                    worst = (worst.0.max(hz), worst.1.max(eq));
                }
                Ok(worst)
            })
            .collect::<CliResult<_>>()?;
        Some(EquivarianceSummary {
            points: rows.len(),
            max_horizontality: rows.iter().map(|r| r.0).fold(0.0, f64::max),
            max_equivariance: rows.iter().map(|r| r.1).fold(0.0, f64::max),
            max_gap: rows.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max),
        })
    } else {
        None
    };

    let mut header = coord_names("x", e.field.dim());
    header.extend(rep.omega_stats.iter().map(|s| s.component.clone()));
    let mut csv = Csv::new(&header);
    for (p, om) in rep.points.iter().zip(&rep.omega_samples) {
        let mut row = p.clone();
        row.extend(om);
        csv.row(&row);
    }
    let mut outputs = Outputs::default();
    outputs.add("omega_samples.csv", csv.into_string());

    let pass = rep.pass;
    let tolerances = json!({ "tol": tol, "flow_eps": cfg.validate.flow_eps });
    let report = envelope(
        "validate",
        cfg,
        raw,
        tolerances,
        json!({ "cartan": rep, "equivariance": equivariance }),
    )?;
    Ok(Outcome { report, outputs, pass })
}

#[derive(Serialize)]
struct OrbitSummary {
    p0: Vec<f64>,
    period: Option<f64>,
    return_distance: Option<f64>,
    left_domain: Option<f64>,
    end: Vec<f64>,
}

#[derive(Serialize)]
struct PathSummary {
    p0: Vec<f64>,
    endpoint: Vec<f64>,
    left_domain: Option<f64>,
}

pub fn flow_cmd(cfg: &RunConfig, raw: &str) -> CliResult<Outcome> {
    let e = entry(cfg)?;
    let m = e.field.model().m();
    let dim = e.field.dim();
    let xi = cfg.flow.xi.clone().unwrap_or_else(|| {
        let mut v = vec![0.0; m];
        if m > 0 {
            v[0] = 1.0;
        }
        v
    });
    let traces = cfg
        .flow
        .points
        .par_iter()
        .map(|p| flow(&e.field, &xi, p, cfg.flow.t, cfg.flow.steps).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;

    let mut outputs = Outputs::default();
    let mut orbits = Vec::new();
    for (k, (p, tr)) in cfg.flow.points.iter().zip(&traces).enumerate() {
        let mut header = vec!["t".to_string()];
        header.extend(coord_names("x", dim));
        let mut csv = Csv::new(&header);
        for (t, x) in tr.times.iter().zip(&tr.points) {
            let mut row = vec![*t];
            row.extend(x);
            csv.row(&row);
        }
        outputs.add(format!("orbit_{k}.csv"), csv.into_string());
        // the trace's own closure uses the default tolerance; redo it with the configured one
        let closure = gfb_core::flow::detect_closure(tr, cfg.flow.closure_tol);
        orbits.push(OrbitSummary {
            p0: p.clone(),
            period: closure,
            return_distance: closure.map(|t| e.field.domain().distance(&tr.interpolate(t).0, p)),
            left_domain: tr.left_domain,
            end: e.field.domain().wrap(tr.end()),
        });
    }
    let base = orbits.first().and_then(|o| o.period);
    let ratios: Vec<Option<f64>> = orbits.iter().map(|o| base.zip(o.period).map(|(b, t)| t / b)).collect();

    let mut paths = Vec::new();
    for pc in &cfg.flow.paths {
        let path = AlgebraPath::piecewise(pc.segments.clone())?;
        let summary = match integrate_path_action(&e.field, &pc.p0, &path, pc.steps) {
            Ok(end) => PathSummary {
                p0: pc.p0.clone(),
                endpoint: e.field.domain().wrap(&end),
                left_domain: None,
            },
            Err(GfbError::LeftDomain { time, point }) => PathSummary {
                p0: pc.p0.clone(),
                endpoint: point,
                left_domain: Some(time),
            },
            Err(other) => return Err(other.into()),
        };
        paths.push(summary);
    }

    let tolerances = json!({ "closure_tol": cfg.flow.closure_tol });
    let result = json!({
        "xi": xi,
        "T": cfg.flow.t,
        "steps": cfg.flow.steps,
        "orbits": orbits,
        "period_ratios": ratios,
        "paths": paths,
    });
    let report = envelope("flow", cfg, raw, tolerances, result)?;
    Ok(Outcome {
        report,
        outputs,
        pass: true,
    })
}

#[derive(Serialize)]
struct PanelRow {
    panel: CurvaturePanel,
    bianchi: Option<f64>,
}

pub fn curvature(cfg: &RunConfig, raw: &str) -> CliResult<Outcome> {
    let e = entry(cfg)?;
    let eta = match &cfg.curvature.eta {
        Some(rows) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(CliError::Config("curvature.eta must be square".into()));
            }
            DMatrix::from_fn(n, n, |i, j| rows[i][j])
        }
        None => e.eta.clone(),
    };
    let mut points = cfg.curvature.points.clone();
    points.extend(seeded_points(&e, cfg.seed, cfg.curvature.samples, 10.0 * NESTED_STEP));
    let rows = points
        .par_iter()
        .map(|p| -> CliResult<PanelRow> {
            let panel = einstein_panel(&e.field, p, cfg.h, &eta)?;
            let bianchi = if cfg.curvature.bianchi {
                Some(bianchi_residual(&e.field, p, NESTED_STEP)?)
            } else {
                None
            };
            Ok(PanelRow { panel, bianchi })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let labels = e.field.algebra().labels().to_vec();
    let (m, n) = (e.field.model().m(), e.field.model().n());
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|b| (b + 1..n).map(move |c| (b, c))).collect();
    let mut header = coord_names("x", e.field.dim());
    header.push("scal".into());
    header.extend(
        (0..m)
            .flat_map(|i| pairs.iter().map(move |&(b, c)| (i, b, c)))
            .map(|(i, b, c)| format!("omega_{}_{}{}", labels[i], b + 1, c + 1)),
    );
    header.extend(
        (0..n)
            .flat_map(|a| pairs.iter().map(move |&(b, c)| (a, b, c)))
            .map(|(a, b, c)| format!("theta_{}_{}{}", a + 1, b + 1, c + 1)),
    );
    header.extend((0..n).flat_map(|d| (0..n).map(move |c| format!("ric_{}{}", d + 1, c + 1))));
    header.extend((0..n).flat_map(|a| (0..n).map(move |b| format!("ein_{}{}", a + 1, b + 1))));
    if cfg.curvature.bianchi {
        header.push("bianchi".into());
    }
    let mut csv = Csv::new(&header);
    for row in &rows {
        let p = &row.panel;
        let mut r = p.point.clone();
        r.push(p.scal);
        r.extend((0..m).flat_map(|i| pairs.iter().map(move |&(b, c)| p.omega[i][b][c])));
        r.extend((0..n).flat_map(|a| pairs.iter().map(move |&(b, c)| p.theta[a][b][c])));
        r.extend(p.ric.iter().flatten());
        r.extend(p.ein.iter().flatten());
        if let Some(b) = row.bianchi {
            r.push(b);
        }
        csv.row(&r);
    }
    let mut outputs = Outputs::default();
    outputs.add("curvature.csv", csv.into_string());

    let tolerances = json!({ "metric_invariance": gfb_core::curvature::METRIC_TOL, "nested_step": NESTED_STEP });
    let report = envelope("curvature", cfg, raw, tolerances, json!({ "panels": rows }))?;
    Ok(Outcome {
        report,
        outputs,
        pass: true,
    })
}

#[derive(Serialize)]
struct IsotropySummary {
    findings: Vec<IsotropyFinding>,
    principal_fraction: f64,
    orbit_type_vs_first: Vec<OrbitTypeOrdering>,
}

pub fn isotropy(cfg: &RunConfig, raw: &str) -> CliResult<Outcome> {
    let e = entry(cfg)?;
    if !e.has_action() {
        return Err(CliError::Config(format!("{} has no global group action", e.id)));
    }
    let mut points = cfg.isotropy.points.clone();
    points.extend(seeded_points(&e, cfg.seed, cfg.isotropy.random_points, 0.0));
    let search = &cfg.isotropy.search;
    let findings = points
        .iter()
        .map(|p| isotropy_scan(&e, p, search).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    let trivial = findings.iter().filter(|f| f.is_trivial()).count();
    let principal_fraction = if findings.is_empty() {
        0.0
    } else {
        trivial as f64 / findings.len() as f64
    };
    let orbit_type_vs_first = match findings.first() {
        Some(first) => findings
            .iter()
            .map(|f| orbit_type_compare(f, first, search.tol.max(1e-6)))
            .collect(),
        None => Vec::new(),
    };
    let tolerances = json!({ "tol": search.tol, "cluster": search.cluster, "coarse": search.coarse });
    let summary = IsotropySummary {
        findings,
        principal_fraction,
        orbit_type_vs_first,
    };
    let report = envelope("isotropy", cfg, raw, tolerances, summary)?;
    Ok(Outcome {
        report,
        outputs: Outputs::default(),
        pass: true,
    })
}

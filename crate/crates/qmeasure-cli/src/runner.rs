//! Experiment execution: one function per experiment kind, each producing
//! an ordered result table plus kind-specific summary entries. A numerical
//! failure mid-sweep flushes the rows computed so far and reports the
//! error instead of discarding the run.

use num_complex::Complex64;
use rayon::prelude::*;

use qmeasure::approximant::{
    approximant, make_partition, rationalize, tradeoff_report, ContinuumProxy,
    RepresentativeRule,
};
use qmeasure::coleman_hepp::{eta_sweep, fit_exponential, reliability_probe, BandRule};
use qmeasure::linalg::{ComplexMatrix, HermitianOperator};
use qmeasure::random::{random_coupled, random_hermitian, seeded_rng};
use qmeasure::sewell::{
    collapse_check, ideality_report, infer_pointer_map, pointer_probabilities, CoupledModel,
    FTensor,
};

use crate::config::{ApproximantConfig, ChSweepConfig, ReliabilityConfig, SimulateConfig};
use crate::output::{Cell, SweepResult};

/// What a runner hands back to `main` for serialization.
pub struct RunOutcome {
    pub table: Option<SweepResult>,
    pub summary_extra: serde_json::Value,
    /// A numerical failure that ended the sweep early.
    pub error: Option<String>,
}

impl RunOutcome {
    fn ok(table: SweepResult, summary_extra: serde_json::Value) -> Self {
        Self {
            table: Some(table),
            summary_extra,
            error: None,
        }
    }
}

/// System observable used by the simulate diagnostics.
pub fn build_observable(levels: usize, which: &str) -> HermitianOperator {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let m = ComplexMatrix::from_fn(levels, |i, j| match which {
        "coherence" if i == j => zero,
        _ => one,
    });
    HermitianOperator::new(m).expect("observable construction")
}

pub fn run_simulate(cfg: &SimulateConfig, seed: u64) -> RunOutcome {
    let mut rng = seeded_rng(seed);
    let model = match random_coupled(cfg.levels, cfg.apparatus_dim, &mut rng) {
        Ok(m) => m,
        Err(e) => {
            return RunOutcome {
                table: None,
                summary_extra: serde_json::json!({}),
                error: Some(e.to_string()),
            }
        }
    };
    let observable = build_observable(cfg.levels, &cfg.observable);
    let nu = model.apparatus().macrostate_count();
    let n = cfg.levels;

    let mut columns = vec!["t".to_string()];
    columns.extend((0..nu).map(|a| format!("w_{a}")));
    columns.extend([
        "offdiag_max".to_string(),
        "diag_deficit".to_string(),
        "bijective".to_string(),
        "collapse_residual".to_string(),
        "projection_residual".to_string(),
        "born_residual".to_string(),
    ]);
    for r in 0..n {
        for s in 0..n {
            for a in 0..nu {
                columns.push(format!("f_{r}{s}{a}_re"));
                columns.push(format!("f_{r}{s}{a}_im"));
            }
        }
    }
    let mut table = SweepResult::new(columns);

    let computed: Vec<Result<Vec<Cell>, String>> = cfg
        .times
        .par_iter()
        .map(|&t| simulate_row(&model, &observable, t).map_err(|e| e.to_string()))
        .collect();

    let mut error = None;
    for item in computed {
        match item {
            Ok(row) => table.push_row(row),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    RunOutcome {
        table: Some(table),
        summary_extra: serde_json::json!({
            "levels": n,
            "apparatus_dim": cfg.apparatus_dim,
            "macrostates": nu,
            "observable": cfg.observable,
        }),
        error,
    }
}

fn simulate_row(
    model: &CoupledModel,
    observable: &HermitianOperator,
    t: f64,
) -> qmeasure::Result<Vec<Cell>> {
    let f = model.f_coefficients(t)?;
    let w = pointer_probabilities(model.system(), &f)?;
    let mut row = vec![Cell::Float(t)];
    row.extend(w.iter().map(|&x| Cell::Float(x)));

    // A tied pointer is reported, not fatal: the row simply carries no map.
    let map = infer_pointer_map(&f).ok();
    match &map {
        Some(map) => {
            let ideality = ideality_report(&f, map);
            row.push(Cell::Float(ideality.offdiag_max));
            row.push(Cell::Float(ideality.diag_deficit));
            row.push(Cell::Int(map.is_bijective() as i64));
            if map.is_bijective() {
                let report = collapse_check(model.system(), &f, observable, map)?;
                row.push(Cell::Float(report.collapse_residual));
                row.push(Cell::Float(report.projection_residual));
                row.push(Cell::Float(report.born_residual));
            } else {
                row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
            }
        }
        None => {
            row.extend([Cell::Empty, Cell::Empty, Cell::Int(0)]);
            row.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
        }
    }
    for r in 0..f.levels() {
        for s in 0..f.levels() {
            for a in 0..f.macrostate_count() {
                let v = f.get(r, s, a);
                row.push(Cell::Float(v.re));
                row.push(Cell::Float(v.im));
            }
        }
    }
    Ok(row)
}

/// Readout angle: the flipping level reaches per-site up-probability
/// `p_up` at time `t_star`.
pub fn flip_angle(p_up: f64, t_star: f64) -> f64 {
    2.0 * p_up.sqrt().asin() / t_star
}

pub fn run_ch_sweep(cfg: &ChSweepConfig) -> RunOutcome {
    let angles = [0.0, flip_angle(cfg.p_up, cfg.t_star)];
    let computed: Vec<Result<(usize, f64), String>> = cfg
        .n_sites
        .par_iter()
        .map(|&n| {
            eta_sweep(&[n], &angles, &BandRule::Majority, cfg.t_star)
                .map(|points| points[0])
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut table = SweepResult::new(vec!["n_sites".to_string(), "eta".to_string()]);
    let mut points = Vec::new();
    let mut error = None;
    for item in computed {
        match item {
            Ok((n, eta)) => {
                table.push_row(vec![Cell::Int(n as i64), Cell::Float(eta)]);
                points.push((n, eta));
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }

    let fit = if error.is_none() {
        fit_exponential(&points, 2)
    } else {
        Err(qmeasure::Error::InsufficientData {
            needed: 3,
            found: 0,
        })
    };
    let summary_extra = match &fit {
        Ok(fit) => serde_json::json!({
            "p_up": cfg.p_up,
            "t_star": cfg.t_star,
            "fit": {
                "c_hat": fit.c_hat,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "dropped_points": fit.dropped,
            },
        }),
        Err(e) => serde_json::json!({
            "p_up": cfg.p_up,
            "t_star": cfg.t_star,
            "fit": null,
            "fit_error": e.to_string(),
        }),
    };
    if error.is_none() {
        if let Err(e) = fit {
            error = Some(e.to_string());
        }
    }
    RunOutcome {
        table: Some(table),
        summary_extra,
        error,
    }
}

struct ReliabilityRow {
    sites: usize,
    bands: usize,
    target: usize,
    p: f64,
    misread: f64,
}

pub fn run_reliability(cfg: &ReliabilityConfig) -> RunOutcome {
    let computed: Vec<Result<ReliabilityRow, String>> = cfg
        .grid
        .par_iter()
        .map(|&[sites, bands]| {
            let target = cfg.target_band.unwrap_or(bands / 2);
            let p = (target as f64 + 0.5) / bands as f64;
            reliability_probe(sites, bands, target)
                .map(|misread| ReliabilityRow {
                    sites,
                    bands,
                    target,
                    p,
                    misread,
                })
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut table = SweepResult::new(
        ["n_sites", "bands", "target_band", "p_target", "misread"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let mut error = None;
    for item in computed {
        match item {
            Ok(row) => table.push_row(vec![
                Cell::Int(row.sites as i64),
                Cell::Int(row.bands as i64),
                Cell::Int(row.target as i64),
                Cell::Float(row.p),
                Cell::Float(row.misread),
            ]),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    RunOutcome {
        table: Some(table),
        summary_extra: serde_json::json!({}),
        error,
    }
}

/// Random hermitian proxy with spectrum rescaled into the given range,
/// leaving a small interior margin.
pub fn random_proxy(
    grid_dim: usize,
    a: f64,
    b: f64,
    seed: u64,
) -> qmeasure::Result<ContinuumProxy> {
    let mut rng = seeded_rng(seed);
    let h = random_hermitian(grid_dim, &mut rng);
    let vals = h.eigenvalues()?;
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    let margin = 0.02 * (b - a);
    let spread = if hi > lo { hi - lo } else { 1.0 };
    let scale = (b - a - 2.0 * margin) / spread;
    let mut m = h.matrix().scale(Complex64::new(scale, 0.0));
    let shift = a + margin - lo * scale;
    for i in 0..grid_dim {
        let cur = m.get(i, i);
        m.set(i, i, cur + Complex64::new(shift, 0.0));
    }
    ContinuumProxy::new(HermitianOperator::new(m)?, a, b)
}

pub fn run_approximant(cfg: &ApproximantConfig, seed: u64) -> RunOutcome {
    let inner = || -> qmeasure::Result<(SweepResult, serde_json::Value)> {
        let [a, b] = cfg.range;
        let proxy = random_proxy(cfg.grid_dim, a, b, seed)?;
        let rule = match cfg.rule.as_str() {
            "left" => RepresentativeRule::Left,
            "custom" => RepresentativeRule::Custom(
                cfg.custom_representatives.clone().unwrap_or_default(),
            ),
            _ => RepresentativeRule::Midpoint,
        };
        let partition = make_partition(a, b, cfg.epsilon, rule)?;
        let approx = approximant(&proxy, &partition)?;
        let instrument = rationalize(&partition, cfg.max_denominator)?;
        let op_error = (proxy.operator().matrix() - approx.matrix()).op_norm()?;
        let commutator = qmeasure::linalg::commutator_norm(proxy.operator(), &approx)?;
        let tradeoff = tradeoff_report((a, b), cfg.epsilon, cfg.apparatus_size)?;

        let mut table = SweepResult::new(
            ["bin", "lower", "upper", "representative", "readout", "readout_value"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        );
        for k in 0..partition.bin_count() {
            let (lo, hi) = partition.bin(k);
            let readout = instrument.readouts()[k];
            table.push_row(vec![
                Cell::Int(k as i64),
                Cell::Float(lo),
                Cell::Float(hi),
                Cell::Float(partition.representatives()[k]),
                Cell::Text(readout.to_string()),
                Cell::Float(readout.to_f64()),
            ]);
        }
        let readouts: Vec<String> = instrument
            .readouts()
            .iter()
            .map(|r| r.to_string())
            .collect();
        let summary = serde_json::json!({
            "grid_dim": cfg.grid_dim,
            "epsilon": cfg.epsilon,
            "bins": partition.bin_count(),
            "op_error": op_error,
            "op_error_bound": cfg.epsilon,
            "commutator_norm": commutator,
            "max_denominator": cfg.max_denominator,
            "readouts": readouts,
            "tradeoff": {
                "levels": tradeoff.levels,
                "reliable": tradeoff.reliable,
                "risk_exponent": tradeoff.risk_exponent,
            },
        });
        Ok((table, summary))
    };
    match inner() {
        Ok((table, summary_extra)) => RunOutcome::ok(table, summary_extra),
        Err(e) => RunOutcome {
            table: None,
            summary_extra: serde_json::json!({}),
            error: Some(e.to_string()),
        },
    }
}

/// Fault injection for verify self-tests: perturb a computed tensor so a
/// named condition must fail.
pub fn inject_fault(f: &FTensor, fault: &str) -> FTensor {
    let n = f.levels();
    let nu = f.macrostate_count();
    let mut values = f.values().to_vec();
    match fault {
        "sum-rule" => {
            values[0] += Complex64::new(0.1, 0.0);
        }
        "hermiticity" => {
            values[nu] += Complex64::new(0.2, 0.0); // F[0][1][0] only
        }
        "positivity" => {
            let bound = (f.get(0, 0, 0).re * f.get(1, 1, 0).re).sqrt();
            let bad = Complex64::new(bound + 0.5, 0.0);
            values[nu] = bad; // F[0][1][0]
            values[n * nu] = bad.conj(); // F[1][0][0]
        }
        _ => {}
    }
    FTensor::from_values_unchecked(f.time(), n, nu, values).expect("same shape")
}

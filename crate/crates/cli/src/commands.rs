use serde_json::{json, Value};

use regge_core::engine::expand;
use regge_core::renorm::{solve_scheme, Scheme, SchemeResult, SCHEME_ORDER};
use regge_core::table::{self, TableConfig, TableRow};

use crate::args::SchemeChoice;
use crate::config::RunConfig;
use crate::report::{Cell, JsonRow, Report};
use crate::Failure;

/// A report plus whatever went wrong while filling it.
pub struct Outcome {
    pub report: Report,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    energy: f64,
    n: u32,
    l_exact: Option<f64>,
}

fn points(cfg: &RunConfig) -> Result<Vec<Result<Point, Failure>>, Failure> {
    if cfg.energies.is_empty() && cfg.states.is_empty() {
        return Err(Failure::Validation("no energies: pass --E, --grid or --state".into()));
    }
    let n = cfg.n.unwrap_or(0);
    let mut out: Vec<Result<Point, Failure>> = cfg
        .energies
        .iter()
        .map(|&energy| Ok(Point { energy, n, l_exact: None }))
        .collect();
    let resolved = cfg.execution.map(&cfg.states, |s| {
        table::state_energy(&cfg.potential, cfg.mass, cfg.hbar, s.n, s.l, &cfg.oracle)
            .map(|energy| Point {
                energy,
                n: cfg.n.unwrap_or(s.n),
                l_exact: Some(s.l),
            })
            .map_err(Failure::from)
    });
    out.extend(resolved);
    Ok(out)
}

fn opt(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Num)
}

pub fn trajectory(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let mut columns = vec!["E".to_string(), "n".into()];
    let with_l = !cfg.states.is_empty();
    if with_l {
        columns.push("l_exact".into());
    }
    columns.extend((0..=cfg.order).map(|k| format!("alpha_{k}")));
    columns.push(format!("alpha^({})", cfg.order));
    let mut report = Report {
        columns,
        ..Report::default()
    };
    let mut failures = Vec::new();

    let results = cfg.execution.map(&points(cfg)?, |p| {
        let p = p.clone()?;
        let exp = expand(&cfg.potential, p.energy, cfg.mass, p.n, cfg.order)?;
        let value = exp.evaluate(cfg.hbar);
        Ok::<_, Failure>((p, exp.coeffs, value))
    });
    for r in results {
        match r {
            Ok((p, coeffs, value)) => {
                let mut row = vec![Cell::Num(p.energy), Cell::Int(p.n.into())];
                if with_l {
                    row.push(opt(p.l_exact));
                }
                row.extend(coeffs.iter().map(|&c| Cell::Num(c)));
                row.push(Cell::Num(value));
                let json = JsonRow {
                    energy: p.energy,
                    n: p.n,
                    l_exact: p.l_exact,
                    alpha_unren: Some(value),
                    coeffs: Some(coeffs),
                    ..JsonRow::default()
                };
                report.push(row, json);
            }
            Err(e) => failures.push(e),
        }
    }
    Ok(Outcome { report, failures })
}

fn schemes(choice: SchemeChoice) -> Vec<Option<Scheme>> {
    match choice {
        SchemeChoice::None => vec![None],
        SchemeChoice::Pms => vec![Some(Scheme::MinimalSensitivity)],
        SchemeChoice::Fc => vec![Some(Scheme::FastestConvergence)],
        SchemeChoice::Both => vec![
            Some(Scheme::MinimalSensitivity),
            Some(Scheme::FastestConvergence),
        ],
    }
}

pub fn renorm(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let mut report = Report::new(&[
        "E", "n", "scheme", "m1", "m2", "alpha", "res_1", "res_2", "l_exact", "error",
    ]);
    let mut failures = Vec::new();
    let chosen = schemes(cfg.scheme);

    let results = cfg.execution.map(&points(cfg)?, |p| {
        let p = p.clone()?;
        let unren = expand(&cfg.potential, p.energy, cfg.mass, p.n, SCHEME_ORDER)?.evaluate(cfg.hbar);
        let solved = chosen
            .iter()
            .map(|s| match s {
                Some(s) => solve_scheme(*s, &cfg.potential, p.energy, cfg.mass, p.n, &cfg.solver)
                    .map(Some)
                    .map_err(Failure::from),
                None => Ok(None),
            })
            .collect::<Vec<Result<Option<SchemeResult>, Failure>>>();
        Ok::<_, Failure>((p, unren, solved))
    });

    for r in results {
        let (p, unren, solved) = match r {
            Ok(x) => x,
            Err(e) => {
                failures.push(e);
                continue;
            }
        };
        for s in solved {
            let s = match s {
                Ok(s) => s,
                Err(e) => {
                    failures.push(e);
                    continue;
                }
            };
            let (name, m1, m2, alpha, residuals) = match &s {
                Some(s) => (s.scheme.short_name(), s.m1, s.m2, s.alpha_tilde, Some(s.residuals)),
                None => ("none", 0.0, 0.0, unren, None),
            };
            let row = vec![
                Cell::Num(p.energy),
                Cell::Int(p.n.into()),
                Cell::Text(name.into()),
                Cell::Num(m1),
                Cell::Num(m2),
                Cell::Num(alpha),
                opt(residuals.map(|r| r[0])),
                opt(residuals.map(|r| r[1])),
                opt(p.l_exact),
                opt(p.l_exact.map(|l| (alpha - l).abs())),
            ];
            let json = JsonRow {
                energy: p.energy,
                n: p.n,
                l_exact: p.l_exact,
                scheme: Some(name.into()),
                alpha_unren: Some(unren),
                alpha_pms: s
                    .as_ref()
                    .filter(|s| s.scheme == Scheme::MinimalSensitivity)
                    .map(|s| s.alpha_tilde),
                alpha_fc: s
                    .as_ref()
                    .filter(|s| s.scheme == Scheme::FastestConvergence)
                    .map(|s| s.alpha_tilde),
                m1: json!(m1),
                m2: json!(m2),
                residuals: residuals.map_or(Value::Null, |r| json!(r)),
                coeffs: None,
            };
            report.push(row, json);
        }
    }
    Ok(Outcome { report, failures })
}

fn table_json(r: &TableRow) -> JsonRow {
    JsonRow {
        energy: r.energy,
        n: r.n,
        l_exact: Some(r.l_exact),
        scheme: None,
        alpha_unren: Some(r.alpha_unren),
        alpha_pms: Some(r.pms.alpha_tilde),
        alpha_fc: Some(r.fc.alpha_tilde),
        m1: json!({ "pms": r.pms.m1, "fc": r.fc.m1 }),
        m2: json!({ "pms": r.pms.m2, "fc": r.fc.m2 }),
        residuals: json!({ "pms": r.pms.residuals, "fc": r.fc.residuals }),
        coeffs: None,
    }
}

fn competing_roots(s: &SchemeResult) -> String {
    let mut parts = vec![format!("({:.6}, {:.6}) -> {:.6}", s.m1, s.m2, s.alpha_tilde)];
    parts.extend(
        s.alternatives
            .iter()
            .map(|c| format!("({:.6}, {:.6}) -> {:.6}", c.m1, c.m2, c.alpha_tilde)),
    );
    parts.join(", ")
}

pub fn table1(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tcfg = TableConfig {
        oracle: cfg.oracle,
        solver: cfg.solver,
        execution: cfg.execution,
        ..TableConfig::default()
    };
    let mut report = Report::new(&[
        "n", "l_exact", "E", "unren", "pms", "fc", "err_unren", "err_pms", "err_fc",
    ]);
    let mut failures = Vec::new();
    for r in table::reproduce(cfg.rows, &tcfg) {
        let r = match r {
            Ok(r) => r,
            Err(e) => {
                failures.push(e.into());
                continue;
            }
        };
        if cfg.check {
            for v in table::violations(&r) {
                let roots = match v.column.as_str() {
                    "pms" => format!("; roots {}", competing_roots(&r.pms)),
                    "fc" => format!("; roots {}", competing_roots(&r.fc)),
                    _ => String::new(),
                };
                failures.push(Failure::Numerical(format!("tolerance violated: {v}{roots}")));
            }
        }
        let row = vec![
            Cell::Int(r.n.into()),
            Cell::Num(r.l_exact),
            Cell::Num(r.energy),
            Cell::Num(r.alpha_unren),
            Cell::Num(r.pms.alpha_tilde),
            Cell::Num(r.fc.alpha_tilde),
            Cell::Num(r.error_unren()),
            Cell::Num(r.error_pms()),
            Cell::Num(r.error_fc()),
        ];
        report.push(row, table_json(&r));
    }
    Ok(Outcome { report, failures })
}

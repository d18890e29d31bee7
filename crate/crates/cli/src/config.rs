//! Run configuration assembled from a key-value file and command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use regge_core::engine::MAX_ORDER;
use regge_core::oracle::OracleConfig;
use regge_core::renorm::SolverConfig;
use regge_core::{Execution, PotentialSpec};

use crate::args::{Cli, Command, Format, PhysicsArgs, PotentialKind, SchemeChoice};
use crate::Failure;

const KEYS: &[&str] = &[
    "potential", "A", "v", "m", "hbar", "n", "N", "E", "grid", "state", "scheme", "format",
    "precision", "sequential", "tol_rel", "max_iter", "refine_tol", "rows", "check",
];

/// Values by key; later layers override earlier ones.
#[derive(Debug, Default, Clone)]
pub struct Layer(BTreeMap<String, String>);

impl Layer {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Validation(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = canonical_key(key.trim());
            if !KEYS.contains(&key) {
                return Err(Failure::Validation(format!(
                    "config line {}: unknown key `{}`",
                    lineno + 1,
                    key
                )));
            }
            map.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Layer(map))
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    fn overlay(&mut self, other: Layer) {
        self.0.extend(other.0);
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| Failure::Validation(format!("`{key}` = `{s}`: {e}")))
            })
            .transpose()
    }
}

fn canonical_key(key: &str) -> &str {
    match key {
        "mass" => "m",
        "order" => "N",
        "energy" | "energies" => "E",
        "a" => "A",
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub n: u32,
    pub l: f64,
}

pub fn parse_state(s: &str) -> Result<State, Failure> {
    let mut n = None;
    let mut l = None;
    for part in s.split(',') {
        let bad = || Failure::Validation(format!("state `{s}`: expected n=<int>,l=<real>"));
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        match k.trim() {
            "n" => n = Some(v.trim().parse::<u32>().map_err(|_| bad())?),
            "l" => l = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    match (n, l) {
        (Some(n), Some(l)) if l > -0.5 => Ok(State { n, l }),
        (Some(_), Some(l)) => Err(Failure::Validation(format!("state `{s}`: l = {l} must exceed -1/2"))),
        _ => Err(Failure::Validation(format!("state `{s}`: both n and l are required"))),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Validation(format!("grid `{s}`: expected START:STOP:COUNT"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.parse().map_err(|_| bad())?;
    let stop: f64 = stop.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    match count {
        0 => Err(bad()),
        1 => Ok(vec![start]),
        _ => Ok((0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect()),
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub mass: f64,
    pub hbar: f64,
    pub order: usize,
    pub n: Option<u32>,
    pub energies: Vec<f64>,
    pub states: Vec<State>,
    pub scheme: SchemeChoice,
    pub format: Format,
    pub precision: usize,
    pub solver: SolverConfig,
    pub oracle: OracleConfig,
    pub execution: Execution,
    pub rows: Option<u32>,
    pub check: bool,
}

fn physics_layer(p: &PhysicsArgs) -> Layer {
    let mut layer = Layer::default();
    if let Some(kind) = p.potential {
        layer.set(
            "potential",
            match kind {
                PotentialKind::Powerlaw => "powerlaw",
                PotentialKind::Martin => "martin",
            },
        );
    }
    if let Some(a) = p.a {
        layer.set("A", a);
    }
    if let Some(v) = p.v {
        layer.set("v", v);
    }
    if let Some(m) = p.m {
        layer.set("m", m);
    }
    if let Some(h) = p.hbar {
        layer.set("hbar", h);
    }
    if let Some(n) = p.n {
        layer.set("n", n);
    }
    if !p.energies.is_empty() {
        let list: Vec<String> = p.energies.iter().map(f64::to_string).collect();
        layer.set("E", list.join(","));
    }
    if let Some(g) = &p.grid {
        layer.set("grid", g);
    }
    if !p.state.is_empty() {
        layer.set("state", p.state.join(";"));
    }
    layer
}

fn cli_layer(cli: &Cli) -> Layer {
    let mut layer = Layer::default();
    if let Some(p) = cli.precision {
        layer.set("precision", p);
    }
    if let Some(f) = cli.format {
        layer.set(
            "format",
            match f {
                Format::Table => "table",
                Format::Csv => "csv",
                Format::Json => "json",
            },
        );
    }
    if cli.sequential {
        layer.set("sequential", true);
    }
    match &cli.command {
        Command::Trajectory { physics, order } => {
            layer.overlay(physics_layer(physics));
            if let Some(order) = order {
                layer.set("N", order);
            }
        }
        Command::Renorm { physics, scheme } => {
            layer.overlay(physics_layer(physics));
            if let Some(s) = scheme {
                layer.set(
                    "scheme",
                    match s {
                        SchemeChoice::None => "none",
                        SchemeChoice::Pms => "pms",
                        SchemeChoice::Fc => "fc",
                        SchemeChoice::Both => "both",
                    },
                );
            }
        }
        Command::Table1 { rows, no_check } => {
            if let Some(n) = rows {
                layer.set("rows", format!("n={n}"));
            }
            if *no_check {
                layer.set("check", false);
            }
        }
    }
    layer
}

impl RunConfig {
    /// Resolves the file (if any) under the command-line flags.
    pub fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let mut layer = match &cli.config {
            Some(path) => Layer::read(path)?,
            None => Layer::default(),
        };
        layer.overlay(cli_layer(cli));
        Self::from_layer(&layer)
    }

    pub fn from_layer(layer: &Layer) -> Result<Self, Failure> {
        let invalid = |msg: String| Failure::Validation(msg);

        let a = layer.number::<f64>("A")?;
        let v = layer.number::<f64>("v")?;
        let potential = match layer.get("potential").unwrap_or("martin") {
            "martin" => {
                if a.is_some_and(|a| a != 1.0) || v.is_some_and(|v| v != 0.1) {
                    return Err(invalid("the martin potential fixes A = 1 and v = 0.1".into()));
                }
                PotentialSpec::martin()
            }
            "powerlaw" => {
                let v = v.ok_or_else(|| invalid("powerlaw needs --v".into()))?;
                PotentialSpec::power_law(a.unwrap_or(1.0), v)
                    .map_err(|e| invalid(e.to_string()))?
            }
            other => return Err(invalid(format!("unknown potential `{other}`"))),
        };

        let mass = layer.number::<f64>("m")?.unwrap_or(1.0);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid(format!("mass {mass} must be positive")));
        }
        let hbar = layer.number::<f64>("hbar")?.unwrap_or(1.0);
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(invalid(format!("hbar {hbar} must be positive")));
        }
        let order = layer.number::<usize>("N")?.unwrap_or(4);
        if order > MAX_ORDER {
            return Err(invalid(format!("order {order} exceeds {MAX_ORDER}")));
        }

        let mut energies = Vec::new();
        if let Some(list) = layer.get("E") {
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let e: f64 = item
                    .parse()
                    .map_err(|_| invalid(format!("bad energy `{item}`")))?;
                energies.push(e);
            }
        }
        if let Some(g) = layer.get("grid") {
            energies.extend(parse_grid(g)?);
        }
        let states = match layer.get("state") {
            Some(s) => s
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(parse_state)
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };

        let scheme = match layer.get("scheme").unwrap_or("both") {
            "none" => SchemeChoice::None,
            "pms" => SchemeChoice::Pms,
            "fc" => SchemeChoice::Fc,
            "both" => SchemeChoice::Both,
            other => return Err(invalid(format!("unknown scheme `{other}`"))),
        };
        let format = match layer.get("format").unwrap_or("table") {
            "table" => Format::Table,
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(invalid(format!("unknown format `{other}`"))),
        };
        let precision = layer.number::<usize>("precision")?.unwrap_or(6);
        if !(1..=17).contains(&precision) {
            return Err(invalid(format!("precision {precision} must be in 1..=17")));
        }
        let execution = if layer.number::<bool>("sequential")?.unwrap_or(false) {
            Execution::Sequential
        } else {
            Execution::Parallel
        };

        let mut solver = SolverConfig {
            hbar,
            execution,
            ..SolverConfig::default()
        };
        if let Some(t) = layer.number::<f64>("tol_rel")? {
            solver.tol_rel = t;
        }
        if let Some(it) = layer.number::<usize>("max_iter")? {
            solver.max_iter = it;
        }
        let mut oracle = OracleConfig::default();
        if let Some(t) = layer.number::<f64>("refine_tol")? {
            oracle.refine_tol = t;
        }
        let rows = match layer.get("rows") {
            Some(s) => Some(
                s.strip_prefix("n=")
                    .and_then(|n| n.trim().parse().ok())
                    .ok_or_else(|| invalid(format!("rows `{s}`: expected n=<int>")))?,
            ),
            None => None,
        };
        let check = layer.number::<bool>("check")?.unwrap_or(true);

        Ok(RunConfig {
            potential,
            mass,
            hbar,
            order,
            n: layer.number::<u32>("n")?,
            energies,
            states,
            scheme,
            format,
            precision,
            solver,
            oracle,
            execution,
            rows,
            check,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layers_override_in_order() {
        let mut base = Layer::parse("potential = powerlaw\nv = 2\nmass = 3 # comment\n").unwrap();
        let mut top = Layer::default();
        top.set("m", 1.5);
        base.overlay(top);
        let cfg = RunConfig::from_layer(&base).unwrap();
        assert_eq!(cfg.mass, 1.5);
        assert_eq!(cfg.potential.label(), PotentialSpec::power_law(1.0, 2.0).unwrap().label());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Layer::parse("colour = blue").is_err());
        let layer = Layer::parse("N = 9").unwrap();
        assert!(matches!(RunConfig::from_layer(&layer), Err(Failure::Validation(_))));
        let layer = Layer::parse("m = -1").unwrap();
        assert!(RunConfig::from_layer(&layer).is_err());
    }

    #[test]
    fn grid_and_states() {
        assert_eq!(parse_grid("1:2:3").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_grid("1:2").is_err());
        assert_eq!(parse_state("n=2, l=1").unwrap(), State { n: 2, l: 1.0 });
        assert!(parse_state("n=2").is_err());
        assert!(parse_state("n=1,l=-0.7").is_err());
    }
}

//! `key = value` experiment configuration.

use super::IoError;
use crate::grid::{Field, Grid};
use crate::regularity::{regime_lower_bound, RadiusSchedule, DEFAULT_LAMBDA, REGIME_UPPER_BOUND};
use crate::solver::{init, MobilityModel, Scheme, SolverConfig, DEFAULT_DT_SAFETY, DEFAULT_EPS_FLOOR};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

const KEYS: [&str; 19] = [
    "nx",
    "domain_size",
    "n_exponent",
    "dt_safety",
    "t_end",
    "snapshot_every",
    "scheme",
    "init",
    "init.amplitude",
    "init.center",
    "init.width",
    "seed",
    "eps_floor",
    "sweep.r_min",
    "sweep.r_max",
    "sweep.lambda",
    "strict_regime",
    "initial_p",
    "init.mean",
];

/// Used when `sweep.lambda` is absent and the default ratio leaves fewer
/// than three steps between `sweep.r_min` and `sweep.r_max`.
const FALLBACK_LAMBDA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Constant,
    Mode,
    Droplet,
    Random,
    TravelWave1d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nx: usize,
    pub domain_size: f64,
    pub n_exponent: f64,
    pub dt_safety: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub scheme: Scheme,
    pub init: InitKind,
    pub amplitude: f64,
    /// Background level for `mode` and `random`.
    pub mean: f64,
    pub center: [f64; 2],
    pub width: f64,
    pub seed: u64,
    pub eps_floor: f64,
    pub strict_regime: bool,
    pub initial_p: Option<f64>,
    /// `None` when no sweep keys were given and the grid is too coarse for
    /// the default schedule.
    pub schedule: Option<RadiusSchedule>,
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, IoError> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| IoError::constraint(key, format!("{v:?} is not {what}"))))
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str, what: &str) -> Result<T, IoError> {
        self.parse(key, what)?.ok_or_else(|| IoError::constraint(key, "is required"))
    }

    fn number(&self, key: &str) -> Result<Option<f64>, IoError> {
        match self.parse::<f64>(key, "a number")? {
            Some(v) if !v.is_finite() => Err(IoError::constraint(key, format!("{v} is not finite"))),
            v => Ok(v),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<f64, IoError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(IoError::constraint(key, format!("must be > 0 (got {v})")))
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, IoError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| IoError::SchemaMismatch(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(IoError::UnknownKey(k.to_string()));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(IoError::constraint(k, "is given more than once"));
        }
    }
    let e = Entries(map);

    let init = match e.raw("init") {
        Some("constant") => InitKind::Constant,
        Some("mode") => InitKind::Mode,
        Some("droplet") => InitKind::Droplet,
        Some("random") => InitKind::Random,
        Some("travelwave1d") => InitKind::TravelWave1d,
        Some(other) => {
            return Err(IoError::constraint(
                "init",
                format!("{other:?} is not one of constant, mode, droplet, random, travelwave1d"),
            ))
        }
        None => return Err(IoError::constraint("init", "is required")),
    };
    let nx: usize = e.required("nx", "a cell count")?;
    let domain_size = positive("domain_size", e.number("domain_size")?.ok_or_else(|| IoError::constraint("domain_size", "is required"))?)?;
    let ny = if init == InitKind::TravelWave1d { 1 } else { nx };
    let grid = Grid::new(nx, ny, domain_size).map_err(|err| IoError::constraint("nx", err.to_string()))?;

    let strict_regime = e.parse::<bool>("strict_regime", "true or false")?.unwrap_or(true);
    let n_exponent = positive("n_exponent", e.number("n_exponent")?.ok_or_else(|| IoError::constraint("n_exponent", "is required"))?)?;
    let lo = regime_lower_bound();
    if strict_regime && !(n_exponent > lo && n_exponent < REGIME_UPPER_BOUND) {
        return Err(IoError::constraint(
            "n_exponent",
            format!("{n_exponent} lies outside the open range ({lo:.5}, {REGIME_UPPER_BOUND}) required with strict_regime = true"),
        ));
    }
    let dt_safety = positive("dt_safety", e.number("dt_safety")?.unwrap_or(DEFAULT_DT_SAFETY))?;
    let t_end = positive("t_end", e.number("t_end")?.ok_or_else(|| IoError::constraint("t_end", "is required"))?)?;
    let snapshot_every = positive("snapshot_every", e.number("snapshot_every")?.unwrap_or(t_end))?;
    if snapshot_every > t_end {
        return Err(IoError::constraint("snapshot_every", format!("{snapshot_every} exceeds t_end = {t_end}")));
    }
    let scheme = match e.raw("scheme").unwrap_or("explicit") {
        "explicit" => Scheme::Explicit,
        "semi-implicit" => Scheme::SemiImplicit,
        other => return Err(IoError::constraint("scheme", format!("{other:?} is not explicit or semi-implicit"))),
    };

    let default_amplitude = match init {
        InitKind::Mode => 0.1,
        InitKind::Random => 0.5,
        _ => 1.0,
    };
    let amplitude = e.number("init.amplitude")?.unwrap_or(default_amplitude);
    let mean = e.number("init.mean")?.unwrap_or(1.0);
    match init {
        InitKind::Constant | InitKind::Droplet | InitKind::TravelWave1d if amplitude < 0.0 => {
            return Err(IoError::constraint("init.amplitude", format!("must be >= 0 (got {amplitude})")))
        }
        InitKind::Mode | InitKind::Random if !(amplitude.abs() <= mean) => {
            return Err(IoError::constraint(
                "init.amplitude",
                format!("|{amplitude}| exceeds init.mean = {mean}; the initial film would be negative"),
            ))
        }
        _ => {}
    }
    let center = match e.raw("init.center") {
        None => grid.domain_center(),
        Some(v) => {
            let parts: Vec<Result<f64, _>> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
            match parts.as_slice() {
                [Ok(x)] if grid.is_1d() => [*x, 0.0],
                [Ok(x), Ok(y)] if x.is_finite() && y.is_finite() => [*x, *y],
                _ => return Err(IoError::constraint("init.center", format!("{v:?} is not \"x,y\""))),
            }
        }
    };
    let width = positive("init.width", e.number("init.width")?.unwrap_or(domain_size / 4.0))?;
    let seed = e.parse::<u64>("seed", "an unsigned integer")?.unwrap_or(0);
    let eps_floor = e.number("eps_floor")?.unwrap_or(DEFAULT_EPS_FLOOR);
    if eps_floor < 0.0 {
        return Err(IoError::constraint("eps_floor", format!("must be >= 0 (got {eps_floor})")));
    }
    let initial_p = e.number("initial_p")?;
    if let Some(p) = initial_p {
        if !(p > 2.0) {
            return Err(IoError::constraint("initial_p", format!("must be > 2 (got {p})")));
        }
    }

    let given = ["sweep.r_min", "sweep.r_max", "sweep.lambda"].iter().any(|k| e.raw(k).is_some());
    let r_min = e.number("sweep.r_min")?.unwrap_or(8.0 * grid.h());
    let r_max = e.number("sweep.r_max")?.unwrap_or(domain_size / 8.0);
    let schedule = match e.number("sweep.lambda")? {
        Some(lambda) => RadiusSchedule::new(&grid, r_min, r_max, lambda),
        None => RadiusSchedule::new(&grid, r_min, r_max, DEFAULT_LAMBDA)
            .or_else(|_| RadiusSchedule::new(&grid, r_min, r_max, FALLBACK_LAMBDA)),
    };
    let schedule = match schedule {
        Ok(s) => Some(s),
        Err(_) if !given => None,
        Err(err) => return Err(IoError::constraint("sweep.r_min/sweep.r_max/sweep.lambda", err.to_string())),
    };

    Ok(ExperimentConfig {
        nx,
        domain_size,
        n_exponent,
        dt_safety,
        t_end,
        snapshot_every,
        scheme,
        init,
        amplitude,
        mean,
        center,
        width,
        seed,
        eps_floor,
        strict_regime,
        initial_p,
        schedule,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_config(&text)
}

impl ExperimentConfig {
    pub fn grid(&self) -> Grid {
        let ny = if self.init == InitKind::TravelWave1d { 1 } else { self.nx };
        Grid::new(self.nx, ny, self.domain_size).expect("validated at load")
    }

    pub fn mobility(&self) -> MobilityModel {
        MobilityModel::new(self.n_exponent, self.eps_floor, self.strict_regime).expect("validated at load")
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig::new(self.mobility(), self.t_end, self.snapshot_every)
            .with_dt_safety(self.dt_safety)
            .with_scheme(self.scheme)
    }

    pub fn initial_field(&self) -> Field {
        let g = self.grid();
        match self.init {
            InitKind::Constant => init::constant(g, self.amplitude),
            InitKind::Mode => init::mode(g, self.mean, self.amplitude, 1),
            InitKind::Droplet => init::droplet(g, self.center, self.width, self.amplitude, 0.0),
            InitKind::Random => init::random_positive(g, self.seed, self.mean, self.amplitude),
            InitKind::TravelWave1d => {
                init::travelling_wave(g, self.n_exponent, self.center[0], self.width).map(|v| self.amplitude * v)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "nx = 64\ndomain_size = 1\nt_end = 1e-6\ninit = droplet\n";

    fn with(extra: &str) -> Result<ExperimentConfig, IoError> {
        parse_config(&format!("{BASE}{extra}"))
    }

    #[test]
    fn regime_examples() {
        let c = with("n_exponent = 2\nstrict_regime = true\n# comment\n").unwrap();
        assert_eq!(c.snapshot_every, 1e-6);
        assert_eq!(c.schedule, None);
        let c = parse_config(&BASE.replace("64", "256")).unwrap_err();
        assert!(matches!(c, IoError::ConstraintViolation { ref key, .. } if key == "n_exponent"));
        let c = parse_config(&format!("{}n_exponent = 2\n", BASE.replace("64", "256"))).unwrap();
        assert_eq!(c.schedule.unwrap().lambda, 1.5);
        assert_eq!(c.schedule.unwrap().levels, 3);
        let err = with("n_exponent = 3.5\nstrict_regime = true\n").unwrap_err();
        match err {
            IoError::ConstraintViolation { key, constraint } => {
                assert_eq!(key, "n_exponent");
                assert!(constraint.contains("(1.10557, 3)"), "{constraint}");
            }
            other => panic!("{other:?}"),
        }
        assert!(with("n_exponent = 3.5\nstrict_regime = false\n").is_ok());
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        assert!(matches!(with("n_exponent = 2\nfoo = 1\n"), Err(IoError::UnknownKey(k)) if k == "foo"));
        let bad = |extra: &str, key: &str| match with(&format!("n_exponent = 2\n{extra}\n")) {
            Err(IoError::ConstraintViolation { key: k, .. }) => assert_eq!(k, key, "{extra}"),
            other => panic!("{extra}: {other:?}"),
        };
        bad("initial_p = 2", "initial_p");
        bad("dt_safety = 0", "dt_safety");
        bad("snapshot_every = 1", "snapshot_every");
        bad("scheme = rk4", "scheme");
        bad("init.center = 1;2", "init.center");
        bad("sweep.lambda = 3", "sweep.r_min/sweep.r_max/sweep.lambda");
        bad("seed = -1", "seed");
        bad("n_exponent = 2", "n_exponent");
    }

    #[test]
    fn travelling_wave_config_is_1d() {
        let c = parse_config(
            "nx = 256\ndomain_size = 256\nn_exponent = 1\nstrict_regime = false\nt_end = 0.1\ninit = travelwave1d\ninit.center = 100\ninit.width = 16\n",
        )
        .unwrap();
        let u = c.initial_field();
        assert!(u.grid().is_1d());
        assert_eq!(u.at(102, 0), 8.0);
        assert_eq!(u.at(116, 0), 0.0);
    }
}

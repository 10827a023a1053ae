use std::collections::BTreeSet;

use fockchaos::fock::{sector_dimension, Geometry, LatticeParams, DEFAULT_CAPACITY};
use fockchaos::quantum::DenseCaps;
use fockchaos::Complex64;
use toml::{Table, Value};

use crate::error::{CliError, Issue};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Autocorr,
    Cbs,
    Rwm,
    Otoc,
    Spectra,
    Lyapunov,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Autocorr => "autocorr",
            Experiment::Cbs => "cbs",
            Experiment::Rwm => "rwm",
            Experiment::Otoc => "otoc",
            Experiment::Spectra => "spectra",
            Experiment::Lyapunov => "lyapunov",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        [Self::Autocorr, Self::Cbs, Self::Rwm, Self::Otoc, Self::Spectra, Self::Lyapunov]
            .into_iter()
            .find(|e| e.name() == name)
    }
}

#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct AutocorrConfig {
    pub amplitudes: Vec<Complex64>,
    pub time: TimeGrid,
    pub tol: f64,
    pub sector_window: f64,
    pub twa_samples: usize,
    pub twa_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundChoice {
    Translations,
    EnergyShell(f64),
}

#[derive(Debug, Clone)]
pub struct CbsConfig {
    pub fock: Vec<u8>,
    pub phases: Vec<f64>,
    pub window: (f64, f64),
    pub samples: usize,
    pub background: BackgroundChoice,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct RwmConfig {
    pub particles: usize,
    pub seed_state: Vec<u8>,
    pub radius: u8,
    pub width: f64,
    /// Window center; the median eigenvalue when absent.
    pub center: Option<f64>,
    pub q_max: i64,
    pub dos_samples: usize,
}

#[derive(Debug, Clone)]
pub struct OtocConfig {
    pub amplitudes: Vec<Complex64>,
    /// Refine the amplitudes to a mean-field fixed point first.
    pub fixed_point: bool,
    /// Project the coherent state on this particle number.
    pub particles: Option<usize>,
    pub v_site: usize,
    pub w_site: usize,
    pub time: TimeGrid,
    pub tol: f64,
    pub sector_window: f64,
    pub lyapunov_duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnfoldChoice {
    Gaussian(f64),
    Polynomial(usize),
}

#[derive(Debug, Clone)]
pub struct SpectraConfig {
    pub particles: usize,
    pub realizations: usize,
    pub disorder: f64,
    pub unfold: UnfoldChoice,
    pub trim: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub smoothing: f64,
}

#[derive(Debug, Clone)]
pub struct LyapunovConfig {
    pub amplitudes: Vec<Complex64>,
    pub duration: f64,
    pub renorm_interval: f64,
    pub blocks: usize,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub enum Study {
    Autocorr(AutocorrConfig),
    Cbs(CbsConfig),
    Rwm(RwmConfig),
    Otoc(OtocConfig),
    Spectra(SpectraConfig),
    Lyapunov(LyapunovConfig),
}

/// A validated configuration together with its canonical source.
#[derive(Debug, Clone)]
pub struct Config {
    pub experiment: Experiment,
    pub seed: u64,
    pub lattice: LatticeParams,
    pub study: Study,
    /// Canonical TOML of the effective configuration (after overrides).
    pub canonical: String,
}

/// Parses TOML text, applies a seed override and validates everything.
/// All problems are collected before returning.
pub fn load(text: &str, expected: Experiment, seed_override: Option<u64>) -> Result<Config, CliError> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    if let Some(seed) = seed_override {
        table.insert("seed".into(), Value::Integer(seed as i64));
    }
    let canonical = toml::to_string(&table).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut v = Validator::default();
    let parsed = v.config(&table, expected);
    match parsed {
        Some((experiment, seed, lattice, study)) if v.issues.is_empty() => {
            Ok(Config { experiment, seed, lattice, study, canonical })
        }
        _ => Err(CliError::Invalid(v.issues)),
    }
}

/// All validation problems of a configuration; empty when it is valid.
pub fn validate(text: &str, expected: Experiment) -> Result<Vec<Issue>, CliError> {
    match load(text, expected, None) {
        Ok(_) => Ok(Vec::new()),
        Err(CliError::Invalid(issues)) => Ok(issues),
        Err(e) => Err(e),
    }
}

#[derive(Default)]
struct Validator {
    issues: Vec<Issue>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Validator {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { path: path.into(), message: message.into(), capacity: false });
    }

    fn capacity(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { path: path.into(), message: message.into(), capacity: true });
    }

    fn allow(&mut self, table: &Table, path: &str, keys: &[&str]) {
        let allowed: BTreeSet<&str> = keys.iter().copied().collect();
        for key in table.keys() {
            if !allowed.contains(key.as_str()) {
                self.issue(join(path, key), "unknown key");
            }
        }
    }

    fn table<'a>(&mut self, parent: &'a Table, path: &str, key: &str, required: bool) -> Option<&'a Table> {
        match parent.get(key) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.issue(join(path, key), "expected a table");
                None
            }
            None => {
                if required {
                    self.issue(join(path, key), "missing required section");
                }
                None
            }
        }
    }

    fn float_value(&mut self, value: &Value, path: &str) -> Option<f64> {
        let x = match value {
            Value::Float(x) => *x,
            Value::Integer(i) => *i as f64,
            _ => {
                self.issue(path, "expected a number");
                return None;
            }
        };
        if !x.is_finite() {
            self.issue(path, "must be finite");
            return None;
        }
        Some(x)
    }

    fn float(&mut self, t: &Table, path: &str, key: &str) -> Option<f64> {
        match t.get(key) {
            Some(v) => self.float_value(v, &join(path, key)),
            None => {
                self.issue(join(path, key), "missing required field");
                None
            }
        }
    }

    fn float_or(&mut self, t: &Table, path: &str, key: &str, default: f64) -> Option<f64> {
        match t.get(key) {
            Some(v) => self.float_value(v, &join(path, key)),
            None => Some(default),
        }
    }

    fn positive(&mut self, value: Option<f64>, path: &str, key: &str) -> Option<f64> {
        match value {
            Some(x) if x > 0.0 => Some(x),
            Some(_) => {
                self.issue(join(path, key), "must be positive");
                None
            }
            None => None,
        }
    }

    fn uint_value(&mut self, value: &Value, path: &str) -> Option<u64> {
        match value {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            Value::Integer(_) => {
                self.issue(path, "must be non-negative");
                None
            }
            _ => {
                self.issue(path, "expected an integer");
                None
            }
        }
    }

    fn uint(&mut self, t: &Table, path: &str, key: &str) -> Option<u64> {
        match t.get(key) {
            Some(v) => self.uint_value(v, &join(path, key)),
            None => {
                self.issue(join(path, key), "missing required field");
                None
            }
        }
    }

    fn uint_or(&mut self, t: &Table, path: &str, key: &str, default: u64) -> Option<u64> {
        match t.get(key) {
            Some(v) => self.uint_value(v, &join(path, key)),
            None => Some(default),
        }
    }

    fn string_or<'a>(&mut self, t: &'a Table, path: &str, key: &str, default: &'a str) -> Option<&'a str> {
        match t.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.issue(join(path, key), "expected a string");
                None
            }
            None => Some(default),
        }
    }

    fn array<'a>(&mut self, t: &'a Table, path: &str, key: &str) -> Option<&'a Vec<Value>> {
        match t.get(key) {
            Some(Value::Array(a)) => Some(a),
            Some(_) => {
                self.issue(join(path, key), "expected an array");
                None
            }
            None => {
                self.issue(join(path, key), "missing required field");
                None
            }
        }
    }

    fn floats(&mut self, t: &Table, path: &str, key: &str) -> Option<Vec<f64>> {
        let items = self.array(t, path, key)?;
        let p = join(path, key);
        let out: Vec<Option<f64>> =
            items.iter().enumerate().map(|(i, v)| self.float_value(v, &format!("{p}[{i}]"))).collect();
        out.into_iter().collect()
    }

    fn occupations(&mut self, t: &Table, path: &str, key: &str) -> Option<Vec<u8>> {
        let items = self.array(t, path, key)?;
        let p = join(path, key);
        let mut out = Vec::with_capacity(items.len());
        for (i, v) in items.iter().enumerate() {
            match self.uint_value(v, &format!("{p}[{i}]")) {
                Some(k) if k <= u8::MAX as u64 => out.push(k as u8),
                Some(_) => {
                    self.issue(format!("{p}[{i}]"), "occupations above 255 are not supported");
                    return None;
                }
                None => return None,
            }
        }
        Some(out)
    }

    /// Complex amplitudes written as `[re, im]` pairs or plain reals.
    fn amplitudes(&mut self, t: &Table, path: &str, key: &str) -> Option<Vec<Complex64>> {
        let items = self.array(t, path, key)?;
        let p = join(path, key);
        let mut out = Vec::with_capacity(items.len());
        for (i, v) in items.iter().enumerate() {
            let here = format!("{p}[{i}]");
            let z = match v {
                Value::Array(pair) if pair.len() == 2 => {
                    let re = self.float_value(&pair[0], &here);
                    let im = self.float_value(&pair[1], &here);
                    Complex64::new(re?, im?)
                }
                Value::Array(_) => {
                    self.issue(here, "complex amplitude must be [re, im]");
                    return None;
                }
                other => Complex64::new(self.float_value(other, &here)?, 0.0),
            };
            out.push(z);
        }
        Some(out)
    }

    fn check_len<T>(&mut self, values: &Option<Vec<T>>, sites: Option<usize>, path: &str) {
        if let (Some(v), Some(l)) = (values, sites) {
            if v.len() != l {
                self.issue(path, format!("has length {}, expected {l} (lattice.sites)", v.len()));
            }
        }
    }

    fn check_dimension(&mut self, path: &str, sites: usize, particles: usize, cap: usize, what: &str) {
        match sector_dimension(sites, particles) {
            Some(d) if d <= cap as u128 => {}
            Some(d) => self.capacity(
                path,
                format!("sector L={sites}, N={particles} has dimension {d}, above the {what} cap {cap}"),
            ),
            None => self.capacity(path, format!("sector L={sites}, N={particles} has dimension beyond u128")),
        }
    }

    fn config(&mut self, root: &Table, expected: Experiment) -> Option<(Experiment, u64, LatticeParams, Study)> {
        let mut sections = vec!["schema_version", "experiment", "seed", "lattice", expected.name()];
        match expected {
            Experiment::Autocorr | Experiment::Otoc => sections.extend(["initial", "time"]),
            Experiment::Cbs | Experiment::Lyapunov => sections.push("initial"),
            Experiment::Rwm | Experiment::Spectra => {}
        }
        self.allow(root, "", &sections);
        match root.get("schema_version") {
            Some(Value::Integer(SCHEMA_VERSION)) => {}
            Some(Value::Integer(v)) => {
                self.issue("schema_version", format!("unsupported version {v}, expected {SCHEMA_VERSION}"))
            }
            Some(_) => self.issue("schema_version", "expected an integer"),
            None => self.issue("schema_version", "missing required field"),
        }
        let experiment = match root.get("experiment") {
            Some(Value::String(s)) => match Experiment::from_name(s) {
                Some(e) if e == expected => Some(e),
                Some(e) => {
                    self.issue(
                        "experiment",
                        format!("config is for '{}' but the '{}' subcommand was used", e.name(), expected.name()),
                    );
                    None
                }
                None => {
                    self.issue("experiment", format!("unknown experiment '{s}'"));
                    None
                }
            },
            Some(_) => {
                self.issue("experiment", "expected a string");
                None
            }
            None => {
                self.issue("experiment", "missing required field");
                None
            }
        };
        let seed = self.uint_or(root, "", "seed", 0);
        let lattice = self.lattice(root);
        let sites = lattice.as_ref().map(|p| p.sites);
        let study = match expected {
            Experiment::Autocorr => self.autocorr(root, sites).map(Study::Autocorr),
            Experiment::Cbs => self.cbs(root, lattice.as_ref()).map(Study::Cbs),
            Experiment::Rwm => self.rwm(root, lattice.as_ref()).map(Study::Rwm),
            Experiment::Otoc => self.otoc(root, sites).map(Study::Otoc),
            Experiment::Spectra => self.spectra(root, sites).map(Study::Spectra),
            Experiment::Lyapunov => self.lyapunov(root, sites).map(Study::Lyapunov),
        };
        Some((experiment?, seed?, lattice?, study?))
    }

    fn lattice(&mut self, root: &Table) -> Option<LatticeParams> {
        let t = self.table(root, "", "lattice", true)?;
        let p = "lattice";
        self.allow(t, p, &["sites", "hopping", "interaction", "phase", "onsite", "geometry"]);
        let sites = match self.uint(t, p, "sites") {
            Some(s) if s >= 2 => Some(s as usize),
            Some(_) => {
                self.issue("lattice.sites", "need at least 2 sites");
                None
            }
            None => None,
        };
        let hopping = self.float(t, p, "hopping");
        let interaction = self.float(t, p, "interaction");
        let phase = self.float_or(t, p, "phase", 0.0);
        let onsite = if t.contains_key("onsite") {
            let v = self.floats(t, p, "onsite");
            self.check_len(&v, sites, "lattice.onsite");
            v
        } else {
            sites.map(|l| vec![0.0; l])
        };
        let geometry = match self.string_or(t, p, "geometry", "ring")? {
            "ring" => Some(Geometry::Ring),
            "open" => Some(Geometry::OpenChain),
            other => {
                self.issue("lattice.geometry", format!("unknown geometry '{other}', expected 'ring' or 'open'"));
                None
            }
        };
        let sites = sites?;
        let onsite = onsite.filter(|o| o.len() == sites)?;
        Some(LatticeParams {
            sites,
            hopping: hopping?,
            interaction: interaction?,
            phase: phase?,
            onsite,
            geometry: geometry?,
        })
    }

    fn time(&mut self, root: &Table) -> Option<TimeGrid> {
        let t = self.table(root, "", "time", true)?;
        self.allow(t, "time", &["start", "end", "points"]);
        let start = self.float_or(t, "time", "start", 0.0);
        let end = self.float(t, "time", "end");
        let points = self.uint(t, "time", "points");
        if let (Some(s), Some(e)) = (start, end) {
            if s < 0.0 {
                self.issue("time.start", "must be non-negative");
            }
            if e <= s {
                self.issue("time.end", "must exceed time.start");
            }
        }
        if let Some(n) = points {
            if n < 2 {
                self.issue("time.points", "need at least 2 points");
            }
        }
        let grid = TimeGrid { start: start?, end: end?, points: points? as usize };
        (grid.start >= 0.0 && grid.end > grid.start && grid.points >= 2).then_some(grid)
    }

    fn initial_amplitudes<'a>(&mut self, root: &'a Table, sites: Option<usize>, extra: &[&str]) -> Option<(&'a Table, Vec<Complex64>)> {
        let t = self.table(root, "", "initial", true)?;
        let mut keys = vec!["amplitudes"];
        keys.extend_from_slice(extra);
        self.allow(t, "initial", &keys);
        let amps = self.amplitudes(t, "initial", "amplitudes");
        self.check_len(&amps, sites, "initial.amplitudes");
        if let Some(a) = &amps {
            if a.iter().all(|z| z.norm_sqr() == 0.0) {
                self.issue("initial.amplitudes", "need a non-zero amplitude");
            }
        }
        let amps = amps.filter(|a| Some(a.len()) == sites && a.iter().any(|z| z.norm_sqr() > 0.0))?;
        Some((t, amps))
    }

    fn coherent_capacity(&mut self, path: &str, amps: &[Complex64], window: f64) {
        let mean: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        let top = (mean + window * mean.sqrt()).floor() as usize;
        if top > u8::MAX as usize {
            self.issue(path, format!("coherent state reaches {top} particles; at most 255 supported"));
            return;
        }
        self.check_dimension(path, amps.len(), top, DEFAULT_CAPACITY, "basis");
    }

    fn autocorr(&mut self, root: &Table, sites: Option<usize>) -> Option<AutocorrConfig> {
        let initial = self.initial_amplitudes(root, sites, &[]);
        let time = self.time(root);
        let empty = Table::new();
        let t = self.table(root, "", "autocorr", false).unwrap_or(&empty);
        let p = "autocorr";
        self.allow(t, p, &["tol", "sector_window", "twa_samples", "twa_dt"]);
        let tol = self.tolerance(t, p, 1e-9);
        let window = self.float_or(t, p, "sector_window", 6.0);
        let window = self.positive(window, p, "sector_window");
        let twa_samples = self.uint_or(t, p, "twa_samples", 0);
        let twa_dt = self.float_or(t, p, "twa_dt", 0.01);
        let twa_dt = self.positive(twa_dt, p, "twa_dt");
        let (_, amplitudes) = initial?;
        self.coherent_capacity("initial.amplitudes", &amplitudes, window?);
        Some(AutocorrConfig {
            amplitudes,
            time: time?,
            tol: tol?,
            sector_window: window?,
            twa_samples: twa_samples? as usize,
            twa_dt: twa_dt?,
        })
    }

    fn tolerance(&mut self, t: &Table, path: &str, default: f64) -> Option<f64> {
        let tol = self.float_or(t, path, "tol", default)?;
        if !(tol > 1e-14 && tol < 1e-4) {
            self.issue(join(path, "tol"), "must lie in (1e-14, 1e-4)");
            return None;
        }
        Some(tol)
    }

    fn cbs(&mut self, root: &Table, lattice: Option<&LatticeParams>) -> Option<CbsConfig> {
        let sites = lattice.map(|l| l.sites);
        let initial = self.table(root, "", "initial", true);
        let fock = initial.and_then(|t| {
            self.allow(t, "initial", &["fock"]);
            let f = self.occupations(t, "initial", "fock");
            self.check_len(&f, sites, "initial.fock");
            f
        });
        let t = self.table(root, "", "cbs", true)?;
        let p = "cbs";
        self.allow(t, p, &["phases", "window", "samples", "background", "shell_width", "tol"]);
        let phases = self.floats(t, p, "phases");
        if let Some(ph) = &phases {
            if ph.is_empty() {
                self.issue("cbs.phases", "need at least one phase");
            }
        }
        let j = lattice.map(|l| l.hopping.abs().max(f64::MIN_POSITIVE)).unwrap_or(1.0);
        let window = if t.contains_key("window") {
            match self.floats(t, p, "window") {
                Some(w) if w.len() == 2 && w[0] >= 0.0 && w[1] > w[0] => Some((w[0], w[1])),
                Some(_) => {
                    self.issue("cbs.window", "expected [start, end] with 0 <= start < end");
                    None
                }
                None => None,
            }
        } else {
            Some((20.0 / j, 40.0 / j))
        };
        let samples = match self.uint_or(t, p, "samples", 41) {
            Some(n) if n >= 2 => Some(n as usize),
            Some(_) => {
                self.issue("cbs.samples", "need at least 2 samples");
                None
            }
            None => None,
        };
        let background = match self.string_or(t, p, "background", "translations") {
            Some("translations") => Some(BackgroundChoice::Translations),
            Some("energy-shell") => {
                let w = self.float(t, p, "shell_width");
                self.positive(w, p, "shell_width").map(BackgroundChoice::EnergyShell)
            }
            Some(other) => {
                self.issue(
                    "cbs.background",
                    format!("unknown background '{other}', expected 'translations' or 'energy-shell'"),
                );
                None
            }
            None => None,
        };
        let tol = self.tolerance(t, p, 1e-8);
        let fock = fock.filter(|f| Some(f.len()) == sites)?;
        let particles: usize = fock.iter().map(|&k| k as usize).sum();
        self.check_dimension("initial.fock", fock.len(), particles, DEFAULT_CAPACITY, "basis");
        let phases = phases.filter(|p| !p.is_empty())?;
        Some(CbsConfig { fock, phases, window: window?, samples: samples?, background: background?, tol: tol? })
    }

    fn rwm(&mut self, root: &Table, lattice: Option<&LatticeParams>) -> Option<RwmConfig> {
        let sites = lattice.map(|l| l.sites);
        let t = self.table(root, "", "rwm", true)?;
        let p = "rwm";
        self.allow(t, p, &["particles", "seed_state", "radius", "width", "center", "q_max", "dos_samples"]);
        let particles = self.uint(t, p, "particles").map(|n| n as usize);
        let seed_state = self.occupations(t, p, "seed_state");
        self.check_len(&seed_state, sites, "rwm.seed_state");
        if let (Some(s), Some(n)) = (&seed_state, particles) {
            if s.iter().map(|&k| k as usize).sum::<usize>() != n {
                self.issue("rwm.seed_state", format!("occupations do not sum to rwm.particles = {n}"));
            }
        }
        let radius = match self.uint_or(t, p, "radius", 2) {
            Some(r) if r <= u8::MAX as u64 => Some(r as u8),
            Some(_) => {
                self.issue("rwm.radius", "too large");
                None
            }
            None => None,
        };
        let width = self.float(t, p, "width");
        let width = self.positive(width, p, "width");
        let center = if t.contains_key("center") { self.float(t, p, "center").map(Some) } else { Some(None) };
        let q_max = match self.uint_or(t, p, "q_max", 12) {
            Some(q) if (1..=200).contains(&q) => Some(q as i64),
            Some(_) => {
                self.issue("rwm.q_max", "must lie in 1..=200");
                None
            }
            None => None,
        };
        let dos_samples = match self.uint_or(t, p, "dos_samples", 200_000) {
            Some(n) if n >= 2 => Some(n as usize),
            Some(_) => {
                self.issue("rwm.dos_samples", "need at least 2 samples");
                None
            }
            None => None,
        };
        if let Some(l) = lattice {
            if l.phase != 0.0 {
                self.issue("lattice.phase", "the semiclassical covariance requires phase = 0");
            }
        }
        let particles = particles?;
        if let Some(l) = sites {
            self.check_dimension("rwm.particles", l, particles, DenseCaps::default().with_vectors, "eigenvector");
            if let (Some(c), Some(lat)) = (center.flatten(), lattice) {
                let span = spectral_span(lat, particles);
                if c.abs() > span {
                    self.issue("rwm.center", format!("lies outside the spectral span ±{span:.3}"));
                }
            }
        }
        Some(RwmConfig {
            particles,
            seed_state: seed_state.filter(|s| Some(s.len()) == sites)?,
            radius: radius?,
            width: width?,
            center: center?,
            q_max: q_max?,
            dos_samples: dos_samples?,
        })
    }

    fn otoc(&mut self, root: &Table, sites: Option<usize>) -> Option<OtocConfig> {
        let initial = self.initial_amplitudes(root, sites, &["fixed_point", "particles"]);
        let (fixed_point, particles) = match &initial {
            Some((t, _)) => {
                let fp = match t.get("fixed_point") {
                    Some(Value::Boolean(b)) => Some(*b),
                    Some(_) => {
                        self.issue("initial.fixed_point", "expected a boolean");
                        None
                    }
                    None => Some(false),
                };
                let n = if t.contains_key("particles") {
                    self.uint(t, "initial", "particles").map(|n| Some(n as usize))
                } else {
                    Some(None)
                };
                (fp, n)
            }
            None => (None, None),
        };
        let time = self.time(root);
        let empty = Table::new();
        let t = self.table(root, "", "otoc", false).unwrap_or(&empty);
        let p = "otoc";
        self.allow(t, p, &["v_site", "w_site", "tol", "sector_window", "lyapunov_duration"]);
        let site = |v: &mut Self, key: &str, default: u64| -> Option<usize> {
            let s = v.uint_or(t, p, key, default)? as usize;
            if let Some(l) = sites {
                if s >= l {
                    v.issue(join(p, key), format!("site {s} is outside the lattice of {l} sites"));
                    return None;
                }
            }
            Some(s)
        };
        let v_site = site(self, "v_site", 0);
        let w_site = site(self, "w_site", 1);
        let tol = self.tolerance(t, p, 1e-8);
        let window = self.float_or(t, p, "sector_window", 6.0);
        let window = self.positive(window, p, "sector_window");
        let duration = self.float_or(t, p, "lyapunov_duration", 40.0);
        let duration = self.positive(duration, p, "lyapunov_duration");
        let (_, amplitudes) = initial?;
        let particles = particles?;
        match particles {
            Some(n) => self.check_dimension("initial.particles", amplitudes.len(), n, DEFAULT_CAPACITY, "basis"),
            None => self.coherent_capacity("initial.amplitudes", &amplitudes, window?),
        }
        Some(OtocConfig {
            amplitudes,
            fixed_point: fixed_point?,
            particles,
            v_site: v_site?,
            w_site: w_site?,
            time: time?,
            tol: tol?,
            sector_window: window?,
            lyapunov_duration: duration?,
        })
    }

    fn spectra(&mut self, root: &Table, sites: Option<usize>) -> Option<SpectraConfig> {
        let t = self.table(root, "", "spectra", true)?;
        let p = "spectra";
        self.allow(
            t,
            p,
            &[
                "particles",
                "realizations",
                "disorder",
                "unfold",
                "kernel_spacings",
                "degree",
                "trim",
                "tau_max",
                "tau_points",
                "smoothing",
            ],
        );
        let particles = self.uint(t, p, "particles").map(|n| n as usize);
        let realizations = match self.uint_or(t, p, "realizations", 20) {
            Some(0) => {
                self.issue("spectra.realizations", "need at least one realization");
                None
            }
            other => other.map(|n| n as usize),
        };
        let disorder = match self.float_or(t, p, "disorder", 0.0) {
            Some(d) if d < 0.0 => {
                self.issue("spectra.disorder", "must be non-negative");
                None
            }
            other => other,
        };
        let unfold = match self.string_or(t, p, "unfold", "gaussian") {
            Some("gaussian") => {
                let k = self.float_or(t, p, "kernel_spacings", 8.0);
                self.positive(k, p, "kernel_spacings").map(UnfoldChoice::Gaussian)
            }
            Some("polynomial") => match self.uint_or(t, p, "degree", 12) {
                Some(0) => {
                    self.issue("spectra.degree", "must be at least 1");
                    None
                }
                other => other.map(|d| UnfoldChoice::Polynomial(d as usize)),
            },
            Some(other) => {
                self.issue("spectra.unfold", format!("unknown method '{other}', expected 'gaussian' or 'polynomial'"));
                None
            }
            None => None,
        };
        let trim = match self.float_or(t, p, "trim", 0.05) {
            Some(x) if (0.0..0.5).contains(&x) => Some(x),
            Some(_) => {
                self.issue("spectra.trim", "must lie in [0, 0.5)");
                None
            }
            None => None,
        };
        let tau_max = match self.float_or(t, p, "tau_max", 2.0) {
            Some(x) if x > 0.0 && x <= 4.0 => Some(x),
            Some(_) => {
                self.issue("spectra.tau_max", "must lie in (0, 4]");
                None
            }
            None => None,
        };
        let tau_points = match self.uint_or(t, p, "tau_points", 200) {
            Some(n) if n >= 2 => Some(n as usize),
            Some(_) => {
                self.issue("spectra.tau_points", "need at least 2 points");
                None
            }
            None => None,
        };
        let smoothing = match self.float_or(t, p, "smoothing", 0.05) {
            Some(x) if x >= 0.0 => Some(x),
            Some(_) => {
                self.issue("spectra.smoothing", "must be non-negative");
                None
            }
            None => None,
        };
        let particles = particles?;
        if let Some(l) = sites {
            self.check_dimension("spectra.particles", l, particles, DenseCaps::default().values_only, "eigenvalue");
        }
        Some(SpectraConfig {
            particles,
            realizations: realizations?,
            disorder: disorder?,
            unfold: unfold?,
            trim: trim?,
            tau_max: tau_max?,
            tau_points: tau_points?,
            smoothing: smoothing?,
        })
    }

    fn lyapunov(&mut self, root: &Table, sites: Option<usize>) -> Option<LyapunovConfig> {
        let initial = self.initial_amplitudes(root, sites, &[]);
        let t = self.table(root, "", "lyapunov", true)?;
        let p = "lyapunov";
        self.allow(t, p, &["duration", "renorm_interval", "blocks", "dt"]);
        let duration = self.float(t, p, "duration");
        let duration = self.positive(duration, p, "duration");
        let renorm = self.float_or(t, p, "renorm_interval", 0.5);
        let renorm = self.positive(renorm, p, "renorm_interval");
        let blocks = match self.uint_or(t, p, "blocks", 10) {
            Some(b) if b >= 3 => Some(b as usize),
            Some(_) => {
                self.issue("lyapunov.blocks", "need at least 3 blocks");
                None
            }
            None => None,
        };
        let dt = self.float_or(t, p, "dt", 0.02);
        let dt = self.positive(dt, p, "dt");
        let (_, amplitudes) = initial?;
        Some(LyapunovConfig { amplitudes, duration: duration?, renorm_interval: renorm?, blocks: blocks?, dt: dt? })
    }
}

/// Crude bound on `|E|` for a sector: hopping, interaction and on-site
/// terms at full occupation.
fn spectral_span(p: &LatticeParams, particles: usize) -> f64 {
    let n = particles as f64;
    let eps = p.onsite.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    4.0 * p.hopping.abs() * n + 0.5 * p.interaction.abs() * n * n + eps * n
}

//! Sectioned key-value run configuration.
//!
//! ```text
//! [output]
//! name = fig1-persistence
//!
//! [grid]
//! x_min = -3.0
//! x_max = 3.0
//! n_points = 6001        # or: dx = 0.001
//!
//! [solver]
//! eps = 0.001
//! dt = 0.0001
//! t_end = 10.0
//!
//! [model.1]
//! kind = quadratic       # quadratic (r, g, theta) | affine (coeffs) | custom (coeffs, competition)
//! r = 0.25
//! g = 1.0
//! theta = 0.0
//!
//! [schedule]
//! segments = 0:1         # start:model pairs, models numbered from 1
//!
//! [ic]
//! kind = box             # box (b, c, mass) | gaussian (center, mass)
//! b = -0.6               # | ground_state (g, center, mass) | mixture ([ic.1], [ic.2], ...)
//! c = -0.4
//! mass = 0.2             # a number, `eps` or `k*eps`
//! ```
//!
//! Further sections: `[hj]` (x0, m0, dt, t_end) and `[sweep]` (periods, burn_in_periods,
//! min_burn_in, extinction_threshold). Polynomial coefficients are listed in ascending order.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use diraclab_core::model::{
    ConsumptionWeight, EnvironmentSchedule, GrowthModel, InitialCondition, Mass, Polynomial, Segment, TraitGrid,
};
use diraclab_core::scenarios::{HjSettings, Preset, SweepSettings};
use diraclab_core::solver::{Boundary, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line of the offending entry, when it came from a file.
    pub line: Option<usize>,
    /// `section.key` (or just the section) the message refers to.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None if self.field.is_empty() => f.write_str(&self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.into(), message: message.into() }
}

/// A parsed run: the scenario bundle plus output naming.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub preset: Preset,
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
    used: bool,
}

#[derive(Debug, Clone)]
struct Section {
    line: Option<usize>,
    entries: BTreeMap<String, Entry>,
}

/// Raw sections before interpretation; overrides are applied at this level.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, Section>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(Some(lineno), content, "unterminated section header"))?
                    .trim();
                if name.is_empty() {
                    return Err(err(Some(lineno), "", "empty section name"));
                }
                if raw.sections.contains_key(name) {
                    return Err(err(Some(lineno), name, "section defined twice"));
                }
                raw.sections.insert(name.to_string(), Section { line: Some(lineno), entries: BTreeMap::new() });
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(Some(lineno), "", format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let section = current.as_ref().ok_or_else(|| err(Some(lineno), key, "entry outside of any section"))?;
            if key.is_empty() {
                return Err(err(Some(lineno), section.as_str(), "empty key"));
            }
            let entries = &mut raw.sections.get_mut(section).expect("current section").entries;
            if entries.contains_key(key) {
                return Err(err(Some(lineno), format!("{section}.{key}"), "key defined twice"));
            }
            entries.insert(key.to_string(), Entry { value: value.to_string(), line: Some(lineno), used: false });
        }
        Ok(raw)
    }

    /// Applies `section.key=value`; the section is created if needed.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| err(None, assignment, "override must look like section.key=value"))?;
        let path = path.trim();
        let (section, key) =
            path.rsplit_once('.').ok_or_else(|| err(None, path, "override key must look like section.key"))?;
        if section.is_empty() || key.is_empty() {
            return Err(err(None, path, "override key must look like section.key"));
        }
        let sec = self
            .sections
            .entry(section.to_string())
            .or_insert_with(|| Section { line: None, entries: BTreeMap::new() });
        sec.entries.insert(key.to_string(), Entry { value: value.trim().to_string(), line: None, used: false });
        Ok(())
    }

    pub fn into_run_config(mut self) -> Result<RunConfig, ConfigError> {
        let cfg = build(&mut self)?;
        // anything left unread is a typo or an unsupported option
        for (name, sec) in &self.sections {
            if let Some((key, e)) = sec.entries.iter().find(|(_, e)| !e.used) {
                return Err(err(e.line, format!("{name}.{key}"), "unknown key"));
            }
            let known = ["output", "grid", "solver", "schedule", "ic", "hj", "sweep"];
            let indexed = name.strip_prefix("model.").or_else(|| name.strip_prefix("ic."));
            if !known.contains(&name.as_str()) && indexed.is_none() {
                return Err(err(sec.line, name.as_str(), "unknown section"));
            }
        }
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        RawConfig::parse(text)?.into_run_config()
    }

    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.set(o)?;
        }
        raw.into_run_config()
    }

    pub fn from_preset(preset: Preset) -> Self {
        Self { name: preset.id.clone(), preset }
    }

    pub fn to_text(&self) -> String {
        serialize(self)
    }
}

struct Reader<'a> {
    raw: &'a mut RawConfig,
    section: String,
}

impl<'a> Reader<'a> {
    fn new(raw: &'a mut RawConfig, section: &str) -> Self {
        Self { raw, section: section.to_string() }
    }

    fn exists(&self) -> bool {
        self.raw.sections.contains_key(&self.section)
    }

    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.section)
    }

    fn take(&mut self, key: &str) -> Option<(String, Option<usize>)> {
        let e = self.raw.sections.get_mut(&self.section)?.entries.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn header_line(&self) -> Option<usize> {
        self.raw.sections.get(&self.section).and_then(|s| s.line)
    }

    fn required(&mut self, key: &str) -> Result<(String, Option<usize>), ConfigError> {
        let line = self.header_line();
        let field = self.field(key);
        self.take(key).ok_or_else(|| err(line, field, "missing required key"))
    }

    fn number_from(&self, key: &str, v: &str, line: Option<usize>) -> Result<f64, ConfigError> {
        let x: f64 = v.parse().map_err(|_| err(line, self.field(key), format!("expected a number, got `{v}`")))?;
        if !x.is_finite() {
            return Err(err(line, self.field(key), format!("expected a finite number, got `{v}`")));
        }
        Ok(x)
    }

    fn num(&mut self, key: &str) -> Result<f64, ConfigError> {
        let (v, line) = self.required(key)?;
        self.number_from(key, &v, line)
    }

    fn num_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.take(key) {
            Some((v, line)) => self.number_from(key, &v, line),
            None => Ok(default),
        }
    }

    fn opt_num(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            Some((v, line)) => self.number_from(key, &v, line).map(Some),
            None => Ok(None),
        }
    }

    fn count_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            Some((v, line)) => {
                v.parse().map_err(|_| err(line, self.field(key), format!("expected a nonnegative integer, got `{v}`")))
            }
            None => Ok(default),
        }
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (v, line) = self.required(key)?;
        self.list_from(key, &v, line)
    }

    fn list_from(&self, key: &str, v: &str, line: Option<usize>) -> Result<Vec<f64>, ConfigError> {
        let out = v
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| self.number_from(key, s, line))
            .collect::<Result<Vec<_>, _>>()?;
        if out.is_empty() {
            return Err(err(line, self.field(key), "expected at least one number"));
        }
        Ok(out)
    }

    fn string(&mut self, key: &str) -> Result<(String, Option<usize>), ConfigError> {
        self.required(key)
    }

    fn mass(&mut self, key: &str) -> Result<Mass, ConfigError> {
        let (v, line) = self.required(key)?;
        let text = v.replace(' ', "");
        if text == "eps" {
            return Ok(Mass::PerEpsilon(1.0));
        }
        if let Some(coef) = text.strip_suffix("*eps") {
            return Ok(Mass::PerEpsilon(self.number_from(key, coef, line)?));
        }
        Ok(Mass::Fixed(self.number_from(key, &text, line)?))
    }
}

fn model_err<E: fmt::Display>(line: Option<usize>, field: &str) -> impl FnOnce(E) -> ConfigError + '_ {
    move |e| err(line, field, e.to_string())
}

fn build(raw: &mut RawConfig) -> Result<RunConfig, ConfigError> {
    let name = {
        let mut r = Reader::new(raw, "output");
        r.take("name").map(|(v, _)| v).unwrap_or_else(|| "run".to_string())
    };

    let grid = {
        let mut r = Reader::new(raw, "grid");
        let line = r.header_line();
        let x_min = r.num_or("x_min", -3.0)?;
        let x_max = r.num_or("x_max", 3.0)?;
        let n = r.take("n_points");
        let dx = r.opt_num("dx")?;
        match (n, dx) {
            (Some(_), Some(_)) => return Err(err(line, "grid", "give either n_points or dx, not both")),
            (Some((v, l)), None) => {
                let n: usize =
                    v.parse().map_err(|_| err(l, "grid.n_points", format!("expected an integer, got `{v}`")))?;
                TraitGrid::new(x_min, x_max, n).map_err(model_err(l, "grid.n_points"))?
            }
            (None, dx) => TraitGrid::with_spacing(x_min, x_max, dx.unwrap_or(1e-3)).map_err(model_err(line, "grid"))?,
        }
    };

    let solver = {
        let mut r = Reader::new(raw, "solver");
        let line = r.header_line();
        let eps = r.num_or("eps", 1e-3)?;
        let dt = r.num_or("dt", 1e-4)?;
        let t_end = r.num_or("t_end", 10.0)?;
        let snapshot_stride = r.count_or("snapshot_stride", 0)?;
        let density_floor = r.num_or("density_floor", 0.0)?;
        let u_floor = r.num_or("u_floor", diraclab_core::diagnostics::DEFAULT_U_FLOOR)?;
        let psi = match r.take("psi") {
            None => ConsumptionWeight::default(),
            Some((v, l)) => {
                let c = r.list_from("psi", &v, l)?;
                if c.len() == 1 {
                    ConsumptionWeight::Constant(c[0])
                } else {
                    ConsumptionWeight::PolynomialPositive(Polynomial::new(c))
                }
            }
        };
        let cfg = SolverConfig {
            eps,
            dt,
            t_end,
            grid: grid.clone(),
            boundary: Boundary::NeumannZeroFlux,
            snapshot_stride,
            density_floor,
            psi,
            u_floor,
        };
        cfg.validate().map_err(model_err(line, "solver"))?;
        cfg
    };

    let models = {
        let mut indexed: Vec<(usize, String)> = Vec::new();
        for (name, sec) in &raw.sections {
            if let Some(idx) = name.strip_prefix("model.") {
                let k: usize = idx
                    .parse()
                    .ok()
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| err(sec.line, name.as_str(), "models are numbered 1, 2, ..."))?;
                indexed.push((k, name.clone()));
            }
        }
        indexed.sort();
        if indexed.is_empty() {
            return Err(err(None, "model.1", "at least one [model.N] section is required"));
        }
        for (pos, (k, name)) in indexed.iter().enumerate() {
            if *k != pos + 1 {
                let line = raw.sections[name].line;
                return Err(err(line, name.as_str(), format!("expected [model.{}] next", pos + 1)));
            }
        }
        let mut out = Vec::new();
        for (_, name) in &indexed {
            out.push(read_model(&mut Reader::new(raw, name))?);
        }
        out
    };

    let schedule = {
        let mut r = Reader::new(raw, "schedule");
        let segments = match r.take("segments") {
            None => vec![Segment { t_start: 0.0, model: 0 }],
            Some((v, line)) => parse_segments(&v, line, models.len())?,
        };
        let period = r.opt_num("period")?;
        let line = r.header_line();
        EnvironmentSchedule::new(segments, period).map_err(model_err(line, "schedule"))?
    };

    let ic = {
        let mut r = Reader::new(raw, "ic");
        if !r.exists() {
            return Err(err(None, "ic", "an [ic] section is required"));
        }
        let (kind, line) = r.string("kind")?;
        let ic = if kind == "mixture" {
            let mut parts = Vec::new();
            for k in 1.. {
                let name = format!("ic.{k}");
                let mut sub = Reader::new(raw, &name);
                if !sub.exists() {
                    break;
                }
                let (kind, line) = sub.string("kind")?;
                if kind == "mixture" {
                    return Err(err(line, format!("{name}.kind"), "mixtures cannot be nested"));
                }
                parts.push(read_component(&mut sub, &kind, line)?);
            }
            if parts.is_empty() {
                return Err(err(line, "ic.kind", "a mixture needs [ic.1], [ic.2], ... sections"));
            }
            InitialCondition::Mixture(parts)
        } else {
            read_component(&mut r, &kind, line)?
        };
        ic.validate().map_err(model_err(line, "ic"))?;
        // sampling catches supports outside the grid
        ic.sample(&grid, solver.eps).map_err(model_err(line, "ic"))?;
        ic
    };

    let hj = {
        let mut r = Reader::new(raw, "hj");
        let (c0, m_default) = match &ic {
            InitialCondition::Box { b, c, .. } => (0.5 * (b + c), 1.0),
            InitialCondition::Mixture(parts) => parts.first().and_then(|p| p.gaussian_shape()).unwrap_or((0.0, 1.0)),
            other => other.gaussian_shape().unwrap_or((0.0, 1.0)),
        };
        let s = HjSettings {
            x0: r.num_or("x0", c0)?,
            m0: r.num_or("m0", m_default)?,
            dt: r.num_or("dt", 1e-3)?,
            t_end: r.num_or("t_end", solver.t_end)?,
        };
        let line = r.header_line();
        if !(s.m0 > 0.0) {
            return Err(err(line, "hj.m0", "curvature must be positive"));
        }
        if !(s.dt > 0.0) {
            return Err(err(line, "hj.dt", "must be positive"));
        }
        if !(s.t_end >= 0.0) {
            return Err(err(line, "hj.t_end", "must be nonnegative"));
        }
        s
    };

    let sweep = {
        let mut r = Reader::new(raw, "sweep");
        if r.exists() {
            let d = SweepSettings::default();
            let periods = match r.take("periods") {
                Some((v, l)) => r.list_from("periods", &v, l)?,
                None => Vec::new(),
            };
            if let Some(p) = periods.iter().find(|p| !(**p > 0.0)) {
                return Err(err(r.header_line(), "sweep.periods", format!("periods must be positive, got {p}")));
            }
            Some(SweepSettings {
                periods,
                burn_in_periods: r.count_or("burn_in_periods", d.burn_in_periods)?,
                min_burn_in: r.num_or("min_burn_in", d.min_burn_in)?,
                extinction_threshold: r.num_or("extinction_threshold", d.extinction_threshold)?,
            })
        } else {
            None
        }
    };

    let used: Vec<usize> = schedule.model_ids().collect();
    for &m in &used {
        solver.check_stability(&models[m]).map_err(|e| {
            err(
                raw.sections.get(&format!("model.{}", m + 1)).and_then(|s| s.line),
                format!("model.{}", m + 1),
                e.to_string(),
            )
        })?;
    }

    Ok(RunConfig { name: name.clone(), preset: Preset { id: name, solver, models, schedule, ic, hj, sweep } })
}

fn read_model(r: &mut Reader<'_>) -> Result<GrowthModel, ConfigError> {
    let (kind, line) = r.string("kind")?;
    let field = r.section.clone();
    let model = match kind.as_str() {
        "quadratic" => GrowthModel::quadratic(r.num("r")?, r.num("g")?, r.num_or("theta", 0.0)?),
        "affine" => GrowthModel::separable(Polynomial::new(r.list("coeffs")?)),
        "custom" => GrowthModel::custom(Polynomial::new(r.list("coeffs")?), r.num("competition")?),
        other => {
            return Err(err(
                line,
                format!("{field}.kind"),
                format!("unknown model kind `{other}` (quadratic, affine, custom)"),
            ))
        }
    };
    model.map_err(|e| err(line, field, e.to_string()))
}

fn read_component(r: &mut Reader<'_>, kind: &str, line: Option<usize>) -> Result<InitialCondition, ConfigError> {
    Ok(match kind {
        "box" => InitialCondition::Box { b: r.num("b")?, c: r.num("c")?, mass: r.mass("mass")? },
        "gaussian" => InitialCondition::Gaussian { center: r.num("center")?, mass: r.mass("mass")? },
        "ground_state" => {
            InitialCondition::GroundStateGaussian { g: r.num("g")?, center: r.num("center")?, mass: r.mass("mass")? }
        }
        other => {
            return Err(err(
                line,
                r.field("kind"),
                format!("unknown initial condition `{other}` (box, gaussian, ground_state, mixture)"),
            ))
        }
    })
}

fn parse_segments(v: &str, line: Option<usize>, n_models: usize) -> Result<Vec<Segment>, ConfigError> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (t, m) = s
                .split_once(':')
                .ok_or_else(|| err(line, "schedule.segments", format!("expected start:model, got `{s}`")))?;
            let t_start: f64 =
                t.trim().parse().map_err(|_| err(line, "schedule.segments", format!("bad start time `{t}`")))?;
            let model: usize =
                m.trim().parse().map_err(|_| err(line, "schedule.segments", format!("bad model number `{m}`")))?;
            if model == 0 || model > n_models {
                return Err(err(line, "schedule.segments", format!("model {model} is not defined")));
            }
            Ok(Segment { t_start, model: model - 1 })
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn nums(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")
}

fn mass(m: &Mass) -> String {
    match *m {
        Mass::Fixed(v) => num(v),
        Mass::PerEpsilon(1.0) => "eps".into(),
        Mass::PerEpsilon(c) => format!("{}*eps", num(c)),
    }
}

fn component(out: &mut String, ic: &InitialCondition) {
    match ic {
        InitialCondition::Box { b, c, mass: m } => {
            let _ = write!(out, "kind = box\nb = {}\nc = {}\nmass = {}\n", num(*b), num(*c), mass(m));
        }
        InitialCondition::Gaussian { center, mass: m } => {
            let _ = write!(out, "kind = gaussian\ncenter = {}\nmass = {}\n", num(*center), mass(m));
        }
        InitialCondition::GroundStateGaussian { g, center, mass: m } => {
            let _ =
                write!(out, "kind = ground_state\ng = {}\ncenter = {}\nmass = {}\n", num(*g), num(*center), mass(m));
        }
        InitialCondition::Mixture(_) => unreachable!("nested mixtures are rejected by validation"),
    }
}

fn serialize(cfg: &RunConfig) -> String {
    let p = &cfg.preset;
    let s = &p.solver;
    let mut out = String::new();
    let _ = writeln!(out, "[output]\nname = {}\n", cfg.name);
    let _ = writeln!(
        out,
        "[grid]\nx_min = {}\nx_max = {}\nn_points = {}\n",
        num(s.grid.x_min()),
        num(s.grid.x_max()),
        s.grid.n_points()
    );
    let psi = match &s.psi {
        ConsumptionWeight::Constant(c) => num(*c),
        ConsumptionWeight::PolynomialPositive(poly) => {
            let c = poly.coeffs();
            // a one-coefficient list would read back as a constant
            if c.len() == 1 {
                format!("{}, 0.0", num(c[0]))
            } else {
                nums(c)
            }
        }
    };
    let _ = writeln!(
        out,
        "[solver]\neps = {}\ndt = {}\nt_end = {}\nsnapshot_stride = {}\ndensity_floor = {}\nu_floor = {}\npsi = {}\n",
        num(s.eps),
        num(s.dt),
        num(s.t_end),
        s.snapshot_stride,
        num(s.density_floor),
        num(s.u_floor),
        psi
    );
    for (k, m) in p.models.iter().enumerate() {
        let _ = writeln!(out, "[model.{}]", k + 1);
        match m {
            GrowthModel::QuadraticConcave { r, g, theta } => {
                let _ = writeln!(out, "kind = quadratic\nr = {}\ng = {}\ntheta = {}", num(*r), num(*g), num(*theta));
            }
            GrowthModel::SeparableAffine { a } => {
                let _ = writeln!(out, "kind = affine\ncoeffs = {}", nums(a.coeffs()));
            }
            GrowthModel::Custom { a, competition } => {
                let _ =
                    writeln!(out, "kind = custom\ncoeffs = {}\ncompetition = {}", nums(a.coeffs()), num(*competition));
            }
        }
        out.push('\n');
    }
    let segs: Vec<String> =
        p.schedule.segments().iter().map(|sg| format!("{}:{}", num(sg.t_start), sg.model + 1)).collect();
    let _ = writeln!(out, "[schedule]\nsegments = {}", segs.join(", "));
    if let Some(period) = p.schedule.period() {
        let _ = writeln!(out, "period = {}", num(period));
    }
    out.push('\n');
    out.push_str("[ic]\n");
    match &p.ic {
        InitialCondition::Mixture(parts) => {
            out.push_str("kind = mixture\n");
            for (k, part) in parts.iter().enumerate() {
                let _ = writeln!(out, "\n[ic.{}]", k + 1);
                component(&mut out, part);
            }
        }
        other => component(&mut out, other),
    }
    let h = &p.hj;
    let _ =
        writeln!(out, "\n[hj]\nx0 = {}\nm0 = {}\ndt = {}\nt_end = {}", num(h.x0), num(h.m0), num(h.dt), num(h.t_end));
    if let Some(sw) = &p.sweep {
        out.push_str("\n[sweep]\n");
        if !sw.periods.is_empty() {
            let _ = writeln!(out, "periods = {}", nums(&sw.periods));
        }
        let _ = writeln!(
            out,
            "burn_in_periods = {}\nmin_burn_in = {}\nextinction_threshold = {}",
            sw.burn_in_periods,
            num(sw.min_burn_in),
            num(sw.extinction_threshold)
        );
    }
    out
}

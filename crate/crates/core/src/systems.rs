//! Built-in continuous self-maps and user-defined piecewise polynomial maps.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{Domain, Point};

pub const BUILTIN_NAMES: [&str; 6] = [
    "doubling",
    "rotation",
    "logistic",
    "tent",
    "north_south",
    "cat_map",
];

/// Tolerance for a user map leaving its interval.
pub const ENDOMORPHISM_TOL: f64 = 1e-9;

const ENDOMORPHISM_SAMPLES: usize = 1000;

/// A polynomial on each piece of a partition of an interval, with
/// coefficients in ascending powers of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    lipschitz: f64,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>, lipschitz: f64) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::Validation("need at least two breakpoints".into()));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if coeffs.len() != breaks.len() - 1 {
            return Err(Error::Validation(format!(
                "{} pieces need {} coefficient lists, got {}",
                breaks.len() - 1,
                breaks.len() - 1,
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Validation(
                "every piece needs a nonempty list of finite coefficients".into(),
            ));
        }
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::Validation(format!(
                "lipschitz constant {lipschitz} must be finite and nonnegative"
            )));
        }
        Ok(PiecewisePolynomial {
            breaks,
            coeffs,
            lipschitz,
        })
    }

    pub fn domain(&self) -> Domain {
        Domain::interval(self.breaks[0], *self.breaks.last().unwrap()).unwrap()
    }

    /// Raw value, without clamping into the domain.
    pub fn value(&self, x: f64) -> f64 {
        let piece = self
            .breaks
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
            .min(self.coeffs.len() - 1);
        self.coeffs[piece]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapKind {
    Doubling,
    Rotation { alpha: f64 },
    Logistic { r: f64 },
    Tent { s: f64 },
    NorthSouth { beta: f64 },
    CatMap,
    Piecewise(PiecewisePolynomial),
}

/// A continuous map `f: X -> X` together with per-box Lipschitz bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDef {
    name: String,
    domain: Domain,
    map: MapKind,
    params: BTreeMap<String, f64>,
    warning: Option<String>,
}

fn param_in(
    params: &BTreeMap<String, f64>,
    name: &str,
    default: f64,
    ok: impl Fn(f64) -> bool,
    reason: &str,
) -> Result<f64> {
    let v = params.get(name).copied().unwrap_or(default);
    if v.is_finite() && ok(v) {
        Ok(v)
    } else {
        Err(Error::Parameter {
            name: name.to_string(),
            value: v,
            reason: reason.to_string(),
        })
    }
}

/// Looks up a built-in system by name.
///
/// | name | domain | parameter (default) |
/// |------|--------|---------------------|
/// | `doubling` | circle | none |
/// | `rotation` | circle | `alpha` in `[0,1)` (`sqrt(2)-1`) |
/// | `logistic` | `[0,1]` | `r` in `[0,4]` (4) |
/// | `tent` | `[0,1]` | `s` in `[0,2]` (2) |
/// | `north_south` | circle | `beta` in `(0,1]` (1) |
/// | `cat_map` | torus | none |
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<SystemDef> {
    let allowed: &[&str] = match name {
        "doubling" | "cat_map" => &[],
        "rotation" => &["alpha"],
        "logistic" => &["r"],
        "tent" => &["s"],
        "north_south" => &["beta"],
        _ => return Err(Error::UnknownSystem(name.to_string())),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Validation(format!(
            "system '{name}' has no parameter '{k}'"
        )));
    }
    let (domain, map) = match name {
        "doubling" => (Domain::circle(), MapKind::Doubling),
        "rotation" => {
            let alpha = param_in(
                params,
                "alpha",
                2f64.sqrt() - 1.0,
                |a| (0.0..1.0).contains(&a),
                "must lie in [0,1)",
            )?;
            (Domain::circle(), MapKind::Rotation { alpha })
        }
        "logistic" => {
            let r = param_in(
                params,
                "r",
                4.0,
                |r| (0.0..=4.0).contains(&r),
                "must lie in [0,4]",
            )?;
            (Domain::unit_interval(), MapKind::Logistic { r })
        }
        "tent" => {
            let s = param_in(
                params,
                "s",
                2.0,
                |s| (0.0..=2.0).contains(&s),
                "must lie in [0,2]",
            )?;
            (Domain::unit_interval(), MapKind::Tent { s })
        }
        "north_south" => {
            let beta = param_in(
                params,
                "beta",
                1.0,
                |b| b > 0.0 && b <= 1.0,
                "must lie in (0,1]",
            )?;
            (Domain::circle(), MapKind::NorthSouth { beta })
        }
        _ => (Domain::torus(), MapKind::CatMap),
    };
    Ok(SystemDef::from_parts(name.to_string(), domain, map))
}

/// Shorthand for [`builtin`] with a list of parameters.
pub fn builtin_with(name: &str, params: &[(&str, f64)]) -> Result<SystemDef> {
    let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin(name, &map)
}

impl SystemDef {
    fn from_parts(name: String, domain: Domain, map: MapKind) -> Self {
        let params = match &map {
            MapKind::Rotation { alpha } => [("alpha".to_string(), *alpha)].into(),
            MapKind::Logistic { r } => [("r".to_string(), *r)].into(),
            MapKind::Tent { s } => [("s".to_string(), *s)].into(),
            MapKind::NorthSouth { beta } => [("beta".to_string(), *beta)].into(),
            _ => BTreeMap::new(),
        };
        SystemDef {
            name,
            domain,
            map,
            params,
            warning: None,
        }
    }

    /// Wraps a piecewise polynomial after sampling it for domain escapes.
    pub fn piecewise(name: impl Into<String>, poly: PiecewisePolynomial) -> Result<Self> {
        let domain = poly.domain();
        let (lo, hi) = domain.axis(0);
        let mut warnings = Vec::new();
        let mut worst: f64 = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        let mut steepest: f64 = 0.0;
        for i in 0..ENDOMORPHISM_SAMPLES {
            let x = lo + (hi - lo) * i as f64 / (ENDOMORPHISM_SAMPLES - 1) as f64;
            let y = poly.value(x);
            if !y.is_finite() {
                return Err(Error::Validation(format!("map is not finite at {x}")));
            }
            worst = worst.max(lo - y).max(y - hi);
            if let Some((px, py)) = prev {
                steepest = steepest.max((y - py).abs() / (x - px));
            }
            prev = Some((x, y));
        }
        if worst > ENDOMORPHISM_TOL {
            return Err(Error::Validation(format!(
                "map leaves [{lo}, {hi}] by {worst:e} (tolerance {ENDOMORPHISM_TOL:e})"
            )));
        }
        if worst > 0.0 {
            warnings.push(format!(
                "map leaves the interval by {worst:e}; images are clamped"
            ));
        }
        for (k, &b) in poly
            .breaks
            .iter()
            .enumerate()
            .skip(1)
            .take(poly.coeffs.len() - 1)
        {
            let left = poly.coeffs[k - 1]
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * b + c);
            let right = poly.coeffs[k].iter().rev().fold(0.0, |acc, &c| acc * b + c);
            if (left - right).abs() > ENDOMORPHISM_TOL {
                warnings.push(format!(
                    "discontinuity of size {:e} at {b}",
                    (left - right).abs()
                ));
            }
        }
        if steepest > poly.lipschitz * (1.0 + 1e-9) + 1e-12 {
            warnings.push(format!(
                "sampled slope {steepest} exceeds declared lipschitz constant {}",
                poly.lipschitz
            ));
        }
        let mut sys = SystemDef::from_parts(name.into(), domain, MapKind::Piecewise(poly));
        sys.params
            .insert("lipschitz".into(), sys.global_lipschitz());
        if !warnings.is_empty() {
            sys.warning = Some(warnings.join("; "));
        }
        Ok(sys)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn map(&self) -> &MapKind {
        &self.map
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Set when sampling found something suspicious that was not fatal.
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `f(p)` for a point already in the domain. The result is wrapped or
    /// clamped into the domain.
    pub fn eval(&self, p: &Point) -> Point {
        let x = p.x();
        let raw = match &self.map {
            MapKind::Doubling => Point::new1(2.0 * x),
            MapKind::Rotation { alpha } => Point::new1(x + alpha),
            MapKind::Logistic { r } => Point::new1(r * x * (1.0 - x)),
            MapKind::Tent { s } => Point::new1(s * x.min(1.0 - x)),
            MapKind::NorthSouth { beta } => Point::new1(x - beta / TAU * (TAU * x).sin()),
            MapKind::CatMap => {
                let y = p.get(1);
                Point::new2(2.0 * x + y, x + y)
            }
            MapKind::Piecewise(poly) => Point::new1(poly.value(x)),
        };
        self.domain.clamp(raw)
    }

    /// Checked evaluation: wraps periodic inputs, rejects points outside a
    /// non-periodic domain.
    pub fn evaluate(&self, p: &Point) -> Result<Point> {
        let q = self.domain.wrap(*p)?;
        Ok(self.eval(&q))
    }

    /// `f^n(p)`.
    pub fn iterate(&self, p: &Point, n: usize) -> Point {
        let mut q = *p;
        for _ in 0..n {
            q = self.eval(&q);
        }
        q
    }

    /// A Lipschitz constant valid on the whole domain.
    pub fn global_lipschitz(&self) -> f64 {
        match &self.map {
            MapKind::Doubling => 2.0,
            MapKind::Rotation { .. } => 1.0,
            MapKind::Logistic { r } => *r,
            MapKind::Tent { s } => *s,
            MapKind::NorthSouth { beta } => 1.0 + beta,
            MapKind::CatMap => cat_map_norm(),
            MapKind::Piecewise(poly) => poly.lipschitz,
        }
    }

    /// A Lipschitz constant valid on the box with the given closed bounds.
    pub fn lipschitz_on(&self, bounds: &[(f64, f64)]) -> f64 {
        match &self.map {
            MapKind::Logistic { r } => {
                let (a, b) = bounds[0];
                r * (1.0 - 2.0 * a).abs().max((1.0 - 2.0 * b).abs())
            }
            MapKind::NorthSouth { beta } => {
                let (cmin, cmax) = cos_range(TAU * bounds[0].0, TAU * bounds[0].1);
                (1.0 - beta * cmin).abs().max((1.0 - beta * cmax).abs())
            }
            _ => self.global_lipschitz(),
        }
    }
}

/// Operator norm of `[[2,1],[1,1]]`, i.e. its larger eigenvalue.
pub fn cat_map_norm() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

/// Range of `cos` over `[a, b]`.
fn cos_range(a: f64, b: f64) -> (f64, f64) {
    if b - a >= TAU {
        return (-1.0, 1.0);
    }
    let (ca, cb) = (a.cos(), b.cos());
    let mut lo = ca.min(cb);
    let mut hi = ca.max(cb);
    // maxima at 2k*pi, minima at (2k+1)*pi
    let k_max = (a / TAU).ceil();
    if k_max * TAU <= b {
        hi = 1.0;
    }
    let k_min = ((a - PI) / TAU).ceil();
    if k_min * TAU + PI <= b {
        lo = -1.0;
    }
    (lo, hi)
}

/// Config fragment describing a system: either a built-in by name or a
/// piecewise polynomial on an interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breaks: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl SystemConfig {
    pub fn builtin(name: &str) -> Self {
        SystemConfig {
            kind: "builtin".into(),
            name: Some(name.into()),
            params: None,
            breaks: None,
            coeffs: None,
            lipschitz: None,
        }
    }
}

/// Builds a system from its config fragment.
pub fn parse_system(cfg: &SystemConfig) -> Result<SystemDef> {
    match cfg.kind.as_str() {
        "builtin" => {
            if cfg.breaks.is_some() || cfg.coeffs.is_some() || cfg.lipschitz.is_some() {
                return Err(Error::Validation(
                    "breaks/coeffs/lipschitz only apply to piecewise systems".into(),
                ));
            }
            let name = cfg
                .name
                .as_deref()
                .ok_or_else(|| Error::Validation("builtin system needs a name".into()))?;
            builtin(name, &cfg.params.clone().unwrap_or_default())
        }
        "piecewise" => {
            if cfg.params.is_some() {
                return Err(Error::Validation("piecewise systems take no params".into()));
            }
            let missing = |f: &str| Error::Validation(format!("piecewise system needs '{f}'"));
            let poly = PiecewisePolynomial::new(
                cfg.breaks.clone().ok_or_else(|| missing("breaks"))?,
                cfg.coeffs.clone().ok_or_else(|| missing("coeffs"))?,
                cfg.lipschitz.ok_or_else(|| missing("lipschitz"))?,
            )?;
            SystemDef::piecewise(cfg.name.clone().unwrap_or_else(|| "piecewise".into()), poly)
        }
        other => Err(Error::Validation(format!(
            "system type must be 'builtin' or 'piecewise', got '{other}'"
        ))),
    }
}

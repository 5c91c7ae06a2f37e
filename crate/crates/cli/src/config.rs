//! Flat `key=value` run configuration.
//!
//! Values come from a preset, then a config file, then command-line flags;
//! later sources override earlier ones. Unset keys take the defaults listed in
//! [`KEYS`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use qcv_core::boxop::Stencil;
use qcv_core::sim::Scheme;

use crate::error::{CliError, Result};
use crate::opspec::{parse_operator, split_operators};

/// Every accepted key, its default (empty: no default) and a short description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("command", "", "ops-table | equilibrium | simulate | error-scan | convergence"),
    ("system", "bodies", "equilibrium system: bodies | l4"),
    ("operators", "forward;backward;central;quantum", "';'-separated operator specs"),
    ("eps", "0.1", "step for ops-table"),
    ("omega", "1", "frame pulsation"),
    ("beta", "-1", "potential exponent"),
    ("mu", "0.012", "mass ratio of the light primary"),
    ("g", "1", "gravitational constant"),
    ("masses", "", "','-separated masses"),
    ("lambda", "", "equilibrium multiplier (default omega^2)"),
    ("guess", "", "initial guess 'x,y;x,y;...'"),
    ("m", "50", "steps per period"),
    ("k", "5", "horizon in multiples of pi"),
    ("scan_stride", "5", "error scan spacing in steps"),
    ("scan_count", "100", "number of error scan intervals"),
    ("delta", "0.01", "test particle offset along a"),
    ("delta_prime", "0.01", "test particle offset along b"),
    ("scheme", "DHE", "DEL | DHE | classical"),
    ("eps_list", "0.1,0.01,0.001,0.0001", "decreasing steps for convergence"),
    ("out", "", "main CSV output path"),
    ("metrics", "", "metrics CSV output path (simulate)"),
];

/// Named configurations; each is itself valid config text.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "ops-default",
        "command=ops-table\noperators=forward;backward;central;quantum\neps=0.1\nomega=1\nbeta=-1\n",
    ),
    (
        "equilateral3",
        "command=equilibrium\nsystem=bodies\nmasses=1,1,1\nlambda=3\nguess=0.62,0.05;-0.25,0.52;-0.3,-0.6\n",
    ),
    ("l4", "command=equilibrium\nsystem=l4\nmu=0.012\n"),
    (
        "collinear3",
        "command=equilibrium\nsystem=bodies\nmasses=1,1,1\nlambda=1\nguess=-1.1,0.02;0.03,0;0.95,-0.01\n",
    ),
    (
        "fig-earth-moon",
        "command=simulate\noperators=quantum\nmu=0.012\nm=50\nk=5\ndelta=0.01\ndelta_prime=0.01\nscheme=DHE\n",
    ),
    (
        "fig-unstable",
        "command=simulate\noperators=quantum\nmu=0.06\nm=50\nk=20\ndelta=0.01\ndelta_prime=0.01\nscheme=DHE\n",
    ),
    (
        "fig1",
        "command=error-scan\noperators=forward;backward;central;quantum\nmu=0.012\nm=50\ndelta=0.01\ndelta_prime=0.01\nscan_stride=5\nscan_count=100\n",
    ),
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<&'static str, String>,
}

fn canonical_key(key: &str) -> Result<&'static str> {
    let key = key.trim().replace('-', "_");
    KEYS.iter()
        .map(|(k, _, _)| *k)
        .find(|k| *k == key)
        .ok_or_else(|| CliError::usage(format!("unknown configuration key '{key}'")))
}

impl Config {
    pub fn preset(name: &str) -> Result<Config> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| CliError::usage(format!("unknown preset '{name}'")))?;
        let mut c = Config::default();
        c.merge_text(text, "preset")?;
        Ok(c)
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("{origin}:{}: expected key=value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical_key(key)?;
        self.values.insert(key, value.trim().to_string());
        Ok(())
    }

    /// The explicitly set value, or the default.
    pub fn get(&self, key: &str) -> Option<&str> {
        if let Some(v) = self.values.get(key) {
            return Some(v.as_str());
        }
        KEYS.iter()
            .find(|(k, _, _)| *k == key)
            .map(|(_, d, _)| *d)
            .filter(|d| !d.is_empty())
    }

    /// Every key with a value, in [`KEYS`] order, as config text.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, _, _) in KEYS {
            if let Some(v) = self.get(k) {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
        out
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| CliError::usage(format!("missing value for '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.required(key)?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::usage(format!("'{key}' must be a finite number, got '{v}'")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.f64(key).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.required(key)?;
        v.parse::<usize>()
            .map_err(|_| CliError::usage(format!("'{key}' must be a nonnegative integer, got '{v}'")))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.required(key)?
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::usage(format!("'{key}' has an invalid entry '{x}'")))
            })
            .collect()
    }

    pub fn points(&self, key: &str) -> Result<Vec<[f64; 2]>> {
        self.required(key)?
            .split(';')
            .map(|p| {
                let xy: Vec<&str> = p.split(',').collect();
                let parse = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
                match xy.as_slice() {
                    [x, y] => match (parse(x), parse(y)) {
                        (Some(x), Some(y)) => Ok([x, y]),
                        _ => Err(CliError::usage(format!("'{key}' has an invalid point '{p}'"))),
                    },
                    _ => Err(CliError::usage(format!("'{key}' has an invalid point '{p}'"))),
                }
            })
            .collect()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn command(&self) -> Option<&str> {
        self.get("command")
    }

    /// Operator specs paired with their stencils at step `eps`.
    pub fn operators(&self, eps: f64) -> Result<Vec<(String, Stencil)>> {
        let specs = split_operators(self.required("operators")?);
        if specs.is_empty() {
            return Err(CliError::usage("operator list is empty"));
        }
        specs
            .into_iter()
            .map(|s| parse_operator(&s, eps).map(|op| (s, op)))
            .collect()
    }

    /// `None` selects the classical reference.
    pub fn scheme(&self) -> Result<Option<Scheme>> {
        match self.required("scheme")? {
            "classical" | "CLASSICAL" | "rk4" | "RK4" => Ok(None),
            s => s
                .parse::<Scheme>()
                .map(Some)
                .map_err(|_| CliError::usage(format!("unknown scheme '{s}'"))),
        }
    }
}

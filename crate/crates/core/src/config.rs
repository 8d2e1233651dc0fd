//! Key-value run configuration.
//!
//! A config file holds one `key = value` per line; `#` starts a comment.
//! Keys may use `-` or `_`. The `case` key selects the defaults every other
//! key overrides, so it is applied first wherever it appears.

use std::path::PathBuf;

use crate::cases::Case;
use crate::error::{Error, Result};
use crate::flux::{FluxKind, LfAlpha};
use crate::lts::Rk54Predictor;
use crate::mesh::RegionSpec;
use crate::runner::RunConfig;

/// A convergence sweep over coarse mesh sizes and ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub dxs: Vec<f64>,
    pub ratios: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: RunConfig,
    pub sweep: Option<Sweep>,
}

fn bad<T>(key: &str, value: &str, what: &str) -> Result<T> {
    Err(Error::Config(format!("{key} = '{value}': expected {what}")))
}

/// A float, also accepting `a/b`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
        None => s.parse().ok(),
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Config(format!("'{s}' is not a number"))),
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(item).collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Config(format!("'{s}' is not a non-negative integer")))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => bad(key, s, "a boolean"),
    }
}

/// `lo:hi:M` entries separated by commas.
pub fn parse_regions(s: &str) -> Result<Vec<RegionSpec>> {
    parse_list(s, |r| {
        let parts: Vec<&str> = r.split(':').collect();
        if parts.len() != 3 {
            return bad("regions", r, "lo:hi:M");
        }
        Ok(RegionSpec::new(parse_number(parts[0])?, parse_number(parts[1])?, parse_usize(parts[2])?))
    })
}

fn parse_flux(s: &str) -> Result<FluxKind> {
    match s.trim() {
        "lax_friedrichs" | "lax-friedrichs" | "lf" => Ok(FluxKind::LaxFriedrichs),
        "godunov" => Ok(FluxKind::Godunov),
        "engquist_osher" | "engquist-osher" | "eo" => Ok(FluxKind::EngquistOsher),
        _ => bad("flux", s, "lax_friedrichs, godunov or engquist_osher"),
    }
}

/// Split a config file into `(key, value)` pairs in file order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value, got '{line}'", n + 1)));
        };
        out.push((normalize_key(k), v.trim().to_string()));
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

/// Apply one setting on top of `inv`.
pub fn apply(inv: &mut Invocation, key: &str, value: &str) -> Result<()> {
    let key = normalize_key(key);
    let c = &mut inv.config;
    match key.as_str() {
        "case" => {
            let case: Case = value.parse()?;
            if case != c.case {
                *c = RunConfig::new(case);
            }
        }
        "order" => c.order = parse_usize(value)?,
        "dx_coarse" | "dx" => c.dx_coarse = parse_number(value)?,
        "ratio" | "m" => c.ratio = parse_usize(value)?,
        "regions" => c.regions = Some(parse_regions(value)?),
        "layout" => c.layout = value.parse()?,
        "t_end" => c.t_end = parse_number(value)?,
        "cfl" => c.cfl = Some(parse_number(value)?),
        "limiter_cm" => c.limiter_cm = parse_number(value)?,
        "limiter" => c.limiter = parse_bool(&key, value)?,
        "interface_limiting" => c.interface_limiting = parse_bool(&key, value)?,
        "flux" => c.flux = parse_flux(value)?,
        "lf_alpha" => {
            c.lf_alpha = match value.trim() {
                "global" => LfAlpha::Global,
                "local" => LfAlpha::Local,
                _ => return bad(&key, value, "global or local"),
            }
        }
        "characteristic" => c.characteristic = parse_bool(&key, value)?,
        "stepping" => c.stepping = value.parse()?,
        "snapshots" => c.snapshots = parse_list(value, parse_number)?,
        "exclusion" => {
            c.exclusion = match value.trim() {
                "none" | "off" => None,
                v => Some(parse_number(v)?),
            }
        }
        "rk54_predictor" => {
            c.rk54_predictor = match value.trim() {
                "order_conditions" | "order-conditions" => Rk54Predictor::OrderConditions,
                "averaged" => Rk54Predictor::Averaged,
                _ => return bad(&key, value, "order_conditions or averaged"),
            }
        }
        "out" => c.out = Some(PathBuf::from(value.trim())),
        "dx_list" => {
            let dxs = parse_list(value, parse_number)?;
            inv.sweep.get_or_insert_with(|| Sweep { dxs: vec![], ratios: vec![] }).dxs = dxs;
        }
        "ratios" => {
            let ratios = parse_list(value, parse_usize)?;
            inv.sweep.get_or_insert_with(|| Sweep { dxs: vec![], ratios: vec![] }).ratios = ratios;
        }
        _ => return Err(Error::Config(format!("unknown key '{key}'"))),
    }
    Ok(())
}

/// Build an invocation from settings applied in order; `case` goes first.
pub fn build(pairs: &[(String, String)]) -> Result<Invocation> {
    let case = pairs
        .iter()
        .rev()
        .find(|(k, _)| normalize_key(k) == "case")
        .ok_or_else(|| Error::Config("no case given".into()))?
        .1
        .parse()?;
    let mut inv = Invocation {
        config: RunConfig::new(case),
        sweep: None,
    };
    for (k, v) in pairs.iter().filter(|(k, _)| normalize_key(k) != "case") {
        apply(&mut inv, k, v)?;
    }
    if let Some(sw) = inv.sweep.as_mut() {
        if sw.dxs.is_empty() {
            sw.dxs.push(inv.config.dx_coarse);
        }
        if sw.ratios.is_empty() {
            sw.ratios.push(inv.config.ratio);
        }
    }
    inv.config.validate()?;
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_syntax() {
        let p = parse_pairs("# sod run\ncase = sod\n\norder=3 # trailing\nt-end = 1.5\n").unwrap();
        assert_eq!(p, pairs(&[("case", "sod"), ("order", "3"), ("t_end", "1.5")]));
        assert!(parse_pairs("case sod").is_err());
    }

    #[test]
    fn case_defaults_then_overrides() {
        let inv = build(&pairs(&[("order", "3"), ("case", "lax"), ("ratio", "4")])).unwrap();
        assert_eq!(inv.config.case, Case::Lax);
        assert_eq!(inv.config.order, 3);
        assert_eq!(inv.config.ratio, 4);
        assert_eq!(inv.config.t_end, 1.3);
        assert!(inv.sweep.is_none());
    }

    #[test]
    fn fractions_and_lists() {
        let inv = build(&pairs(&[
            ("case", "advection_smooth"),
            ("dx-list", "1/5, 1/10,1/20"),
            ("snapshots", "0.5,1"),
            ("regions", "-1:0:2,0:1:1"),
        ]))
        .unwrap();
        let sw = inv.sweep.unwrap();
        assert_eq!(sw.dxs, vec![0.2, 0.1, 0.05]);
        assert_eq!(sw.ratios, vec![1]);
        assert_eq!(inv.config.snapshots, vec![0.5, 1.0]);
        assert_eq!(inv.config.regions.unwrap()[0], RegionSpec::new(-1.0, 0.0, 2));
    }

    #[test]
    fn rejects_bad_settings() {
        for (k, v) in [("order", "5"), ("t_end", "-1"), ("flux", "roe"), ("bogus", "1"), ("dx_coarse", "0")] {
            assert!(build(&pairs(&[("case", "burgers"), (k, v)])).is_err(), "{k}={v}");
        }
        assert!(build(&pairs(&[("case", "sod"), ("flux", "godunov")])).is_err());
        assert!(build(&pairs(&[("order", "2")])).is_err());
    }
}

//! Scenario files for the simulator.
//!
//! ```text
//! threshold = 100
//! n = 25000
//! seed = 7
//! censor_age = 108
//! entry = uniform:3          # or `threshold`
//! random_censor_rate = 0.12  # optional
//! covariate.sex = female*,male
//! marginal.sex = 0.7,0.3     # optional, uniform otherwise
//! beta.intercept = 0.74
//! beta.sex:male = -0.2       # omitted columns are 0
//! xi = -0.13
//! ```
//!
//! Profile weights are products of the per-covariate marginals.

use std::collections::BTreeMap;

use lifespan_core::design::{CovariateDecl, CovariateSchema, Profile};
use lifespan_core::likelihood::ParamVector;
use lifespan_core::simulate::{EntryDistribution, ScenarioConfig};

use crate::error::{invalid, CliError, CliResult};
use crate::io::{format_coefficients, key_value_lines, parse_f64, parse_schema};

fn parse_marginal(name: &str, value: &str, levels: usize) -> CliResult<Vec<f64>> {
    let w = value
        .split(',')
        .map(|v| parse_f64(&format!("marginal.{name}"), v.trim()))
        .collect::<CliResult<Vec<f64>>>()?;
    if w.len() != levels || w.iter().any(|x| *x < 0.0) {
        return invalid(format!("marginal.{name} needs {levels} non-negative weights"));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return invalid(format!("marginal.{name} sums to {total}, not 1"));
    }
    Ok(w.iter().map(|x| x / total).collect())
}

pub fn parse_scenario(text: &str, seed_override: Option<u64>) -> CliResult<ScenarioConfig> {
    let mut scalars = BTreeMap::new();
    let mut schema_lines = String::new();
    let mut marginals = BTreeMap::new();
    let mut betas = BTreeMap::new();
    for (line_no, (key, value)) in key_value_lines(text)? {
        let dup = if let Some(name) = key.strip_prefix("covariate.") {
            schema_lines.push_str(&format!("{name} = {value}\n"));
            false
        } else if let Some(name) = key.strip_prefix("marginal.") {
            marginals.insert(name.to_string(), value).is_some()
        } else if let Some(col) = key.strip_prefix("beta.") {
            betas.insert(col.to_string(), value).is_some()
        } else {
            scalars.insert(key.clone(), value).is_some()
        };
        if dup {
            return invalid(format!("scenario line {line_no}: duplicate key '{key}'"));
        }
    }

    let decls: Vec<CovariateDecl> = parse_schema(&schema_lines)?;
    if let Some(d) = decls.iter().find(|d| d.reference.is_none()) {
        return invalid(format!("covariate.{} must mark its reference with '*'", d.name));
    }
    let schema = CovariateSchema::new(decls)?;
    let columns = schema.column_names();
    if let Some(unknown) = betas.keys().find(|k| !columns.contains(k)) {
        return invalid(format!("beta.{unknown} is not a design column"));
    }
    let beta = columns
        .iter()
        .map(|c| betas.get(c).map_or(Ok(0.0), |v| parse_f64(&format!("beta.{c}"), v)))
        .collect::<CliResult<Vec<f64>>>()?;

    let mut take = |key: &str| scalars.remove(key);
    let required = |key: &str, v: Option<String>| {
        v.ok_or_else(|| CliError::Validation(format!("scenario is missing '{key}'")))
    };
    let xi = parse_f64("xi", &required("xi", take("xi"))?)?;
    let threshold_u = parse_f64("threshold", &required("threshold", take("threshold"))?)?;
    let censor_age = parse_f64("censor_age", &required("censor_age", take("censor_age"))?)?;
    let n_raw = required("n", take("n"))?;
    let n_individuals = n_raw
        .parse::<usize>()
        .map_err(|_| CliError::Validation(format!("'n': expected a count, got '{n_raw}'")))?;
    let file_seed = match take("seed") {
        Some(s) => Some(
            s.parse::<u64>()
                .map_err(|_| CliError::Validation(format!("'seed': expected an integer, got '{s}'")))?,
        ),
        None => None,
    };
    let entry = match take("entry").as_deref() {
        None | Some("threshold") => EntryDistribution::AtThreshold,
        Some(other) => match other.strip_prefix("uniform:") {
            Some(m) => EntryDistribution::Uniform { max_entry: parse_f64("entry", m)? },
            None => return invalid(format!("entry must be 'threshold' or 'uniform:<years>', got '{other}'")),
        },
    };
    let random_censor_rate = take("random_censor_rate")
        .map(|v| parse_f64("random_censor_rate", &v))
        .transpose()?;
    if let Some(extra) = scalars.keys().next() {
        return invalid(format!("unknown scenario key '{extra}'"));
    }

    let per_covariate = schema
        .covariates()
        .iter()
        .map(|c| {
            let n = c.categories().len();
            match marginals.remove(c.name()) {
                Some(v) => parse_marginal(c.name(), &v, n),
                None => Ok(vec![1.0 / n as f64; n]),
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    if let Some(extra) = marginals.keys().next() {
        return invalid(format!("marginal.{extra} refers to an undeclared covariate"));
    }
    let profile_weights: Vec<(Profile, f64)> = schema
        .all_profiles()
        .into_iter()
        .map(|p| {
            let w = p.0.iter().zip(&per_covariate).map(|(l, m)| m[*l]).product();
            (p, w)
        })
        .filter(|(_, w)| *w > 0.0)
        .collect();

    let cfg = ScenarioConfig {
        truth: ParamVector::new(beta, xi),
        threshold_u,
        n_individuals,
        schema,
        profile_weights,
        entry,
        censor_age,
        random_censor_rate,
        seed: seed_override.or(file_seed).unwrap_or(1),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Key-value record of the true parameters, readable as a coefficient file.
pub fn truth_sidecar(cfg: &ScenarioConfig) -> String {
    format!(
        "seed = {}\nthreshold = {}\nn = {}\n{}",
        cfg.seed,
        cfg.threshold_u,
        cfg.n_individuals,
        format_coefficients(&cfg.truth, &cfg.schema)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_coefficients;

    const TEXT: &str = "threshold = 100\nn = 500\nseed = 7\ncensor_age = 108\nentry = uniform:3\n\
        random_censor_rate = 0.12\ncovariate.sex = female*,male\ncovariate.hht = collective*,single\n\
        marginal.sex = 0.7,0.3\nbeta.intercept = 0.74\nbeta.sex:male = -0.2\nxi = -0.13\n";

    #[test]
    fn parses_a_full_scenario() {
        let cfg = parse_scenario(TEXT, None).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.truth.beta, vec![0.74, -0.2, 0.0]);
        assert_eq!(cfg.schema.covariates()[0].name(), "sex");
        assert_eq!(cfg.profile_weights.len(), 4);
        assert!((cfg.profile_weights[0].1 - 0.35).abs() < 1e-15);
        assert_eq!(cfg.entry, EntryDistribution::Uniform { max_entry: 3.0 });
        assert_eq!(parse_scenario(TEXT, Some(9)).unwrap().seed, 9);
    }

    #[test]
    fn sidecar_reads_back_as_coefficients() {
        let cfg = parse_scenario(TEXT, None).unwrap();
        assert_eq!(parse_coefficients(&truth_sidecar(&cfg), &cfg.schema).unwrap(), cfg.truth);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(parse_scenario(&TEXT.replace("xi = -0.13\n", ""), None).is_err());
        assert!(parse_scenario(&format!("{TEXT}colour = red\n"), None).is_err());
        assert!(parse_scenario(&TEXT.replace("0.7,0.3", "0.7,0.2"), None).is_err());
        assert!(parse_scenario(&TEXT.replace("female*", "female"), None).is_err());
        assert!(parse_scenario(&TEXT.replace("censor_age = 108", "censor_age = 99"), None).is_err());
    }
}

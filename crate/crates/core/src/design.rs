//! Records, covariate schema and design encoding.
//!
//! Every covariate is categorical. A design row starts with the intercept
//! `1` followed by one 0/1 indicator per non-reference category, in schema
//! order. Covariates are fixed at their value at the threshold age.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Category index per covariate, in schema order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile(pub Vec<usize>);

impl Profile {
    pub fn levels(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndividualRecord {
    pub entry_age: f64,
    /// `max(death age, censoring age)`
    pub exit_age: f64,
    /// `true` when the death was observed.
    pub event: bool,
    pub profile: Profile,
    /// Calendar year used only by descriptive summaries.
    pub period: Option<i32>,
}

impl IndividualRecord {
    pub fn new(entry_age: f64, exit_age: f64, event: bool, profile: Profile) -> Result<Self> {
        if !(entry_age.is_finite() && exit_age.is_finite()) || entry_age <= 0.0 || exit_age <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "ages must be finite and positive (entry {entry_age}, exit {exit_age})"
            )));
        }
        if exit_age < entry_age {
            return Err(Error::InvalidInput(format!(
                "exit age {exit_age} precedes entry age {entry_age}"
            )));
        }
        Ok(Self {
            entry_age,
            exit_age,
            event,
            profile,
            period: None,
        })
    }

    pub fn with_period(mut self, period: i32) -> Self {
        self.period = Some(period);
        self
    }
}

/// A covariate as declared in a schema file; the reference may still be
/// unresolved.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateDecl {
    pub name: String,
    pub categories: Vec<String>,
    pub reference: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covariate {
    name: String,
    categories: Vec<String>,
    reference: usize,
}

impl Covariate {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn reference_label(&self) -> &str {
        &self.categories[self.reference]
    }

    pub fn level_index(&self, label: &str) -> Result<usize> {
        self.categories
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownCategory {
                covariate: self.name.clone(),
                label: label.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSchema {
    covariates: Vec<Covariate>,
}

fn validate_decl(decl: &CovariateDecl) -> Result<()> {
    if decl.name.is_empty() {
        return Err(Error::InvalidInput("covariate with empty name".into()));
    }
    if decl.categories.is_empty() {
        return Err(Error::InvalidInput(format!("covariate '{}' has no categories", decl.name)));
    }
    for (i, c) in decl.categories.iter().enumerate() {
        if decl.categories[..i].contains(c) {
            return Err(Error::InvalidInput(format!(
                "duplicate category '{c}' in covariate '{}'",
                decl.name
            )));
        }
    }
    if let Some(r) = decl.reference {
        if r >= decl.categories.len() {
            return Err(Error::InvalidInput(format!(
                "reference index {r} out of range for covariate '{}'",
                decl.name
            )));
        }
    }
    Ok(())
}

impl CovariateSchema {
    /// Builds a schema whose references are all declared explicitly.
    pub fn new(decls: Vec<CovariateDecl>) -> Result<Self> {
        Self::resolve(decls, &[])
    }

    /// Builds a schema, filling missing references with the category that
    /// carries the most person-years of exposure in `records`.
    pub fn resolve(decls: Vec<CovariateDecl>, records: &[IndividualRecord]) -> Result<Self> {
        let mut covariates = Vec::with_capacity(decls.len());
        for (k, decl) in decls.iter().enumerate() {
            validate_decl(decl)?;
            if decls[..k].iter().any(|d| d.name == decl.name) {
                return Err(Error::InvalidInput(format!("duplicate covariate '{}'", decl.name)));
            }
            let reference = match decl.reference {
                Some(r) => r,
                None if records.is_empty() => {
                    return Err(Error::InvalidInput(format!(
                        "covariate '{}' has no reference category and there is no data to choose one",
                        decl.name
                    )))
                }
                None => {
                    let mut exposure = vec![0.0; decl.categories.len()];
                    for r in records {
                        if let Some(&level) = r.profile.0.get(k) {
                            if level < exposure.len() {
                                exposure[level] += r.exit_age - r.entry_age;
                            }
                        }
                    }
                    let mut best = 0;
                    for (i, &e) in exposure.iter().enumerate() {
                        if e > exposure[best] {
                            best = i;
                        }
                    }
                    best
                }
            };
            covariates.push(Covariate {
                name: decl.name.clone(),
                categories: decl.categories.clone(),
                reference,
            });
        }
        Ok(Self { covariates })
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariates.iter().position(|c| c.name == name)
    }

    /// `1 + Σ (|categories| − 1)`
    pub fn design_len(&self) -> usize {
        1 + self
            .covariates
            .iter()
            .map(|c| c.categories.len() - 1)
            .sum::<usize>()
    }

    /// Design column of `(covariate, level)`, `None` for the reference.
    pub fn column_of(&self, covariate: usize, level: usize) -> Option<usize> {
        let cov = &self.covariates[covariate];
        if level == cov.reference {
            return None;
        }
        let offset = 1 + self.covariates[..covariate]
            .iter()
            .map(|c| c.categories.len() - 1)
            .sum::<usize>();
        Some(offset + if level < cov.reference { level } else { level - 1 })
    }

    /// `intercept`, then `covariate:level` for each indicator column.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![String::from("intercept")];
        for cov in &self.covariates {
            for (i, cat) in cov.categories.iter().enumerate() {
                if i != cov.reference {
                    names.push(format!("{}:{}", cov.name, cat));
                }
            }
        }
        names
    }

    /// Returns the schema with `covariate`'s reference moved to `level`.
    pub fn with_reference(&self, covariate: usize, level: usize) -> Result<Self> {
        let mut out = self.clone();
        let cov = out
            .covariates
            .get_mut(covariate)
            .ok_or_else(|| Error::InvalidInput(format!("no covariate #{covariate}")))?;
        if level >= cov.categories.len() {
            return Err(Error::InvalidInput(format!(
                "no level #{level} in covariate '{}'",
                cov.name
            )));
        }
        cov.reference = level;
        Ok(out)
    }

    pub fn reference_profile(&self) -> Profile {
        Profile(self.covariates.iter().map(|c| c.reference).collect())
    }

    /// Profile from `(covariate, label)` pairs; every covariate needs a label.
    pub fn profile_from_labels(&self, labels: &[(&str, &str)]) -> Result<Profile> {
        for (name, _) in labels {
            if self.covariate_index(name).is_none() {
                return Err(Error::InvalidInput(format!("unknown covariate '{name}'")));
            }
        }
        let levels = self
            .covariates
            .iter()
            .map(|cov| {
                let label = labels
                    .iter()
                    .find(|(n, _)| *n == cov.name)
                    .map(|(_, l)| *l)
                    .ok_or_else(|| Error::MissingCovariate(cov.name.clone()))?;
                cov.level_index(label)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile(levels))
    }

    pub fn labels<'a>(&'a self, profile: &Profile) -> Vec<&'a str> {
        self.covariates
            .iter()
            .zip(&profile.0)
            .map(|(c, &l)| c.categories[l].as_str())
            .collect()
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.0.len() != self.covariates.len() {
            return Err(Error::InvalidInput(format!(
                "profile has {} levels, schema has {} covariates",
                profile.0.len(),
                self.covariates.len()
            )));
        }
        for (cov, &l) in self.covariates.iter().zip(&profile.0) {
            if l >= cov.categories.len() {
                return Err(Error::InvalidInput(format!(
                    "level #{l} out of range for covariate '{}'",
                    cov.name
                )));
            }
        }
        Ok(())
    }

    pub fn encode(&self, profile: &Profile) -> Result<Vec<f64>> {
        self.check_profile(profile)?;
        let mut row = vec![0.0; self.design_len()];
        row[0] = 1.0;
        for (k, &level) in profile.0.iter().enumerate() {
            if let Some(col) = self.column_of(k, level) {
                row[col] = 1.0;
            }
        }
        Ok(row)
    }

    pub fn decode(&self, row: &[f64]) -> Result<Profile> {
        if row.len() != self.design_len() || row[0] != 1.0 {
            return Err(Error::InvalidInput("not a design row of this schema".into()));
        }
        let mut levels = Vec::with_capacity(self.covariates.len());
        let mut col = 1;
        for cov in &self.covariates {
            let mut level = cov.reference;
            let mut set = 0;
            for i in 0..cov.categories.len() {
                if i == cov.reference {
                    continue;
                }
                match row[col] {
                    v if v == 1.0 => {
                        level = i;
                        set += 1;
                    }
                    v if v == 0.0 => {}
                    _ => return Err(Error::InvalidInput("design entries must be 0 or 1".into())),
                }
                col += 1;
            }
            if set > 1 {
                return Err(Error::InvalidInput(format!(
                    "several indicators set for covariate '{}'",
                    cov.name
                )));
            }
            levels.push(level);
        }
        Ok(Profile(levels))
    }

    /// Every profile of the schema, in lexicographic level order.
    pub fn all_profiles(&self) -> Vec<Profile> {
        let mut out = vec![Profile(Vec::new())];
        for cov in &self.covariates {
            let mut next = Vec::with_capacity(out.len() * cov.categories.len());
            for p in &out {
                for l in 0..cov.categories.len() {
                    let mut levels = p.0.clone();
                    levels.push(l);
                    next.push(Profile(levels));
                }
            }
            out = next;
        }
        out
    }
}

/// Encodes a labelled profile into its design row.
pub fn encode_profile(labels: &[(&str, &str)], schema: &CovariateSchema) -> Result<Vec<f64>> {
    schema.encode(&schema.profile_from_labels(labels)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub threshold_u: f64,
    pub schema: CovariateSchema,
}

impl ModelSpec {
    pub fn new(threshold_u: f64, schema: CovariateSchema) -> Result<Self> {
        if !(threshold_u > 0.0) || !threshold_u.is_finite() {
            return Err(Error::InvalidInput(format!(
                "threshold must be positive, got {threshold_u}"
            )));
        }
        Ok(Self { threshold_u, schema })
    }
}

/// Threshold-relative view of one record.
#[derive(Debug, Clone, PartialEq)]
pub struct Exceedance {
    /// Exit exceedance `exit_age − u`, strictly positive.
    pub y: f64,
    /// Entry exceedance `max(entry_age − u, 0)`, strictly below `y`.
    pub a: f64,
    pub event: bool,
    pub design_row: Vec<f64>,
}

/// Exceedances sharing one design layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceSet {
    pub columns: Vec<String>,
    pub records: Vec<Exceedance>,
}

impl ExceedanceSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.columns.len() + 1
    }

    pub fn deaths(&self) -> usize {
        self.records.iter().filter(|e| e.event).count()
    }

    /// Same records with every entry exceedance forced to zero, i.e. the
    /// likelihood that ignores delayed entry.
    pub fn without_truncation(&self) -> Self {
        let mut out = self.clone();
        out.records.iter_mut().for_each(|e| e.a = 0.0);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub data: ExceedanceSet,
    pub kept: usize,
    /// Records leaving observation at or below the threshold, plus records
    /// whose observation window above the threshold is empty.
    pub dropped: usize,
}

pub fn to_exceedances(records: &[IndividualRecord], spec: &ModelSpec) -> Result<Extraction> {
    let u = spec.threshold_u;
    let mut kept = Vec::new();
    let mut dropped = 0;
    for r in records {
        let y = r.exit_age - u;
        let a = (r.entry_age - u).max(0.0);
        if !(y > 0.0) || !(a < y) {
            dropped += 1;
            continue;
        }
        kept.push(Exceedance {
            y,
            a,
            event: r.event,
            design_row: spec.schema.encode(&r.profile)?,
        });
    }
    Ok(Extraction {
        kept: kept.len(),
        dropped,
        data: ExceedanceSet {
            columns: spec.schema.column_names(),
            records: kept,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `counts[row][col]`
    pub counts: Vec<Vec<usize>>,
}

impl ContingencyTable {
    pub fn row_totals(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<usize> {
        (0..self.col_labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn total(&self) -> usize {
        self.row_totals().iter().sum()
    }
}

fn strictly_increasing<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

/// Cross-classifies records by last-observation age band and calendar period.
///
/// Age bands are `≤b₀`, `(b₀,b₁]`, …, `(b_{m−1},b_m]`, `b_m+`, so every record
/// lands in exactly one row. Period columns are `[p_k, p_{k+1})`; records
/// without a period or outside the range go to a trailing `unassigned`
/// column. With fewer than two period breaks there is a single `all` column.
pub fn contingency_summary(
    records: &[IndividualRecord],
    age_breaks: &[f64],
    period_breaks: &[i32],
) -> Result<ContingencyTable> {
    if age_breaks.is_empty() || !strictly_increasing(age_breaks) {
        return Err(Error::InvalidInput("age breaks must be non-empty and strictly increasing".into()));
    }
    if !strictly_increasing(period_breaks) {
        return Err(Error::InvalidInput("period breaks must be strictly increasing".into()));
    }
    let m = age_breaks.len();
    let mut row_labels = vec![format!("<={}", age_breaks[0])];
    for w in age_breaks.windows(2) {
        row_labels.push(format!("({},{}]", w[0], w[1]));
    }
    row_labels.push(format!("{}+", age_breaks[m - 1]));

    let by_period = period_breaks.len() >= 2;
    let col_labels: Vec<String> = if by_period {
        let mut cols: Vec<String> = period_breaks
            .windows(2)
            .map(|w| format!("{}-{}", w[0], w[1] - 1))
            .collect();
        cols.push("unassigned".into());
        cols
    } else {
        vec!["all".into()]
    };

    let mut counts = vec![vec![0usize; col_labels.len()]; row_labels.len()];
    for r in records {
        // first break b with age <= b; upper-closed bands
        let row = age_breaks
            .iter()
            .position(|&b| r.exit_age <= b)
            .unwrap_or(m);
        let col = if by_period {
            match r.period {
                Some(p) if p >= period_breaks[0] && p < period_breaks[period_breaks.len() - 1] => {
                    period_breaks.windows(2).position(|w| p >= w[0] && p < w[1]).unwrap_or(0)
                }
                _ => col_labels.len() - 1,
            }
        } else {
            0
        };
        counts[row][col] += 1;
    }
    Ok(ContingencyTable {
        row_labels,
        col_labels,
        counts,
    })
}

/// Number of exceedances per observed profile.
pub fn profile_frequencies(
    data: &ExceedanceSet,
    schema: &CovariateSchema,
) -> Result<BTreeMap<Profile, usize>> {
    let mut freq = BTreeMap::new();
    for e in &data.records {
        *freq.entry(schema.decode(&e.design_row)?).or_insert(0) += 1;
    }
    Ok(freq)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn decl(name: &str, cats: &[&str], reference: Option<usize>) -> CovariateDecl {
        CovariateDecl {
            name: name.into(),
            categories: cats.iter().map(|s| (*s).into()).collect(),
            reference,
        }
    }

    /// Covariates and references of the Belgian model at u = 100.
    pub(crate) fn paper_schema() -> CovariateSchema {
        CovariateSchema::new(vec![
            decl("civ", &["widowed", "unmarried", "married", "divorced"], Some(0)),
            decl("edu", &["primary", "secondary", "tertiary", "unobserved"], Some(0)),
            decl("hht", &["collective", "single", "couple", "family", "other"], Some(0)),
            decl("org", &["native", "west-europe", "other"], Some(0)),
            decl("sex", &["female", "male"], Some(0)),
        ])
        .unwrap()
    }

    fn profile(schema: &CovariateSchema, labels: &[(&str, &str)]) -> Profile {
        schema.profile_from_labels(labels).unwrap()
    }

    #[test]
    fn design_length_and_names() {
        let s = paper_schema();
        assert_eq!(s.design_len(), 1 + 3 + 3 + 4 + 2 + 1);
        let names = s.column_names();
        assert_eq!(names[0], "intercept");
        assert_eq!(names[1], "civ:unmarried");
        assert_eq!(names.last().unwrap(), "sex:male");
    }

    #[test]
    fn reference_profile_encodes_to_unit_intercept() {
        let s = paper_schema();
        let row = s.encode(&s.reference_profile()).unwrap();
        assert_eq!(row[0], 1.0);
        assert!(row[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tertiary_single_profile_sets_two_indicators() {
        let s = paper_schema();
        let row = encode_profile(
            &[
                ("civ", "widowed"),
                ("edu", "tertiary"),
                ("hht", "single"),
                ("org", "native"),
                ("sex", "female"),
            ],
            &s,
        )
        .unwrap();
        let names = s.column_names();
        let set: Vec<&str> = row
            .iter()
            .zip(&names)
            .skip(1)
            .filter(|(v, _)| **v == 1.0)
            .map(|(_, n)| n.as_str())
            .collect();
        assert_eq!(set, ["edu:tertiary", "hht:single"]);
    }

    #[test]
    fn distinct_profiles_encode_distinctly_and_decode_back() {
        let s = paper_schema();
        let all = s.all_profiles();
        assert_eq!(all.len(), 4 * 4 * 5 * 3 * 2);
        let rows: Vec<_> = all.iter().map(|p| s.encode(p).unwrap()).collect();
        for (i, p) in all.iter().enumerate() {
            assert_eq!(&s.decode(&rows[i]).unwrap(), p);
            if i > 0 {
                assert_ne!(rows[i], rows[i - 1]);
            }
        }
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        assert_eq!(sorted.len(), rows.len());
    }

    #[test]
    fn unknown_and_missing_labels_are_rejected() {
        let s = paper_schema();
        let err = encode_profile(
            &[("civ", "widowed"), ("edu", "phd"), ("hht", "single"), ("org", "native"), ("sex", "female")],
            &s,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::UnknownCategory {
                covariate: "edu".into(),
                label: "phd".into()
            }
        );
        let err = encode_profile(&[("civ", "widowed")], &s).unwrap_err();
        assert_eq!(err, Error::MissingCovariate("edu".into()));
    }

    #[test]
    fn schema_validation() {
        assert!(CovariateSchema::new(vec![decl("x", &["a", "a"], Some(0))]).is_err());
        assert!(CovariateSchema::new(vec![decl("x", &["a", "b"], Some(2))]).is_err());
        assert!(CovariateSchema::new(vec![decl("x", &["a", "b"], None)]).is_err());
        assert!(CovariateSchema::new(vec![decl("x", &["a"], Some(0)), decl("x", &["b"], Some(0))]).is_err());
    }

    #[test]
    fn default_reference_is_max_exposure() {
        let recs = vec![
            IndividualRecord::new(100.0, 101.0, true, Profile(vec![0])).unwrap(),
            IndividualRecord::new(100.0, 104.0, true, Profile(vec![1])).unwrap(),
            IndividualRecord::new(100.0, 102.0, false, Profile(vec![0])).unwrap(),
        ];
        let s = CovariateSchema::resolve(vec![decl("x", &["a", "b"], None)], &recs).unwrap();
        assert_eq!(s.covariates()[0].reference_label(), "b");
        let s = CovariateSchema::resolve(vec![decl("x", &["a", "b"], Some(0))], &recs).unwrap();
        assert_eq!(s.covariates()[0].reference_label(), "a");
    }

    #[test]
    fn record_invariants() {
        assert!(IndividualRecord::new(100.0, 99.0, true, Profile(vec![])).is_err());
        assert!(IndividualRecord::new(-1.0, 99.0, true, Profile(vec![])).is_err());
        assert!(IndividualRecord::new(100.0, f64::INFINITY, true, Profile(vec![])).is_err());
        assert!(IndividualRecord::new(100.0, 100.0, true, Profile(vec![])).is_ok());
    }

    #[test]
    fn exceedance_extraction_cases() {
        let s = paper_schema();
        let p = s.reference_profile();
        let recs = vec![
            IndividualRecord::new(90.0, 99.5, true, p.clone()).unwrap(),
            IndividualRecord::new(90.0, 101.0, true, p.clone()).unwrap(),
            IndividualRecord::new(103.0, 105.2, false, p.clone()).unwrap(),
            IndividualRecord::new(95.0, 100.0, true, p.clone()).unwrap(),
        ];
        let spec = ModelSpec::new(100.0, s).unwrap();
        let ex = to_exceedances(&recs, &spec).unwrap();
        assert_eq!((ex.kept, ex.dropped), (2, 2));
        let e = &ex.data.records;
        assert_eq!((e[0].a, e[0].y, e[0].event), (0.0, 1.0, true));
        assert!((e[1].a - 3.0).abs() < 1e-12 && (e[1].y - 5.2).abs() < 1e-12 && !e[1].event);
        assert!(ex.data.records.iter().all(|e| e.y > 0.0 && e.a < e.y));
    }

    #[test]
    fn profile_and_reference_relabel() {
        let s = paper_schema();
        let p = profile(&s, &[("civ", "married"), ("edu", "primary"), ("hht", "collective"), ("org", "native"), ("sex", "male")]);
        let s2 = s.with_reference(4, 1).unwrap();
        let row = s2.encode(&p).unwrap();
        assert_eq!(s2.column_names().last().unwrap(), "sex:female");
        assert_eq!(*row.last().unwrap(), 0.0);
        assert_eq!(s2.decode(&row).unwrap(), p);
    }

    #[test]
    fn contingency_single_record() {
        let r = IndividualRecord::new(99.0, 101.0, true, Profile(vec![])).unwrap();
        let t = contingency_summary(&[r], &[100.0, 102.0], &[]).unwrap();
        assert_eq!(t.total(), 1);
        assert_eq!(t.row_totals(), vec![0, 1, 0]);
        assert_eq!(t.col_totals(), vec![1]);
    }

    #[test]
    fn contingency_boundary_goes_to_upper_closed_band() {
        // hand classification: 102 -> (100,102]; 102.0001 -> (102,104]; 100 -> <=100
        let recs: Vec<_> = [(102.0, 1999), (102.0001, 2000), (100.0, 1995), (110.0, 2030)]
            .iter()
            .map(|&(x, p)| IndividualRecord::new(95.0, x, true, Profile(vec![])).unwrap().with_period(p))
            .collect();
        let t = contingency_summary(&recs, &[100.0, 102.0, 104.0], &[1995, 1999, 2003]).unwrap();
        assert_eq!(t.col_labels, ["1995-1998", "1999-2002", "unassigned"]);
        assert_eq!(t.counts[0], [1, 0, 0]);
        assert_eq!(t.counts[1], [0, 1, 0]);
        assert_eq!(t.counts[2], [0, 1, 0]);
        assert_eq!(t.counts[3], [0, 0, 1]);
        assert!(contingency_summary(&recs, &[100.0, 100.0], &[]).is_err());
    }
}

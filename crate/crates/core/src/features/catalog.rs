//! Feature definitions, their dependency tree and understandability weights.
//!
//! Catalog files hold one record per line:
//!
//! ```text
//! name|clock|kind|deps|simplest|cutpoint|abnormal|description
//! cmd_total_time_s|command|numeric||yes|>60|1|More than 60 seconds to draw
//! ```
//!
//! `deps` is a comma-separated list of feature names, `cutpoint` is a
//! comparison (`>`, `>=`, `<`, `<=` followed by a number) for numeric
//! features and `-` for binary ones, and `abnormal` names the binary pole
//! that missing values collapse to.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate feature `{0}`")]
    Duplicate(String),
    #[error("feature `{feature}` depends on unknown feature `{dependency}`")]
    UnknownDependency { feature: String, dependency: String },
    #[error("dependency cycle through `{0}`")]
    Cycle(String),
    #[error("catalog has no simplest features")]
    NoSimplest,
    #[error("catalog is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureClock {
    Command,
    Copy,
    Both,
}

impl FeatureClock {
    pub fn token(self) -> &'static str {
        match self {
            FeatureClock::Command => "command",
            FeatureClock::Copy => "copy",
            FeatureClock::Both => "both",
        }
    }

    fn from_token(s: &str) -> Option<Self> {
        match s {
            "command" => Some(FeatureClock::Command),
            "copy" => Some(FeatureClock::Copy),
            "both" => Some(FeatureClock::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Gt,
    Ge,
    Lt,
    Le,
}

/// Threshold turning a numeric feature into a predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutpoint {
    pub op: Comparison,
    pub value: f64,
}

impl Cutpoint {
    pub fn holds(&self, x: f64) -> bool {
        match self.op {
            Comparison::Gt => x > self.value,
            Comparison::Ge => x >= self.value,
            Comparison::Lt => x < self.value,
            Comparison::Le => x <= self.value,
        }
    }
}

impl fmt::Display for Cutpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
        };
        write!(f, "{op}{}", self.value)
    }
}

impl std::str::FromStr for Cutpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (op, rest) = if let Some(r) = s.strip_prefix(">=") {
            (Comparison::Ge, r)
        } else if let Some(r) = s.strip_prefix("<=") {
            (Comparison::Le, r)
        } else if let Some(r) = s.strip_prefix('>') {
            (Comparison::Gt, r)
        } else if let Some(r) = s.strip_prefix('<') {
            (Comparison::Lt, r)
        } else {
            return Err(format!("bad cutpoint `{s}`"));
        };
        let value: f64 = rest.trim().parse().map_err(|_| format!("bad cutpoint `{s}`"))?;
        if !value.is_finite() {
            return Err(format!("bad cutpoint `{s}`"));
        }
        Ok(Cutpoint { op, value })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDef {
    pub name: String,
    pub clock: FeatureClock,
    pub kind: FeatureKind,
    pub dependencies: Vec<String>,
    pub simplest: bool,
    /// Understandability weight: height in the dependency tree, 1 for
    /// primitive features.
    pub u: u32,
    pub cutpoint: Option<Cutpoint>,
    /// Binary value (0 or 1) representing the abnormal reading.
    pub abnormal: u8,
    /// Predicate text shown on scoring sheets.
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSet {
    All,
    Simplest,
}

impl std::str::FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(FeatureSet::All),
            "simplest" => Ok(FeatureSet::Simplest),
            _ => Err(format!("unknown feature set `{s}` (expected all or simplest)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCatalog {
    defs: Vec<FeatureDef>,
    index: HashMap<String, usize>,
}

const DEFAULT_CATALOG: &str = include_str!("../../data/catalog.txt");

impl FeatureCatalog {
    /// The shipped catalog.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }

    /// Builds a catalog from definitions, recomputing every `u`.
    pub fn new(defs: Vec<FeatureDef>) -> Result<Self, CatalogError> {
        if defs.is_empty() {
            return Err(CatalogError::Empty);
        }
        let mut index = HashMap::new();
        for (i, d) in defs.iter().enumerate() {
            if index.insert(d.name.clone(), i).is_some() {
                return Err(CatalogError::Duplicate(d.name.clone()));
            }
        }
        for d in &defs {
            for dep in &d.dependencies {
                if !index.contains_key(dep) {
                    return Err(CatalogError::UnknownDependency {
                        feature: d.name.clone(),
                        dependency: dep.clone(),
                    });
                }
            }
        }
        if !defs.iter().any(|d| d.simplest) {
            return Err(CatalogError::NoSimplest);
        }
        let mut catalog = Self { defs, index };
        assign_heights(&mut catalog)?;
        Ok(catalog)
    }

    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let mut defs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let bad = |reason: String| CatalogError::Malformed { line, reason };
            let f: Vec<&str> = l.split('|').map(str::trim).collect();
            if f.len() != 8 {
                return Err(bad(format!("expected 8 `|`-separated fields, found {}", f.len())));
            }
            if f[0].is_empty() {
                return Err(bad("empty feature name".into()));
            }
            let clock = FeatureClock::from_token(f[1]).ok_or_else(|| bad(format!("bad clock `{}`", f[1])))?;
            let kind = match f[2] {
                "numeric" => FeatureKind::Numeric,
                "binary" => FeatureKind::Binary,
                other => return Err(bad(format!("bad kind `{other}`"))),
            };
            let dependencies = f[3]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            let simplest = match f[4] {
                "yes" => true,
                "no" => false,
                other => return Err(bad(format!("bad simplest flag `{other}`"))),
            };
            let cutpoint = match (kind, f[5]) {
                (FeatureKind::Binary, "-") => None,
                (FeatureKind::Binary, other) => {
                    return Err(bad(format!("binary feature takes `-` as cutpoint, got `{other}`")))
                }
                (FeatureKind::Numeric, c) => Some(c.parse::<Cutpoint>().map_err(bad)?),
            };
            let abnormal = match f[6] {
                "0" => 0,
                "1" => 1,
                other => return Err(bad(format!("bad abnormal pole `{other}`"))),
            };
            if f[7].is_empty() {
                return Err(bad("empty description".into()));
            }
            defs.push(FeatureDef {
                name: f[0].to_string(),
                clock,
                kind,
                dependencies,
                simplest,
                u: 0,
                cutpoint,
                abnormal,
                description: f[7].to_string(),
            });
        }
        Self::new(defs)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# name|clock|kind|deps|simplest|cutpoint|abnormal|description\n");
        for d in &self.defs {
            out.push_str(&format!(
                "{}|{}|{}|{}|{}|{}|{}|{}\n",
                d.name,
                d.clock.token(),
                match d.kind {
                    FeatureKind::Numeric => "numeric",
                    FeatureKind::Binary => "binary",
                },
                d.dependencies.join(","),
                if d.simplest { "yes" } else { "no" },
                d.cutpoint.map_or_else(|| "-".to_string(), |c| c.to_string()),
                d.abnormal,
                d.description
            ));
        }
        out
    }

    pub fn defs(&self) -> &[FeatureDef] {
        &self.defs
    }

    pub fn get(&self, name: &str) -> Option<&FeatureDef> {
        self.index.get(name).map(|&i| &self.defs[i])
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Definitions in catalog order for the requested set.
    pub fn select(&self, set: FeatureSet) -> impl Iterator<Item = &FeatureDef> {
        self.defs.iter().filter(move |d| set == FeatureSet::All || d.simplest)
    }

    pub fn names(&self, set: FeatureSet) -> Vec<String> {
        self.select(set).map(|d| d.name.clone()).collect()
    }
}

/// Sets `u = 1` for features without dependencies and
/// `u = 1 + max(u of dependencies)` otherwise.
pub fn assign_heights(catalog: &mut FeatureCatalog) -> Result<(), CatalogError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done(u32),
    }
    let n = catalog.defs.len();
    let mut marks = vec![Mark::New; n];
    let deps: Vec<Vec<usize>> = catalog
        .defs
        .iter()
        .map(|d| {
            d.dependencies
                .iter()
                .map(|name| {
                    catalog.index.get(name).copied().ok_or_else(|| CatalogError::UnknownDependency {
                        feature: d.name.clone(),
                        dependency: name.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    // Iterative post-order DFS so deep chains cannot overflow the stack.
    for root in 0..n {
        if marks[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        marks[root] = Mark::Active;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < deps[node].len() {
                let child = deps[node][*next];
                *next += 1;
                match marks[child] {
                    Mark::New => {
                        marks[child] = Mark::Active;
                        stack.push((child, 0));
                    }
                    Mark::Active => return Err(CatalogError::Cycle(catalog.defs[child].name.clone())),
                    Mark::Done(_) => {}
                }
            } else {
                let height = 1 + deps[node]
                    .iter()
                    .map(|&c| match marks[c] {
                        Mark::Done(h) => h,
                        _ => unreachable!("children finish first"),
                    })
                    .max()
                    .unwrap_or(0);
                marks[node] = Mark::Done(height);
                stack.pop();
            }
        }
    }
    for (d, m) in catalog.defs.iter_mut().zip(marks) {
        if let Mark::Done(h) = m {
            d.u = h;
        }
    }
    Ok(())
}

//! Symmetric TSPLIB instances and integer edge costs.
//!
//! Cities are 0-based internally; the 1-based ids of the file format are
//! converted at the parse boundary. Edge costs follow the TSPLIB rounding
//! conventions, which is what makes the registered optima meaningful.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use thiserror::Error;

/// Integer tour and edge cost.
pub type Cost = i64;

/// Largest instance for which the full triangular cost matrix is kept.
pub const MEMO_LIMIT: usize = 5000;

static BUNDLED_OPTIMA: &str = include_str!("../data/optima.txt");

static REGISTRY: LazyLock<OptimaRegistry> = LazyLock::new(|| {
    OptimaRegistry::parse(BUNDLED_OPTIMA).expect("bundled optima registry is well formed")
});

/// Directory holding the instances and reference tours shipped with the crate.
pub fn bundled_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeWeightKind {
    Euc2d,
    Ceil2d,
    Att,
}

impl EdgeWeightKind {
    pub fn tsplib_name(self) -> &'static str {
        match self {
            EdgeWeightKind::Euc2d => "EUC_2D",
            EdgeWeightKind::Ceil2d => "CEIL_2D",
            EdgeWeightKind::Att => "ATT",
        }
    }

    fn from_tsplib(name: &str) -> Option<Self> {
        match name {
            "EUC_2D" => Some(EdgeWeightKind::Euc2d),
            "CEIL_2D" => Some(EdgeWeightKind::Ceil2d),
            "ATT" => Some(EdgeWeightKind::Att),
            _ => None,
        }
    }

    /// Distance between two points under this rounding rule.
    #[inline]
    pub fn distance(self, a: (f64, f64), b: (f64, f64)) -> Cost {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        match self {
            // nint(x) = (int)(x + 0.5)
            EdgeWeightKind::Euc2d => ((dx * dx + dy * dy).sqrt() + 0.5) as Cost,
            EdgeWeightKind::Ceil2d => (dx * dx + dy * dy).sqrt().ceil() as Cost,
            EdgeWeightKind::Att => {
                let r = ((dx * dx + dy * dy) / 10.0).sqrt();
                let t = (r + 0.5) as Cost;
                if (t as f64) < r {
                    t + 1
                } else {
                    t
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed header `{0}`")]
    MalformedHeader(String),
    #[error("unsupported EDGE_WEIGHT_TYPE `{0}`")]
    UnsupportedWeightType(String),
    #[error("unsupported problem TYPE `{0}`")]
    UnsupportedProblemType(String),
    #[error("invalid DIMENSION `{0}`")]
    InvalidDimension(String),
    #[error("malformed coordinate record `{0}`")]
    MalformedCoordinate(String),
    #[error("missing {0} field before NODE_COORD_SECTION")]
    MissingField(&'static str),
    #[error("no NODE_COORD_SECTION found")]
    MissingCoordinates,
    #[error("DIMENSION declares {expected} cities but {found} coordinates were read")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed tour entry `{0}`")]
    MalformedTourEntry(String),
    #[error("tour is not a permutation of 1..={0}")]
    NotAPermutation(usize),
}

/// A parse failure, tagged with the 1-based line that triggered it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, kind: ParseErrorKind) -> Self {
        Self { line, kind }
    }
}

#[derive(Debug, Clone, Error)]
pub enum InstanceError {
    #[error("an instance needs at least 3 cities, got {0}")]
    TooFewCities(usize),
    #[error("coordinate {index} is not finite")]
    NonFiniteCoordinate { index: usize },
    #[error("edge ({a}, {b}) is not a valid city pair for n = {n}")]
    InvalidEdge { a: usize, b: usize, n: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::sync::Arc<std::io::Error>,
    },
}

/// A symmetric TSP instance. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TspInstance {
    name: String,
    coords: Vec<(f64, f64)>,
    kind: EdgeWeightKind,
    known_optimum: Option<Cost>,
    memo: Option<Vec<u32>>,
}

impl TspInstance {
    /// Builds an instance, looking up its optimum in the bundled registry.
    pub fn new(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        kind: EdgeWeightKind,
    ) -> Result<Self, InstanceError> {
        let name = name.into();
        let known_optimum = known_optimum(&name);
        Self::with_optimum(name, coords, kind, known_optimum)
    }

    pub fn with_optimum(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        kind: EdgeWeightKind,
        known_optimum: Option<Cost>,
    ) -> Result<Self, InstanceError> {
        if coords.len() < 3 {
            return Err(InstanceError::TooFewCities(coords.len()));
        }
        if let Some(index) = coords
            .iter()
            .position(|&(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(InstanceError::NonFiniteCoordinate { index });
        }
        let mut inst = Self {
            name: name.into(),
            coords,
            kind,
            known_optimum,
            memo: None,
        };
        let n = inst.len();
        if n <= MEMO_LIMIT {
            let mut memo = Vec::with_capacity(n * (n - 1) / 2);
            for a in 1..n {
                for b in 0..a {
                    let d = inst.kind.distance(inst.coords[a], inst.coords[b]);
                    memo.push(u32::try_from(d).unwrap_or(u32::MAX));
                }
            }
            // Costs that overflow u32 fall back to on-the-fly evaluation.
            if memo.iter().all(|&d| d != u32::MAX) {
                inst.memo = Some(memo);
            }
        }
        Ok(inst)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io {
            path: path.display().to_string(),
            source: std::sync::Arc::new(e),
        })?;
        Ok(parse_tsplib(&text)?)
    }

    /// Loads one of the instances shipped in [`bundled_data_dir`].
    pub fn bundled(name: &str) -> Result<Self, InstanceError> {
        Self::from_path(bundled_data_dir().join(format!("{name}.tsp")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn kind(&self) -> EdgeWeightKind {
        self.kind
    }

    pub fn known_optimum(&self) -> Option<Cost> {
        self.known_optimum
    }

    pub fn is_memoized(&self) -> bool {
        self.memo.is_some()
    }

    /// Checked edge cost.
    pub fn edge_cost(&self, a: usize, b: usize) -> Result<Cost, InstanceError> {
        let n = self.len();
        if a == b || a >= n || b >= n {
            return Err(InstanceError::InvalidEdge { a, b, n });
        }
        Ok(self.cost(a, b))
    }

    /// Unchecked edge cost for the search hot path. `cost(a, a)` is 0.
    #[inline]
    pub fn cost(&self, a: usize, b: usize) -> Cost {
        debug_assert!(a < self.len() && b < self.len());
        match &self.memo {
            Some(memo) => {
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                if hi == lo {
                    0
                } else {
                    memo[hi * (hi - 1) / 2 + lo] as Cost
                }
            }
            None => self.kind.distance(self.coords[a], self.coords[b]),
        }
    }

    /// Cost of the cyclic tour visiting `order`.
    pub fn tour_length(&self, order: &[u32]) -> Cost {
        let n = order.len();
        (0..n)
            .map(|i| self.cost(order[i] as usize, order[(i + 1) % n] as usize))
            .sum()
    }

    /// Serializes the instance back to TSPLIB text. Coordinates use the
    /// shortest decimal form that parses back to the same `f64`.
    pub fn to_tsplib(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : TSP");
        let _ = writeln!(out, "DIMENSION : {}", self.len());
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE : {}", self.kind.tsplib_name());
        let _ = writeln!(out, "NODE_COORD_SECTION");
        for (i, (x, y)) in self.coords.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, x, y);
        }
        out.push_str("EOF\n");
        out
    }
}

fn split_header(line: &str) -> Option<(&str, &str)> {
    let (key, value) = line.split_once(':')?;
    Some((key.trim(), value.trim()))
}

/// Parses a TSPLIB `.tsp` file with a `NODE_COORD_SECTION`.
pub fn parse_tsplib(text: &str) -> Result<TspInstance, ParseError> {
    let mut name: Option<String> = None;
    let mut dimension: Option<usize> = None;
    let mut kind: Option<EdgeWeightKind> = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut in_coords = false;
    let mut saw_coords = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if in_coords {
            let mut fields = line.split_whitespace();
            let record = (
                fields.next().map(str::parse::<usize>),
                fields.next().map(str::parse::<f64>),
                fields.next().map(str::parse::<f64>),
                fields.next(),
            );
            match record {
                (Some(Ok(_)), Some(Ok(x)), Some(Ok(y)), None) if x.is_finite() && y.is_finite() => {
                    coords.push((x, y));
                    continue;
                }
                _ => {
                    return Err(ParseError::new(
                        line_no,
                        ParseErrorKind::MalformedCoordinate(line.to_string()),
                    ))
                }
            }
        }
        if line.starts_with("NODE_COORD_SECTION") {
            if dimension.is_none() {
                return Err(ParseError::new(line_no, ParseErrorKind::MissingField("DIMENSION")));
            }
            if kind.is_none() {
                return Err(ParseError::new(
                    line_no,
                    ParseErrorKind::MissingField("EDGE_WEIGHT_TYPE"),
                ));
            }
            in_coords = true;
            saw_coords = true;
            continue;
        }
        let Some((key, value)) = split_header(line) else {
            return Err(ParseError::new(
                line_no,
                ParseErrorKind::MalformedHeader(line.to_string()),
            ));
        };
        match key {
            "NAME" => name = Some(value.to_string()),
            "TYPE" => {
                if value != "TSP" {
                    return Err(ParseError::new(
                        line_no,
                        ParseErrorKind::UnsupportedProblemType(value.to_string()),
                    ));
                }
            }
            "DIMENSION" => {
                let d = value.parse::<usize>().map_err(|_| {
                    ParseError::new(line_no, ParseErrorKind::InvalidDimension(value.to_string()))
                })?;
                if d < 3 {
                    return Err(ParseError::new(
                        line_no,
                        ParseErrorKind::InvalidDimension(value.to_string()),
                    ));
                }
                dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => {
                kind = Some(EdgeWeightKind::from_tsplib(value).ok_or_else(|| {
                    ParseError::new(
                        line_no,
                        ParseErrorKind::UnsupportedWeightType(value.to_string()),
                    )
                })?);
            }
            "COMMENT" | "NODE_COORD_TYPE" | "DISPLAY_DATA_TYPE" => {}
            _ if key.is_empty() || key.contains(char::is_whitespace) => {
                return Err(ParseError::new(
                    line_no,
                    ParseErrorKind::MalformedHeader(line.to_string()),
                ))
            }
            // Unknown specification keys are tolerated.
            _ => {}
        }
    }

    if !saw_coords {
        return Err(ParseError::new(last_line, ParseErrorKind::MissingCoordinates));
    }
    let expected = dimension.expect("checked at NODE_COORD_SECTION");
    if coords.len() != expected {
        return Err(ParseError::new(
            last_line,
            ParseErrorKind::DimensionMismatch {
                expected,
                found: coords.len(),
            },
        ));
    }
    let kind = kind.expect("checked at NODE_COORD_SECTION");
    let name = name.unwrap_or_default();
    TspInstance::new(name, coords, kind).map_err(|e| match e {
        InstanceError::Parse(p) => p,
        other => ParseError::new(last_line, ParseErrorKind::MalformedHeader(other.to_string())),
    })
}

/// Parses a TSPLIB `.tour` file into a 0-based city order.
pub fn parse_tour(text: &str, n: usize) -> Result<Vec<u32>, ParseError> {
    let mut order = Vec::with_capacity(n);
    let mut in_section = false;
    let mut last_line = 0;
    'lines: for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !in_section {
            if line.starts_with("TOUR_SECTION") {
                in_section = true;
            } else if line == "EOF" {
                break;
            }
            continue;
        }
        for tok in line.split_whitespace() {
            if tok == "-1" || tok == "EOF" {
                break 'lines;
            }
            let id = tok.parse::<usize>().map_err(|_| {
                ParseError::new(line_no, ParseErrorKind::MalformedTourEntry(tok.to_string()))
            })?;
            if id == 0 || id > n {
                return Err(ParseError::new(
                    line_no,
                    ParseErrorKind::MalformedTourEntry(tok.to_string()),
                ));
            }
            order.push((id - 1) as u32);
        }
    }
    let mut seen = vec![false; n];
    let valid = order.len() == n
        && order
            .iter()
            .all(|&c| !std::mem::replace(&mut seen[c as usize], true));
    if !valid {
        return Err(ParseError::new(last_line, ParseErrorKind::NotAPermutation(n)));
    }
    Ok(order)
}

/// Known optimal tour costs keyed by instance name.
#[derive(Debug, Clone, Default)]
pub struct OptimaRegistry {
    optima: HashMap<String, Cost>,
}

impl OptimaRegistry {
    /// Parses `name optimum` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut optima = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            match (fields.next(), fields.next().map(str::parse::<Cost>), fields.next()) {
                (Some(name), Some(Ok(opt)), None) if opt >= 0 => {
                    optima.insert(name.to_string(), opt);
                }
                _ => {
                    return Err(ParseError::new(
                        idx + 1,
                        ParseErrorKind::MalformedHeader(line.to_string()),
                    ))
                }
            }
        }
        Ok(Self { optima })
    }

    pub fn get(&self, name: &str) -> Option<Cost> {
        self.optima.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.optima.len()
    }

    pub fn is_empty(&self) -> bool {
        self.optima.is_empty()
    }
}

/// Registered optimum of a bundled TSPLIB instance.
pub fn known_optimum(name: &str) -> Option<Cost> {
    REGISTRY.get(name)
}

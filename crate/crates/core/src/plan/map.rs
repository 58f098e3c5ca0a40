use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::diag::{finish, Code, Diagnostic, Parsed};
use super::lex::{self, is_identifier};

/// Undirected travel edge; endpoints are stored in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub minutes: u32,
}

impl Edge {
    pub fn new(x: &str, y: &str, minutes: u32) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Self { a: a.to_string(), b: b.to_string(), minutes }
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.a, &self.b)
    }

    pub fn other(&self, from: &str) -> Option<&str> {
        if self.a == from {
            Some(&self.b)
        } else if self.b == from {
            Some(&self.a)
        } else {
            None
        }
    }
}

/// Sorted endpoint pair used to address an edge.
pub fn edge_key(x: &str, y: &str) -> (String, String) {
    if x <= y {
        (x.to_string(), y.to_string())
    } else {
        (y.to_string(), x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomeMap {
    locations: BTreeSet<String>,
    edges: Vec<Edge>,
    dock: String,
}

impl HomeMap {
    /// Builds a map without validation; see [`parse_map`] for the checked path.
    pub fn new(
        locations: impl IntoIterator<Item = impl Into<String>>,
        edges: impl IntoIterator<Item = Edge>,
        dock: impl Into<String>,
    ) -> Self {
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort();
        Self { locations: locations.into_iter().map(Into::into).collect(), edges, dock: dock.into() }
    }

    pub fn locations(&self) -> impl Iterator<Item = &str> {
        self.locations.iter().map(String::as_str)
    }

    pub fn has_location(&self, loc: &str) -> bool {
        self.locations.contains(loc)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dock(&self) -> &str {
        &self.dock
    }

    pub fn edge(&self, x: &str, y: &str) -> Option<&Edge> {
        let (a, b) = edge_key(x, y);
        self.edges.iter().find(|e| e.a == a && e.b == b)
    }

    /// Neighbors of `loc` with edge travel times, sorted by neighbor id.
    pub fn neighbors<'a>(&'a self, loc: &'a str) -> impl Iterator<Item = (&'a str, u32)> + 'a {
        self.edges.iter().filter_map(move |e| e.other(loc).map(|o| (o, e.minutes)))
    }

    /// Connectivity over edges not listed in `closed`.
    pub fn is_connected(&self, closed: &BTreeSet<(String, String)>) -> bool {
        let Some(start) = self.locations.iter().next() else { return true };
        let mut seen = BTreeSet::from([start.as_str()]);
        let mut stack = vec![start.as_str()];
        while let Some(cur) = stack.pop() {
            for e in &self.edges {
                if closed.contains(&(e.a.clone(), e.b.clone())) {
                    continue;
                }
                if let Some(o) = e.other(cur) {
                    if seen.insert(o) {
                        stack.push(o);
                    }
                }
            }
        }
        seen.len() == self.locations.len()
    }
}

/// Canonical `.map` text.
impl fmt::Display for HomeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "map v1")?;
        for l in &self.locations {
            writeln!(f, "location {l}")?;
        }
        writeln!(f, "dock {}", self.dock)?;
        for e in &self.edges {
            writeln!(f, "edge {} {} {}", e.a, e.b, e.minutes)?;
        }
        Ok(())
    }
}

/// Parses a `.map` file.
///
/// ```text
/// map v1
/// location <id>
/// dock <id>
/// edge <id> <id> <minutes>
/// ```
pub fn parse_map(text: &str) -> Result<Parsed<HomeMap>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let lines = lex::lines(text, &mut diags);
    let Some(body) = lex::expect_header(&lines, "map", &mut diags) else {
        return Err(diags);
    };

    let mut locations: BTreeMap<String, usize> = BTreeMap::new();
    let mut dock: Option<(String, usize)> = None;
    let mut raw_edges: Vec<(String, String, u32, usize)> = Vec::new();

    for line in body {
        let n = line.number;
        match (line.word(0), line.tokens.len()) {
            (Some("location"), 2) => match line.word(1).filter(|w| is_identifier(w)) {
                Some(id) => {
                    if locations.contains_key(id) {
                        diags.push(Diagnostic::new(n, Code::DuplicateLocation, format!("location `{id}` declared twice")));
                    } else {
                        locations.insert(id.to_string(), n);
                    }
                }
                None => diags.push(line.syntax("expected location identifier")),
            },
            (Some("dock"), 2) => match line.word(1).filter(|w| is_identifier(w)) {
                Some(id) if dock.is_none() => dock = Some((id.to_string(), n)),
                Some(_) => diags.push(Diagnostic::new(n, Code::DuplicateDock, "dock declared twice")),
                None => diags.push(line.syntax("expected dock location identifier")),
            },
            (Some("edge"), 4) => {
                let a = line.word(1).filter(|w| is_identifier(w));
                let b = line.word(2).filter(|w| is_identifier(w));
                let m = line.word(3).and_then(lex::parse_count).filter(|m| *m >= 1);
                match (a, b, m) {
                    (Some(a), Some(b), Some(m)) => raw_edges.push((a.to_string(), b.to_string(), m, n)),
                    (_, _, None) => diags.push(line.syntax("edge travel time must be an integer >= 1")),
                    _ => diags.push(line.syntax("expected `edge <location> <location> <minutes>`")),
                }
            }
            (Some(kw @ ("location" | "dock" | "edge")), _) => {
                diags.push(line.syntax(format!("wrong number of fields for `{kw}`")))
            }
            _ => diags.push(line.syntax("unknown declaration")),
        }
    }

    let mut edges: Vec<Edge> = Vec::new();
    let mut seen = BTreeSet::new();
    for (a, b, m, n) in raw_edges {
        let mut ok = true;
        for end in [&a, &b] {
            if !locations.contains_key(end) {
                diags.push(Diagnostic::new(n, Code::UnknownEdgeEndpoint, format!("edge endpoint `{end}` is not a declared location")));
                ok = false;
            }
        }
        if a == b {
            diags.push(Diagnostic::new(n, Code::SelfEdge, format!("edge from `{a}` to itself")));
            ok = false;
        }
        if ok && !seen.insert(edge_key(&a, &b)) {
            diags.push(Diagnostic::new(n, Code::DuplicateEdge, format!("edge `{a}`-`{b}` declared twice")));
            ok = false;
        }
        if ok {
            edges.push(Edge::new(&a, &b, m));
        }
    }

    let dock = match dock {
        Some((d, n)) => {
            if !locations.contains_key(&d) {
                diags.push(Diagnostic::new(n, Code::UnknownLocation, format!("dock `{d}` is not a declared location")));
            }
            d
        }
        None => {
            let n = body.last().map_or(1, |l| l.number);
            diags.push(Diagnostic::new(n, Code::MissingDock, "map declares no dock"));
            String::new()
        }
    };

    let map = HomeMap::new(locations.keys().cloned(), edges, dock);
    if !diags.iter().any(Diagnostic::is_error) && !map.is_connected(&BTreeSet::new()) {
        let n = body.first().map_or(1, |l| l.number);
        diags.push(Diagnostic::new(n, Code::Disconnected, "not every location is reachable from every other"));
    }
    finish(map, diags)
}

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::{Error, Result};
use crate::rng::stream;

type Predicate = Arc<dyn Fn(&Graph) -> bool + Send + Sync>;

/// A graph family closed under adding edges.
///
/// The registry ships `edge`, `connected`, `mindeg:k` (optionally
/// `mindeg:k@v`, a single labelled vertex), `clique:k` and `giant:alpha`.
/// Vertex labels in names are 1-based.
#[derive(Clone)]
pub enum MonotoneProperty {
    Edge,
    Connected,
    MinDegree { k: usize, vertex: Option<usize> },
    Clique { k: usize },
    /// Some component has strictly more than `alpha * n` vertices.
    Giant { alpha: f64 },
    Custom { name: String, predicate: Predicate, skip_audit: bool },
}

impl MonotoneProperty {
    pub fn custom(name: impl Into<String>, predicate: impl Fn(&Graph) -> bool + Send + Sync + 'static) -> Self {
        MonotoneProperty::Custom { name: name.into(), predicate: Arc::new(predicate), skip_audit: false }
    }

    /// Custom predicate registered without the monotonicity audit.
    pub fn custom_unaudited(
        name: impl Into<String>,
        predicate: impl Fn(&Graph) -> bool + Send + Sync + 'static,
    ) -> Self {
        MonotoneProperty::Custom { name: name.into(), predicate: Arc::new(predicate), skip_audit: true }
    }

    pub fn evaluate(&self, g: &Graph) -> bool {
        match self {
            MonotoneProperty::Edge => g.edge_count() > 0,
            MonotoneProperty::Connected => g.is_connected(),
            MonotoneProperty::MinDegree { k, vertex: Some(v) } => *v < g.n() && g.degree(*v) >= *k,
            MonotoneProperty::MinDegree { k, vertex: None } => (0..g.n()).all(|v| g.degree(v) >= *k),
            MonotoneProperty::Clique { k } => g.has_clique(*k),
            MonotoneProperty::Giant { alpha } => {
                g.n() > 0 && g.component_sizes()[0] as f64 > alpha * g.n() as f64
            }
            MonotoneProperty::Custom { predicate, .. } => predicate(g),
        }
    }

    /// Neither empty nor all graphs on `n` vertices, judged by the empty and
    /// complete graphs (sufficient for monotone families).
    pub fn is_nontrivial(&self, n: usize) -> bool {
        !self.evaluate(&Graph::empty(n)) && self.evaluate(&Graph::complete(n))
    }

    /// Invariant under relabelling the vertices.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, MonotoneProperty::MinDegree { vertex: Some(_), .. } | MonotoneProperty::Custom { .. })
    }

    pub fn skips_audit(&self) -> bool {
        matches!(self, MonotoneProperty::Custom { skip_audit: true, .. })
    }

    /// Randomized monotonicity audit: on `graphs` random graphs, adding one
    /// absent edge must never switch the property off.
    pub fn audit_monotone(&self, n: usize, graphs: usize, seed: u64) -> Result<()> {
        if self.skips_audit() || n < 2 {
            return Ok(());
        }
        for t in 0..graphs {
            let mut rng = stream(seed, t as u64);
            let p: f64 = rng.random();
            let mut g = Graph::empty(n);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < p {
                        g.add_edge(i, j);
                    }
                }
            }
            let absent: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| !g.has_edge(i, j)).collect();
            if absent.is_empty() {
                continue;
            }
            let (i, j) = absent[rng.random_range(0..absent.len())];
            let before = self.evaluate(&g);
            g.add_edge(i, j);
            if before && !self.evaluate(&g) {
                return Err(Error::Audit(format!("property {self} switched off after adding edge {{{i}, {j}}}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MonotoneProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonotoneProperty::Edge => write!(f, "edge"),
            MonotoneProperty::Connected => write!(f, "connected"),
            MonotoneProperty::MinDegree { k, vertex: None } => write!(f, "mindeg:{k}"),
            MonotoneProperty::MinDegree { k, vertex: Some(v) } => write!(f, "mindeg:{k}@{}", v + 1),
            MonotoneProperty::Clique { k } => write!(f, "clique:{k}"),
            MonotoneProperty::Giant { alpha } => write!(f, "giant:{alpha}"),
            MonotoneProperty::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl fmt::Debug for MonotoneProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonotoneProperty({self})")
    }
}

impl PartialEq for MonotoneProperty {
    /// Registry properties compare by value; custom ones by name and predicate identity.
    fn eq(&self, other: &Self) -> bool {
        use MonotoneProperty::*;
        match (self, other) {
            (Edge, Edge) | (Connected, Connected) => true,
            (MinDegree { k: a, vertex: u }, MinDegree { k: b, vertex: v }) => a == b && u == v,
            (Clique { k: a }, Clique { k: b }) => a == b,
            (Giant { alpha: a }, Giant { alpha: b }) => a == b,
            (Custom { name: a, predicate: p, .. }, Custom { name: b, predicate: q, .. }) => a == b && Arc::ptr_eq(p, q),
            _ => false,
        }
    }
}

impl FromStr for MonotoneProperty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::usage(format!("unknown or malformed property `{s}`"));
        let (name, arg) = match s.trim().split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.trim(), None),
        };
        match (name, arg) {
            ("edge", None) => Ok(MonotoneProperty::Edge),
            ("connected", None) => Ok(MonotoneProperty::Connected),
            ("mindeg", Some(a)) => {
                let (k, vertex) = match a.split_once('@') {
                    Some((k, v)) => {
                        let v: usize = v.parse().map_err(|_| bad())?;
                        if v == 0 {
                            return Err(bad());
                        }
                        (k, Some(v - 1))
                    }
                    None => (a, None),
                };
                Ok(MonotoneProperty::MinDegree { k: k.parse().map_err(|_| bad())?, vertex })
            }
            ("clique", Some(a)) => Ok(MonotoneProperty::Clique { k: a.parse().map_err(|_| bad())? }),
            ("giant", Some(a)) => {
                let alpha: f64 = a.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&alpha) {
                    return Err(bad());
                }
                Ok(MonotoneProperty::Giant { alpha })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for MonotoneProperty {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MonotoneProperty {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

//! Feedforward wiring between the input and the reservoirs.
//!
//! Reservoirs are indexed from 0 in column-major order: every reservoir of
//! column `k` comes before any reservoir of column `k + 1`. With that
//! ordering every reservoir-to-reservoir edge goes from a lower to a strictly
//! higher index, so the connectivity is acyclic by construction and a plain
//! index loop is a valid topological order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TopologyKind {
    /// `width` independent reservoirs, all driven by the input.
    Wide(usize),
    /// A single chain of `depth` reservoirs.
    Layered(usize),
    /// `n` columns of `n` reservoirs, fully connected column to column.
    CrissCross(usize),
    /// `width` independent chains, each `depth` reservoirs long.
    WideLayered { width: usize, depth: usize },
}

impl TopologyKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TopologyKind::Wide(w) => w >= 1,
            TopologyKind::Layered(d) => d >= 1,
            TopologyKind::CrissCross(n) => n >= 1,
            TopologyKind::WideLayered { width, depth } => width >= 1 && depth >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("topology sizes must be >= 1: {self}")))
        }
    }

    pub fn n_reservoirs(&self) -> usize {
        match *self {
            TopologyKind::Wide(w) => w,
            TopologyKind::Layered(d) => d,
            TopologyKind::CrissCross(n) => n * n,
            TopologyKind::WideLayered { width, depth } => width * depth,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            TopologyKind::Wide(_) => "wide",
            TopologyKind::Layered(_) => "layered",
            TopologyKind::CrissCross(_) => "crisscross",
            TopologyKind::WideLayered { .. } => "wide+layered",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TopologyKind::Wide(w) => write!(f, "wide:{w}"),
            TopologyKind::Layered(d) => write!(f, "layered:{d}"),
            TopologyKind::CrissCross(n) => write!(f, "crisscross:{n}"),
            TopologyKind::WideLayered { width, depth } => write!(f, "wide+layered:{width}x{depth}"),
        }
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    /// Parses `wide:3`, `layered:3`, `crisscross:2` or `wide+layered:2x2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid topology {s:?}"));
        let (name, sizes) = s.split_once(':').ok_or_else(bad)?;
        let sizes = sizes
            .split('x')
            .map(|p| {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                    Err(bad())
                } else {
                    p.parse::<usize>().map_err(|_| bad())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let kind = match (name, sizes.as_slice()) {
            ("wide", [w]) => TopologyKind::Wide(*w),
            ("layered", [d]) => TopologyKind::Layered(*d),
            ("crisscross", [n]) => TopologyKind::CrissCross(*n),
            ("wide+layered", [w, d]) => TopologyKind::WideLayered {
                width: *w,
                depth: *d,
            },
            _ => return Err(bad()),
        };
        kind.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(kind)
    }
}

/// A node that can feed a reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Input,
    Reservoir(usize),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Input => write!(f, "u"),
            Source::Reservoir(i) => write!(f, "r{}", i + 1),
        }
    }
}

/// Binary feedforward adjacency over `{u} ∪ {r_0 .. r_{N_L-1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    kind: TopologyKind,
    n_l: usize,
    from_input: Vec<bool>,
    // row = source reservoir, column = destination reservoir
    between: Vec<Vec<bool>>,
}

impl Connectivity {
    pub fn build(kind: TopologyKind) -> Result<Self> {
        kind.validate()?;
        let n_l = kind.n_reservoirs();
        let mut c = Connectivity {
            kind,
            n_l,
            from_input: vec![false; n_l],
            between: vec![vec![false; n_l]; n_l],
        };
        match kind {
            TopologyKind::Wide(_) => c.from_input.fill(true),
            TopologyKind::Layered(d) => {
                c.from_input[0] = true;
                for i in 1..d {
                    c.between[i - 1][i] = true;
                }
            }
            TopologyKind::CrissCross(n) => {
                for row in 0..n {
                    c.from_input[row] = true;
                }
                for col in 0..n - 1 {
                    for src in 0..n {
                        for dst in 0..n {
                            c.between[col * n + src][(col + 1) * n + dst] = true;
                        }
                    }
                }
            }
            TopologyKind::WideLayered { width, depth } => {
                for chain in 0..width {
                    c.from_input[chain] = true;
                    for level in 1..depth {
                        c.between[(level - 1) * width + chain][level * width + chain] = true;
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n_reservoirs(&self) -> usize {
        self.n_l
    }

    pub fn has_edge(&self, src: Source, dst: usize) -> bool {
        if dst >= self.n_l {
            return false;
        }
        match src {
            Source::Input => self.from_input[dst],
            Source::Reservoir(s) => s < self.n_l && self.between[s][dst],
        }
    }

    /// Sources feeding reservoir `l`, input first, then reservoirs by index.
    pub fn predecessors(&self, l: usize) -> Result<Vec<Source>> {
        if l >= self.n_l {
            return Err(Error::Dimension(format!(
                "reservoir index {l} out of range for {} reservoirs",
                self.n_l
            )));
        }
        let mut out = Vec::new();
        if self.from_input[l] {
            out.push(Source::Input);
        }
        out.extend((0..self.n_l).filter(|&s| self.between[s][l]).map(Source::Reservoir));
        Ok(out)
    }

    /// Out-degree of a source.
    pub fn fan(&self, src: Source) -> usize {
        (0..self.n_l).filter(|&d| self.has_edge(src, d)).count()
    }

    /// In-degree of a reservoir.
    pub fn fan_in(&self, dst: usize) -> usize {
        if dst >= self.n_l {
            return 0;
        }
        usize::from(self.from_input[dst]) + (0..self.n_l).filter(|&s| self.between[s][dst]).count()
    }

    /// Reservoirs that receive the raw input, in index order.
    pub fn input_reservoirs(&self) -> Vec<usize> {
        (0..self.n_l).filter(|&l| self.from_input[l]).collect()
    }

    /// All reservoir-to-reservoir edges as `(src, dst)`, sorted.
    pub fn reservoir_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n_l {
            for d in 0..self.n_l {
                if self.between[s][d] {
                    out.push((s, d));
                }
            }
        }
        out
    }

    /// Every edge including those leaving the input.
    pub fn edges(&self) -> Vec<(Source, usize)> {
        let mut out: Vec<_> = self
            .input_reservoirs()
            .into_iter()
            .map(|d| (Source::Input, d))
            .collect();
        out.extend(
            self.reservoir_edges()
                .into_iter()
                .map(|(s, d)| (Source::Reservoir(s), d)),
        );
        out
    }
}

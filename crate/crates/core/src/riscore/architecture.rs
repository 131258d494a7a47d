//! Circuit topologies of the reconfigurable impedance network.
//!
//! A topology is a symmetric boolean pattern saying which susceptance entries
//! may be nonzero. Diagonal entries (port-to-ground admittances) are always
//! allowed; off-diagonal entries mark an impedance connecting two ports.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture family, as named in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    Single,
    Fully,
    Group,
    TreeTridiagonal,
    Custom,
}

impl fmt::Display for MaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MaskKind::Single => "single",
            MaskKind::Fully => "fully",
            MaskKind::Group => "group",
            MaskKind::TreeTridiagonal => "tree_tridiagonal",
            MaskKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(MaskKind::Single),
            "fully" => Ok(MaskKind::Fully),
            "group" => Ok(MaskKind::Group),
            "tree_tridiagonal" | "tree" => Ok(MaskKind::TreeTridiagonal),
            "custom" => Ok(MaskKind::Custom),
            other => Err(Error::Architecture(format!("unknown mask kind `{other}`"))),
        }
    }
}

/// Resolved architecture tag carried by a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Single,
    Fully,
    Group { size: usize },
    TreeTridiagonal,
    Custom,
}

impl Architecture {
    pub fn kind(&self) -> MaskKind {
        match self {
            Architecture::Single => MaskKind::Single,
            Architecture::Fully => MaskKind::Fully,
            Architecture::Group { .. } => MaskKind::Group,
            Architecture::TreeTridiagonal => MaskKind::TreeTridiagonal,
            Architecture::Custom => MaskKind::Custom,
        }
    }

    pub fn group_size(&self) -> Option<usize> {
        match self {
            Architecture::Group { size } => Some(*size),
            _ => None,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Group { size } => write!(f, "group({size})"),
            other => write!(f, "{}", other.kind()),
        }
    }
}

/// Symmetric pattern of permitted susceptance entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchitectureMask {
    m: usize,
    allowed: Vec<bool>,
    kind: Architecture,
}

impl ArchitectureMask {
    pub fn single(m: usize) -> Result<Self> {
        make_architecture(MaskKind::Single, m, None)
    }

    pub fn fully(m: usize) -> Result<Self> {
        make_architecture(MaskKind::Fully, m, None)
    }

    pub fn group(m: usize, size: usize) -> Result<Self> {
        make_architecture(MaskKind::Group, m, Some(size))
    }

    pub fn tree_tridiagonal(m: usize) -> Result<Self> {
        make_architecture(MaskKind::TreeTridiagonal, m, None)
    }

    /// Builds a mask from an explicit pattern. The pattern must be square,
    /// symmetric and have an all-true diagonal.
    pub fn custom(pattern: &[Vec<bool>]) -> Result<Self> {
        let m = pattern.len();
        if m == 0 {
            return Err(Error::Architecture("element count must be at least 1".into()));
        }
        if pattern.iter().any(|row| row.len() != m) {
            return Err(Error::Architecture("pattern must be square".into()));
        }
        for i in 0..m {
            if !pattern[i][i] {
                return Err(Error::Architecture(format!("diagonal entry ({i},{i}) must be allowed")));
            }
            for j in 0..i {
                if pattern[i][j] != pattern[j][i] {
                    return Err(Error::Architecture(format!("pattern not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self {
            m,
            allowed: pattern.iter().flatten().copied().collect(),
            kind: Architecture::Custom,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> Architecture {
        self.kind
    }

    #[inline]
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.m + j]
    }

    /// Number of free susceptance parameters (diagonal plus strict upper triangle).
    pub fn free_parameters(&self) -> usize {
        (0..self.m)
            .map(|i| (i..self.m).filter(|&j| self.allowed(i, j)).count())
            .sum()
    }

    /// Number of interconnecting impedances (allowed strictly-upper entries).
    pub fn interconnections(&self) -> usize {
        self.free_parameters() - self.m
    }

    /// True when the off-diagonal pattern, read as a graph on the ports,
    /// is a spanning tree.
    pub fn is_spanning_tree(&self) -> bool {
        if self.interconnections() != self.m - 1 {
            return false;
        }
        // m - 1 edges plus connectivity implies acyclic.
        let mut seen = vec![false; self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.m {
                if j != i && self.allowed(i, j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Builds the sparsity pattern for an architecture family.
pub fn make_architecture(kind: MaskKind, m: usize, group_size: Option<usize>) -> Result<ArchitectureMask> {
    if m == 0 {
        return Err(Error::Architecture("element count must be at least 1".into()));
    }
    let (arch, rule): (Architecture, Box<dyn Fn(usize, usize) -> bool>) = match kind {
        MaskKind::Single => (Architecture::Single, Box::new(|i, j| i == j)),
        MaskKind::Fully => (Architecture::Fully, Box::new(|_, _| true)),
        MaskKind::Group => {
            let size = group_size
                .ok_or_else(|| Error::Architecture("group kind requires a group size".into()))?;
            if size == 0 || m % size != 0 {
                return Err(Error::Architecture(format!(
                    "group size {size} does not divide element count {m}"
                )));
            }
            (Architecture::Group { size }, Box::new(move |i, j| i / size == j / size))
        }
        MaskKind::TreeTridiagonal => (Architecture::TreeTridiagonal, Box::new(|i, j| i.abs_diff(j) <= 1)),
        MaskKind::Custom => {
            return Err(Error::Architecture(
                "custom masks are built from an explicit pattern".into(),
            ))
        }
    };
    let allowed = (0..m * m).map(|idx| rule(idx / m, idx % m)).collect();
    Ok(ArchitectureMask { m, allowed, kind: arch })
}

/// Ordered upper-triangular column sets, one per row.
///
/// `sets[i]` lists the columns `j >= i` with an allowed entry; concatenating
/// the rows gives the packing order of the free-parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    sets: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    total: usize,
}

impl IndexSets {
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Offset of row `i`'s block inside the packed vector.
    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    /// `(row, col)` pairs in packing order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }
}

pub fn index_sets(mask: &ArchitectureMask) -> IndexSets {
    let m = mask.m();
    let sets: Vec<Vec<usize>> = (0..m)
        .map(|i| (i..m).filter(|&j| mask.allowed(i, j)).collect())
        .collect();
    let mut offsets = Vec::with_capacity(m);
    let mut acc = 0;
    for s in &sets {
        offsets.push(acc);
        acc += s.len();
    }
    IndexSets { sets, offsets, total: acc }
}

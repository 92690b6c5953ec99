//! Must-link / cannot-link constraints and the set that holds them.

use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    MustLink,
    CannotLink,
}

impl Relation {
    /// Wire code used in constraint files.
    pub fn code(self) -> &'static str {
        match self {
            Relation::MustLink => "ML",
            Relation::CannotLink => "CL",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "ML" => Some(Relation::MustLink),
            "CL" => Some(Relation::CannotLink),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    EdgeQuery,
    TriangleQuery,
    Mock,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::EdgeQuery => "edge-query",
            Source::TriangleQuery => "triangle-query",
            Source::Mock => "mock",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "edge-query" => Some(Source::EdgeQuery),
            "triangle-query" => Some(Source::TriangleQuery),
            "mock" => Some(Source::Mock),
            _ => None,
        }
    }
}

/// A constraint on an unordered pair of corpus ids, stored with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub a: usize,
    pub b: usize,
    pub relation: Relation,
    pub source: Source,
    pub raw_answer: String,
}

impl Constraint {
    pub fn new(x: usize, y: usize, relation: Relation, source: Source, raw_answer: impl Into<String>) -> Result<Self> {
        if x == y {
            return Err(Error::InvalidParameter(alloc::format!("self-pair ({x}, {y})")));
        }
        Ok(Constraint {
            a: x.min(y),
            b: x.max(y),
            relation,
            source,
            raw_answer: raw_answer.into(),
        })
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    Added,
    /// Same pair and relation already present.
    Duplicate,
    /// Same pair with the opposite relation already present; the earlier
    /// one is kept.
    Conflict,
}

/// Disjoint must-link and cannot-link sets, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    items: Vec<Constraint>,
    index: HashMap<(usize, usize), usize>,
    conflicts: usize,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// First occurrence of a pair wins; later conflicting entries are
    /// counted and dropped.
    pub fn insert(&mut self, c: Constraint) -> Insert {
        match self.index.get(&c.pair()) {
            Some(&i) if self.items[i].relation == c.relation => Insert::Duplicate,
            Some(_) => {
                self.conflicts += 1;
                log::warn!("conflicting constraint on ({}, {}) dropped", c.a, c.b);
                Insert::Conflict
            }
            None => {
                self.index.insert(c.pair(), self.items.len());
                self.items.push(c);
                Insert::Added
            }
        }
    }

    pub fn extend<I: IntoIterator<Item = Constraint>>(&mut self, iter: I) {
        for c in iter {
            self.insert(c);
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn conflicts(&self) -> usize {
        self.conflicts
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.items.iter()
    }

    pub fn must_links(&self) -> impl Iterator<Item = &Constraint> {
        self.items.iter().filter(|c| c.relation == Relation::MustLink)
    }

    pub fn cannot_links(&self) -> impl Iterator<Item = &Constraint> {
        self.items.iter().filter(|c| c.relation == Relation::CannotLink)
    }

    pub fn must_link_count(&self) -> usize {
        self.must_links().count()
    }

    pub fn cannot_link_count(&self) -> usize {
        self.cannot_links().count()
    }

    pub fn relation(&self, x: usize, y: usize) -> Option<Relation> {
        self.index
            .get(&(x.min(y), x.max(y)))
            .map(|&i| self.items[i].relation)
    }

    /// Largest id referenced, if any.
    pub fn max_id(&self) -> Option<usize> {
        self.items.iter().map(|c| c.b).max()
    }
}

impl FromIterator<Constraint> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = Constraint>>(iter: I) -> Self {
        let mut set = ConstraintSet::new();
        set.extend(iter);
        set
    }
}

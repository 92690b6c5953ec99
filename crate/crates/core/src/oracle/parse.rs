//! Lenient parsing of oracle replies.

use alloc::string::String;
use alloc::vec::Vec;

use crate::budget::QueryMode;
use crate::oracle::constraint::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeAnswer {
    Yes,
    No,
}

/// The five consistent outcomes of a triplet query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleAnswer {
    /// (a) all three share a category.
    AllSame,
    /// (b) only #1 and #2.
    FirstSecond,
    /// (c) only #1 and #3.
    FirstThird,
    /// (d) only #2 and #3.
    SecondThird,
    /// (e) none.
    AllDifferent,
}

impl TriangleAnswer {
    pub const ALL: [TriangleAnswer; 5] = [
        TriangleAnswer::AllSame,
        TriangleAnswer::FirstSecond,
        TriangleAnswer::FirstThird,
        TriangleAnswer::SecondThird,
        TriangleAnswer::AllDifferent,
    ];

    pub fn letter(self) -> char {
        match self {
            TriangleAnswer::AllSame => 'a',
            TriangleAnswer::FirstSecond => 'b',
            TriangleAnswer::FirstThird => 'c',
            TriangleAnswer::SecondThird => 'd',
            TriangleAnswer::AllDifferent => 'e',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.letter() == c)
    }

    /// The answer implied by the three pairwise co-memberships
    /// `(#1~#2, #1~#3, #2~#3)`, if they are consistent.
    pub fn from_comemberships(ab: bool, ac: bool, bc: bool) -> Option<Self> {
        match (ab, ac, bc) {
            (true, true, true) => Some(TriangleAnswer::AllSame),
            (true, false, false) => Some(TriangleAnswer::FirstSecond),
            (false, true, false) => Some(TriangleAnswer::FirstThird),
            (false, false, true) => Some(TriangleAnswer::SecondThird),
            (false, false, false) => Some(TriangleAnswer::AllDifferent),
            _ => None,
        }
    }

    /// Relations of the pairs `(#1,#2)`, `(#1,#3)`, `(#2,#3)`.
    pub fn relations(self) -> [Relation; 3] {
        use Relation::{CannotLink as C, MustLink as M};
        match self {
            TriangleAnswer::AllSame => [M, M, M],
            TriangleAnswer::FirstSecond => [M, C, C],
            TriangleAnswer::FirstThird => [C, M, C],
            TriangleAnswer::SecondThird => [C, C, M],
            TriangleAnswer::AllDifferent => [C, C, C],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    Edge(EdgeAnswer),
    Triangle(TriangleAnswer),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFailure {
    #[error("no recognizable answer in {0:?}")]
    Unrecognized(String),
    #[error("ambiguous answer in {0:?}")]
    Ambiguous(String),
}

fn words(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

fn unique<T: PartialEq + Copy>(found: &[T], raw: &str) -> Result<T, ParseFailure> {
    match found {
        [] => Err(ParseFailure::Unrecognized(raw.into())),
        [first, rest @ ..] if rest.iter().all(|x| x == first) => Ok(*first),
        _ => Err(ParseFailure::Ambiguous(raw.into())),
    }
}

pub fn parse_edge_response(raw: &str) -> Result<EdgeAnswer, ParseFailure> {
    let found: Vec<EdgeAnswer> = words(raw)
        .iter()
        .filter_map(|w| match w.as_str() {
            "yes" => Some(EdgeAnswer::Yes),
            "no" => Some(EdgeAnswer::No),
            _ => None,
        })
        .collect();
    unique(&found, raw)
}

pub fn parse_triangle_response(raw: &str) -> Result<TriangleAnswer, ParseFailure> {
    let letters: Vec<TriangleAnswer> = words(raw)
        .iter()
        .filter_map(|w| {
            let mut chars = w.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => TriangleAnswer::from_letter(c),
                _ => None,
            }
        })
        .collect();
    if !letters.is_empty() {
        return unique(&letters, raw);
    }
    // replies that restate the option text without its label
    let lower = raw.to_lowercase();
    let phrases = [
        ("all are same", TriangleAnswer::AllSame),
        ("only #1 and #2", TriangleAnswer::FirstSecond),
        ("only #1 and #3", TriangleAnswer::FirstThird),
        ("only #2 and #3", TriangleAnswer::SecondThird),
        ("none", TriangleAnswer::AllDifferent),
    ];
    let found: Vec<TriangleAnswer> = phrases
        .iter()
        .filter(|(p, _)| lower.contains(p))
        .map(|&(_, a)| a)
        .collect();
    unique(&found, raw)
}

pub fn parse_response(raw: &str, mode: QueryMode) -> Result<Answer, ParseFailure> {
    match mode {
        QueryMode::Edge => parse_edge_response(raw).map(Answer::Edge),
        QueryMode::Triangle => parse_triangle_response(raw).map(Answer::Triangle),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_replies() {
        assert_eq!(parse_edge_response("Yes"), Ok(EdgeAnswer::Yes));
        assert_eq!(parse_edge_response("  no. "), Ok(EdgeAnswer::No));
        assert_eq!(parse_edge_response("Answer: YES"), Ok(EdgeAnswer::Yes));
        assert_eq!(parse_edge_response("No, they are not."), Ok(EdgeAnswer::No));
        assert!(matches!(parse_edge_response("maybe"), Err(ParseFailure::Unrecognized(_))));
        assert!(matches!(parse_edge_response("yes or no"), Err(ParseFailure::Ambiguous(_))));
        assert!(matches!(parse_edge_response("nothing"), Err(ParseFailure::Unrecognized(_))));
    }

    #[test]
    fn triangle_replies() {
        assert_eq!(parse_triangle_response("(b)"), Ok(TriangleAnswer::FirstSecond));
        assert_eq!(parse_triangle_response("b."), Ok(TriangleAnswer::FirstSecond));
        assert_eq!(parse_triangle_response("Answer: d"), Ok(TriangleAnswer::SecondThird));
        assert_eq!(parse_triangle_response("E"), Ok(TriangleAnswer::AllDifferent));
        assert_eq!(
            parse_triangle_response("(c) Only #1 and #3 are same category."),
            Ok(TriangleAnswer::FirstThird)
        );
        assert_eq!(parse_triangle_response("None."), Ok(TriangleAnswer::AllDifferent));
        assert!(parse_triangle_response("a or b").is_err());
        assert!(parse_triangle_response("maybe").is_err());
        assert!(parse_triangle_response("(f)").is_err());
    }

    #[test]
    fn mode_dispatch() {
        assert_eq!(parse_response("Yes", QueryMode::Edge), Ok(Answer::Edge(EdgeAnswer::Yes)));
        assert_eq!(
            parse_response("(a)", QueryMode::Triangle),
            Ok(Answer::Triangle(TriangleAnswer::AllSame))
        );
    }

    #[test]
    fn comemberships_cover_exactly_five_outcomes() {
        let mut valid = 0;
        for mask in 0..8u8 {
            let (ab, ac, bc) = (mask & 1 != 0, mask & 2 != 0, mask & 4 != 0);
            if let Some(a) = TriangleAnswer::from_comemberships(ab, ac, bc) {
                valid += 1;
                let r = a.relations();
                assert_eq!(
                    [ab, ac, bc],
                    r.map(|x| x == Relation::MustLink),
                    "relations must restate the co-memberships"
                );
            }
        }
        assert_eq!(valid, 5);
    }
}

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    build_edge_prompt, build_triangle_prompt, parse_response, Answer, Constraint, ConstraintSet, EdgeAnswer,
    Oracle, OracleError, PromptTemplate, Query, Relation, Source,
};
use crate::budget::QueryMode;
use crate::corpus::{Corpus, TokenCounter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOptions {
    /// Extra attempts after the first for a query whose reply failed.
    pub retries: usize,
}

impl Default for QueryOptions {
    fn default() -> Self {
        QueryOptions { retries: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    Transport(String),
    Unparseable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedQuery {
    pub ids: Vec<usize>,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub constraints: ConstraintSet,
    pub answered: usize,
    pub skipped: Vec<SkippedQuery>,
    /// Calls made to the oracle, retries included.
    pub dispatched: usize,
    pub parse_failures: usize,
    pub transport_failures: usize,
    /// Tokens of every prompt dispatched, retries included.
    pub prompt_tokens: usize,
    /// Corpus-text tokens of the queried texts, counted once per query.
    pub text_tokens: usize,
}

/// Pair queries over corpus ids, in the given order.
pub fn edge_queries(corpus: &Corpus, pairs: &[(usize, usize)], template: &PromptTemplate) -> Vec<Query> {
    pairs
        .iter()
        .map(|&(a, b)| Query {
            mode: QueryMode::Edge,
            ids: vec![a, b],
            prompt: build_edge_prompt(&corpus.text(a).text, &corpus.text(b).text, template),
        })
        .collect()
}

/// Triplet queries over corpus ids, in the given order.
pub fn triangle_queries(
    corpus: &Corpus,
    triples: &[(usize, usize, usize)],
    template: &PromptTemplate,
) -> Vec<Query> {
    triples
        .iter()
        .map(|&(a, b, c)| Query {
            mode: QueryMode::Triangle,
            ids: vec![a, b, c],
            prompt: build_triangle_prompt(
                &corpus.text(a).text,
                &corpus.text(b).text,
                &corpus.text(c).text,
                template,
            ),
        })
        .collect()
}

pub fn run_edge_queries(
    corpus: &Corpus,
    pairs: &[(usize, usize)],
    template: &PromptTemplate,
    oracle: &dyn Oracle,
    options: QueryOptions,
    tokenizer: &dyn TokenCounter,
) -> QueryOutcome {
    let queries = edge_queries(corpus, pairs, template);
    run_queries(corpus, &queries, oracle, options, tokenizer)
}

pub fn run_triangle_queries(
    corpus: &Corpus,
    triples: &[(usize, usize, usize)],
    template: &PromptTemplate,
    oracle: &dyn Oracle,
    options: QueryOptions,
    tokenizer: &dyn TokenCounter,
) -> QueryOutcome {
    let queries = triangle_queries(corpus, triples, template);
    run_queries(corpus, &queries, oracle, options, tokenizer)
}

/// Dispatches `queries` in batches, retrying failed ones, then assembles
/// constraints in query order so completion order never matters.
pub fn run_queries(
    corpus: &Corpus,
    queries: &[Query],
    oracle: &dyn Oracle,
    options: QueryOptions,
    tokenizer: &dyn TokenCounter,
) -> QueryOutcome {
    let mut answers: Vec<Option<(Answer, String)>> = vec![None; queries.len()];
    let mut last_failure: Vec<Option<SkipReason>> = vec![None; queries.len()];
    let mut pending: Vec<usize> = (0..queries.len()).collect();
    let mut outcome = QueryOutcome {
        constraints: ConstraintSet::new(),
        answered: 0,
        skipped: Vec::new(),
        dispatched: 0,
        parse_failures: 0,
        transport_failures: 0,
        prompt_tokens: 0,
        text_tokens: queries
            .iter()
            .flat_map(|q| q.ids.iter())
            .map(|&id| corpus.text(id).token_count)
            .sum(),
    };

    for _attempt in 0..=options.retries {
        if pending.is_empty() {
            break;
        }
        let batch: Vec<Query> = pending.iter().map(|&i| queries[i].clone()).collect();
        outcome.dispatched += batch.len();
        outcome.prompt_tokens += batch.iter().map(|q| tokenizer.count(&q.prompt)).sum::<usize>();
        let replies = oracle.answer_batch(&batch);
        let mut still_pending = Vec::new();
        for (&i, reply) in pending.iter().zip(replies) {
            match reply {
                Ok(raw) => match parse_response(&raw, queries[i].mode) {
                    Ok(answer) => answers[i] = Some((answer, raw)),
                    Err(e) => {
                        outcome.parse_failures += 1;
                        last_failure[i] = Some(SkipReason::Unparseable(alloc::format!("{e}")));
                        still_pending.push(i);
                    }
                },
                Err(OracleError::Transport(msg)) | Err(OracleError::Config(msg)) => {
                    outcome.transport_failures += 1;
                    last_failure[i] = Some(SkipReason::Transport(msg));
                    still_pending.push(i);
                }
            }
        }
        pending = still_pending;
    }

    for i in pending {
        let reason = last_failure[i].take().expect("pending queries have failed");
        log::warn!("query over {:?} skipped: {:?}", queries[i].ids, reason);
        outcome.skipped.push(SkippedQuery {
            ids: queries[i].ids.clone(),
            reason,
        });
    }

    for (query, answer) in queries.iter().zip(answers) {
        let Some((answer, raw)) = answer else { continue };
        outcome.answered += 1;
        for c in constraints_from_answer(&query.ids, answer, &raw) {
            outcome.constraints.insert(c);
        }
    }
    outcome
}

/// Constraints implied by one parsed reply over `ids` (prompt order).
pub(crate) fn constraints_from_answer(ids: &[usize], answer: Answer, raw: &str) -> Vec<Constraint> {
    let make = |x: usize, y: usize, rel: Relation, source: Source| {
        Constraint::new(x, y, rel, source, raw).expect("selected texts are distinct")
    };
    match (answer, ids) {
        (Answer::Edge(e), &[a, b]) => {
            let rel = match e {
                EdgeAnswer::Yes => Relation::MustLink,
                EdgeAnswer::No => Relation::CannotLink,
            };
            vec![make(a, b, rel, Source::EdgeQuery)]
        }
        (Answer::Triangle(t), &[a, b, c]) => {
            let [ab, ac, bc] = t.relations();
            vec![
                make(a, b, ab, Source::TriangleQuery),
                make(a, c, ac, Source::TriangleQuery),
                make(b, c, bc, Source::TriangleQuery),
            ]
        }
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TextInstance, WhitespaceTokens};
    use crate::oracle::{MockOracle, TriangleAnswer};
    use alloc::string::ToString;
    use core::cell::RefCell;

    fn corpus(labels: &[usize]) -> Corpus {
        let texts = labels
            .iter()
            .enumerate()
            .map(|(i, l)| TextInstance::new(i, "two words", None, Some(l.to_string()), &WhitespaceTokens))
            .collect();
        let rows: Vec<[f64; 2]> = (0..labels.len()).map(|i| [1.0, i as f64]).collect();
        Corpus::new(texts, &rows).unwrap()
    }

    #[test]
    fn triangle_answers_map_to_five_cases() {
        let ids = [10, 20, 30];
        let rel = |t: TriangleAnswer| {
            constraints_from_answer(&ids, Answer::Triangle(t), "")
                .into_iter()
                .map(|c| (c.a, c.b, c.relation))
                .collect::<Vec<_>>()
        };
        use Relation::{CannotLink as C, MustLink as M};
        assert_eq!(rel(TriangleAnswer::AllSame), vec![(10, 20, M), (10, 30, M), (20, 30, M)]);
        assert_eq!(rel(TriangleAnswer::FirstSecond), vec![(10, 20, M), (10, 30, C), (20, 30, C)]);
        assert_eq!(rel(TriangleAnswer::FirstThird), vec![(10, 20, C), (10, 30, M), (20, 30, C)]);
        assert_eq!(rel(TriangleAnswer::SecondThird), vec![(10, 20, C), (10, 30, C), (20, 30, M)]);
        assert_eq!(rel(TriangleAnswer::AllDifferent), vec![(10, 20, C), (10, 30, C), (20, 30, C)]);
    }

    #[test]
    fn perfect_mock_edges() {
        let c = corpus(&[0, 0, 1]);
        let mock = MockOracle::perfect(c.label_indices().unwrap());
        let out = run_edge_queries(
            &c,
            &[(0, 1), (0, 2), (1, 2)],
            &PromptTemplate::default(),
            &mock,
            QueryOptions::default(),
            &WhitespaceTokens,
        );
        assert_eq!(out.constraints.len(), 3);
        assert_eq!(out.constraints.relation(0, 1), Some(Relation::MustLink));
        assert_eq!(out.constraints.relation(0, 2), Some(Relation::CannotLink));
        assert_eq!(out.text_tokens, 12);
        assert_eq!(out.dispatched, 3);
    }

    struct Flaky {
        calls: RefCell<usize>,
        fail_first: usize,
        reply: &'static str,
    }

    impl Oracle for Flaky {
        fn kind(&self) -> &str {
            "flaky"
        }
        fn answer(&self, _q: &Query) -> Result<String, OracleError> {
            let mut calls = self.calls.borrow_mut();
            *calls += 1;
            if *calls <= self.fail_first {
                Err(OracleError::Transport("timeout".into()))
            } else {
                Ok(self.reply.into())
            }
        }
    }

    #[test]
    fn transport_errors_are_retried_then_skipped() {
        let c = corpus(&[0, 0, 1]);
        let ok = Flaky { calls: RefCell::new(0), fail_first: 2, reply: "Yes" };
        let out = run_edge_queries(&c, &[(0, 1)], &PromptTemplate::default(), &ok, QueryOptions::default(), &WhitespaceTokens);
        assert_eq!(out.constraints.len(), 1);
        assert_eq!(out.transport_failures, 2);
        assert_eq!(out.dispatched, 3);

        let dead = Flaky { calls: RefCell::new(0), fail_first: 99, reply: "Yes" };
        let out = run_edge_queries(&c, &[(0, 1)], &PromptTemplate::default(), &dead, QueryOptions::default(), &WhitespaceTokens);
        assert!(out.constraints.is_empty());
        assert_eq!(out.skipped.len(), 1);
        assert!(matches!(out.skipped[0].reason, SkipReason::Transport(_)));
    }

    #[test]
    fn unparseable_replies_contribute_nothing() {
        let c = corpus(&[0, 0, 1]);
        let vague = Flaky { calls: RefCell::new(0), fail_first: 0, reply: "maybe" };
        let out = run_triangle_queries(
            &c,
            &[(0, 1, 2)],
            &PromptTemplate::default(),
            &vague,
            QueryOptions { retries: 1 },
            &WhitespaceTokens,
        );
        assert!(out.constraints.is_empty());
        assert_eq!(out.parse_failures, 2);
        assert_eq!(out.answered, 0);
        assert!(matches!(out.skipped[0].reason, SkipReason::Unparseable(_)));
    }
}

//! Prompt rendering for pair and triplet queries.

use alloc::format;
use alloc::string::String;

/// Per-dataset wording of the clustering task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    /// Dataset name in the task line, e.g. `BBC News`.
    pub dataset: String,
    /// Item noun used to label texts, e.g. `News`.
    pub item: String,
    /// Category word, e.g. `news`.
    pub category: String,
    /// Verb phrase before "same", e.g. `belong to the`.
    pub relation: String,
    /// Comma before "and" when listing three items.
    pub serial_comma: bool,
}

impl PromptTemplate {
    pub fn new(dataset: &str, item: &str, category: &str) -> Self {
        PromptTemplate {
            dataset: dataset.into(),
            item: item.into(),
            category: category.into(),
            relation: "belong to the".into(),
            serial_comma: true,
        }
    }

    pub fn clinc() -> Self {
        PromptTemplate {
            relation: "are the".into(),
            serial_comma: false,
            ..Self::new("CLINC", "Domain", "domain")
        }
    }

    pub fn bbc_news() -> Self {
        Self::new("BBC News", "News", "news")
    }

    pub fn tweet() -> Self {
        Self::new("Tweet", "Tweet", "tweet")
    }

    pub fn bank77() -> Self {
        Self::new("Bank77", "Intent", "intent")
    }

    pub fn reddit() -> Self {
        Self::new("Reddit", "Topic", "topic")
    }

    pub fn massive() -> Self {
        Self::new("Massive", "Scenario", "scenario")
    }

    /// Looks up a built-in template by lowercase key.
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "clinc" => Self::clinc(),
            "bbc_news" | "bbc-news" | "bbcnews" => Self::bbc_news(),
            "tweet" => Self::tweet(),
            "bank77" => Self::bank77(),
            "reddit" => Self::reddit(),
            "massive" => Self::massive(),
            _ => return None,
        })
    }

    fn task_line(&self, unit: &str, reply: &str) -> String {
        format!(
            "Cluster {} docs by whether they {} same {} category. For each {unit}, respond with {reply} without explanation.",
            self.dataset, self.relation, self.category
        )
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::new("text", "Text", "topic")
    }
}

pub const TRIANGLE_OPTIONS: [&str; 5] = [
    "(a) All are same category.",
    "(b) Only #1 and #2 are same category.",
    "(c) Only #1 and #3 are same category.",
    "(d) Only #2 and #3 are same category.",
    "(e) None.",
];

pub fn build_edge_prompt(first: &str, second: &str, template: &PromptTemplate) -> String {
    let item = &template.item;
    format!(
        "{}\n- {item} #1: {first}\n- {item} #2: {second}\nGiven this context, do {item} #1 and {item} #2 likely correspond to the same {} category?",
        template.task_line("pair", "Yes or No"),
        template.category,
    )
}

pub fn build_triangle_prompt(first: &str, second: &str, third: &str, template: &PromptTemplate) -> String {
    let item = &template.item;
    let comma = if template.serial_comma { "," } else { "" };
    let mut prompt = format!(
        "{}\n- {item} #1: {first}\n- {item} #2: {second}\n- {item} #3: {third}\nGiven this context, do {item} #1, {item} #2{comma} and {item} #3 likely correspond to the same {} category?",
        template.task_line("triangle", "a, b, c, d, or e"),
        template.category,
    );
    for option in TRIANGLE_OPTIONS {
        prompt.push('\n');
        prompt.push_str(option);
    }
    prompt
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clinc_edge_layout() {
        let p = build_edge_prompt(
            "thank you ever so much for that!",
            "i want to eat something from turkey",
            &PromptTemplate::clinc(),
        );
        assert_eq!(
            p,
            "Cluster CLINC docs by whether they are the same domain category. For each pair, respond with Yes or No without explanation.\n\
             - Domain #1: thank you ever so much for that!\n\
             - Domain #2: i want to eat something from turkey\n\
             Given this context, do Domain #1 and Domain #2 likely correspond to the same domain category?"
        );
    }

    #[test]
    fn bbc_news_edge_question() {
        let p = build_edge_prompt("Ad sales boost Time Warner profit", "Air passengers win new EU rights", &PromptTemplate::bbc_news());
        assert!(p.starts_with("Cluster BBC News docs by whether they belong to the same news category."));
        assert!(p.contains("- News #1: Ad sales boost Time Warner profit\n"));
        assert!(p.ends_with("do News #1 and News #2 likely correspond to the same news category?"));
    }

    #[test]
    fn empty_text_renders_empty_slot() {
        let p = build_edge_prompt("", "x", &PromptTemplate::tweet());
        assert!(p.contains("- Tweet #1: \n"));
    }

    #[test]
    fn clinc_triangle_layout() {
        let p = build_triangle_prompt(
            "i am interested in a new insurance plan",
            "go to the next song and play it",
            "how many days of vacation do i have left",
            &PromptTemplate::clinc(),
        );
        assert_eq!(
            p,
            "Cluster CLINC docs by whether they are the same domain category. For each triangle, respond with a, b, c, d, or e without explanation.\n\
             - Domain #1: i am interested in a new insurance plan\n\
             - Domain #2: go to the next song and play it\n\
             - Domain #3: how many days of vacation do i have left\n\
             Given this context, do Domain #1, Domain #2 and Domain #3 likely correspond to the same domain category?\n\
             (a) All are same category.\n\
             (b) Only #1 and #2 are same category.\n\
             (c) Only #1 and #3 are same category.\n\
             (d) Only #2 and #3 are same category.\n\
             (e) None."
        );
    }

    #[test]
    fn massive_triangle_uses_scenario_and_serial_comma() {
        let t = PromptTemplate::preset("massive").unwrap();
        let p = build_triangle_prompt("alexa play my country playlist", "b", "c", &t);
        assert!(p.starts_with("Cluster Massive docs by whether they belong to the same scenario category. For each triangle"));
        assert!(p.contains("do Scenario #1, Scenario #2, and Scenario #3 likely correspond to the same scenario category?"));
        assert_eq!(p, build_triangle_prompt("alexa play my country playlist", "b", "c", &t));
    }
}

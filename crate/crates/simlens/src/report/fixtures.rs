//! Built-in corpus: five classical sorting algorithms in Python, stored
//! byte-exact (indentation included) so token counts stay stable.

use crate::embedder::CodeFragment;

const BUBBLE: &str = include_str!("../../fixtures/bubble_sort.py");
const SELECTION: &str = include_str!("../../fixtures/selection_sort.py");
const INSERTION: &str = include_str!("../../fixtures/insertion_sort.py");
const MERGE: &str = include_str!("../../fixtures/merge_sort.py");
const QUICK: &str = include_str!("../../fixtures/quick_sort.py");

pub const FIXTURE_IDS: [&str; 5] = [
    "bubble_sort",
    "selection_sort",
    "insertion_sort",
    "merge_sort",
    "quick_sort",
];

/// The full five-fragment corpus, in canonical order.
pub fn fixture_corpus() -> Vec<CodeFragment> {
    vec![
        CodeFragment::new("bubble_sort", BUBBLE),
        CodeFragment::new("selection_sort", SELECTION),
        CodeFragment::new("insertion_sort", INSERTION),
        CodeFragment::new("merge_sort", MERGE),
        CodeFragment::new("quick_sort", QUICK),
    ]
}

/// Look up one fixture by name; short forms like "bubble" are accepted.
pub fn fixture(name: &str) -> Option<CodeFragment> {
    let canonical = match name {
        "bubble" | "bubble_sort" => "bubble_sort",
        "selection" | "selection_sort" => "selection_sort",
        "insertion" | "insertion_sort" => "insertion_sort",
        "merge" | "merge_sort" => "merge_sort",
        "quick" | "quick_sort" => "quick_sort",
        _ => return None,
    };
    fixture_corpus().into_iter().find(|f| f.id == canonical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_has_five_nonempty_fragments() {
        let corpus = fixture_corpus();
        assert_eq!(corpus.len(), 5);
        for f in &corpus {
            f.validate().unwrap();
        }
    }

    #[test]
    fn short_names_resolve() {
        for name in ["bubble", "selection", "insertion", "merge", "quick"] {
            assert!(fixture(name).is_some());
        }
        assert!(fixture("bogo").is_none());
    }
}

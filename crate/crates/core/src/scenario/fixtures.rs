//! Scenario documents bundled with the library.

use super::document::Scenario;
use crate::error::{Error, Result};

const SOURCES: &[(&str, &str)] = &[
    ("example1", include_str!("../../fixtures/example1.json")),
    (
        "nomination-manipulation",
        include_str!("../../fixtures/nomination-manipulation.json"),
    ),
    (
        "theorem-rfssp",
        include_str!("../../fixtures/theorem-rfssp.json"),
    ),
    ("prop7", include_str!("../../fixtures/prop7.json")),
    ("prop8", include_str!("../../fixtures/prop8.json")),
    (
        "sp-unit-tiebreak",
        include_str!("../../fixtures/sp-unit-tiebreak.json"),
    ),
    (
        "approx-sp-final",
        include_str!("../../fixtures/approx-sp-final.json"),
    ),
    (
        "greedy-approx-overlap",
        include_str!("../../fixtures/greedy-approx-overlap.json"),
    ),
    (
        "kmedian-domination",
        include_str!("../../fixtures/kmedian-domination.json"),
    ),
];

pub const NAMES: [&str; 9] = [
    "example1",
    "nomination-manipulation",
    "theorem-rfssp",
    "prop7",
    "prop8",
    "sp-unit-tiebreak",
    "approx-sp-final",
    "greedy-approx-overlap",
    "kmedian-domination",
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Result<Scenario> {
    let text =
        source(name).ok_or_else(|| Error::invalid(format!("no bundled fixture named `{name}`")))?;
    Scenario::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_parses_and_round_trips() {
        assert_eq!(NAMES.len(), SOURCES.len());
        for name in NAMES {
            let s = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.document.name, name);
            let again = Scenario::from_json(&s.document.to_json()).unwrap();
            assert_eq!(again.document, s.document);
        }
    }
}

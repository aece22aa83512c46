use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const ALL: &str = "All";
pub const VOWELS: &str = "Vowels";
pub const ORAL_VOWELS: &str = "OralVowels";
pub const NASAL_VOWELS: &str = "NasalVowels";
pub const CONSONANTS: &str = "Consonants";
pub const NON_NASAL_CONSONANTS: &str = "NonNasalConsonants";
pub const NASAL_CONSONANTS: &str = "NasalConsonants";
pub const STOP_CONSONANTS: &str = "StopConsonants";
pub const FRICATIVES: &str = "Fricatives";
pub const LIQUIDS_GLIDES: &str = "LiquidsGlides";

/// Class names in report order.
pub const CLASS_NAMES: [&str; 10] = [
    ALL,
    VOWELS,
    ORAL_VOWELS,
    NASAL_VOWELS,
    CONSONANTS,
    NON_NASAL_CONSONANTS,
    NASAL_CONSONANTS,
    STOP_CONSONANTS,
    FRICATIVES,
    LIQUIDS_GLIDES,
];

/// Named phoneme classes. Labels outside every class (silences, pauses,
/// noise markers) are never selected by a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeTaxonomy {
    classes: BTreeMap<String, BTreeSet<String>>,
}

/// What a selector string resolved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector<'a> {
    Class(&'a BTreeSet<String>),
    Phoneme(&'a str),
}

impl Selector<'_> {
    pub fn matches(&self, label: &str) -> bool {
        match self {
            Selector::Class(set) => set.contains(label),
            Selector::Phoneme(p) => *p == label,
        }
    }
}

fn set(labels: &[&str]) -> BTreeSet<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

impl PhonemeTaxonomy {
    /// French phoneme inventory in IPA.
    ///
    /// The open back vowel of the reported per-phoneme results is read as the
    /// nasal `ɑ̃` (U+0251 U+0303); the source rendering is ambiguous, so the
    /// oral `ɑ` is kept as a separate oral vowel.
    pub fn french() -> Self {
        let oral = set(&[
            "i", "e", "\u{25b}", "a", "\u{251}", "\u{254}", "o", "u", "y", "\u{f8}", "\u{153}", "\u{259}",
        ]);
        let nasal_v = set(&["\u{251}\u{303}", "\u{254}\u{303}", "\u{25b}\u{303}", "\u{153}\u{303}"]);
        let stops = set(&["p", "t", "k", "b", "d", "g"]);
        let fricatives = set(&["f", "s", "\u{283}", "v", "z", "\u{292}"]);
        let nasal_c = set(&["m", "n", "\u{272}", "\u{14b}"]);
        let liquids_glides = set(&["l", "\u{281}", "j", "w", "\u{265}"]);

        let vowels: BTreeSet<String> = oral.union(&nasal_v).cloned().collect();
        let non_nasal: BTreeSet<String> = stops
            .iter()
            .chain(&fricatives)
            .chain(&liquids_glides)
            .cloned()
            .collect();
        let consonants: BTreeSet<String> = non_nasal.union(&nasal_c).cloned().collect();
        let all: BTreeSet<String> = vowels.union(&consonants).cloned().collect();

        let classes = BTreeMap::from([
            (ALL.to_string(), all),
            (VOWELS.to_string(), vowels),
            (ORAL_VOWELS.to_string(), oral),
            (NASAL_VOWELS.to_string(), nasal_v),
            (CONSONANTS.to_string(), consonants),
            (NON_NASAL_CONSONANTS.to_string(), non_nasal),
            (NASAL_CONSONANTS.to_string(), nasal_c),
            (STOP_CONSONANTS.to_string(), stops),
            (FRICATIVES.to_string(), fricatives),
            (LIQUIDS_GLIDES.to_string(), liquids_glides),
        ]);
        Self::new(classes).expect("built-in taxonomy is valid")
    }

    /// Validates `classes`. A missing `All` class is derived as the union of
    /// the others.
    pub fn new(mut classes: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        if !classes.contains_key(ALL) {
            let all = classes.values().flatten().cloned().collect();
            classes.insert(ALL.to_string(), all);
        }
        let tax = Self { classes };
        tax.validate()?;
        Ok(tax)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let classes: BTreeMap<String, BTreeSet<String>> = serde_json::from_str(text)?;
        Self::new(classes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.classes).expect("taxonomy serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for name in CLASS_NAMES {
            if !self.classes.contains_key(name) {
                return Err(Error::Taxonomy(format!("missing class {name}")));
            }
        }
        let c = |n: &str| &self.classes[n];
        let fail = |m: &str| Err(Error::Taxonomy(m.to_string()));
        let vowel_union: BTreeSet<String> = c(ORAL_VOWELS).union(c(NASAL_VOWELS)).cloned().collect();
        if *c(VOWELS) != vowel_union {
            return fail("Vowels must equal OralVowels ∪ NasalVowels");
        }
        if !c(NASAL_CONSONANTS).is_subset(c(CONSONANTS)) || !c(NON_NASAL_CONSONANTS).is_subset(c(CONSONANTS)) {
            return fail("Consonants must contain NasalConsonants and NonNasalConsonants");
        }
        if !c(LIQUIDS_GLIDES).is_subset(c(CONSONANTS)) {
            return fail("LiquidsGlides must be a subset of Consonants");
        }
        if !c(NASAL_CONSONANTS).is_disjoint(c(NON_NASAL_CONSONANTS)) {
            return fail("NasalConsonants and NonNasalConsonants must be disjoint");
        }
        for (name, members) in &self.classes {
            if !members.is_subset(c(ALL)) {
                return Err(Error::Taxonomy(format!("class {name} is not contained in All")));
            }
        }
        Ok(())
    }

    pub fn class(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.classes.get(name)
    }

    pub fn class_names(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn phonemes(&self) -> &BTreeSet<String> {
        &self.classes[ALL]
    }

    /// Class names take precedence over phoneme labels.
    pub fn resolve<'a>(&'a self, selector: &'a str) -> Result<Selector<'a>> {
        if let Some(set) = self.classes.get(selector) {
            Ok(Selector::Class(set))
        } else if self.classes[ALL].contains(selector) {
            Ok(Selector::Phoneme(selector))
        } else {
            Err(Error::UnknownSelector(selector.to_string()))
        }
    }
}

impl Default for PhonemeTaxonomy {
    fn default() -> Self {
        Self::french()
    }
}

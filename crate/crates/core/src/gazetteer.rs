//! Country gazetteer: canonical ISO alpha-3 codes, name aliases, and the
//! continent → subcontinent → country tree regions are built from.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::GazetteerError;
use crate::model::{CountryCode, Region, RegionSet, Shade};

const BUNDLED_JSON: &str = include_str!("../data/gazetteer.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryInfo {
    pub code: CountryCode,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subcontinent {
    pub name: String,
    pub countries: Vec<CountryCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continent {
    pub name: String,
    pub subcontinents: Vec<Subcontinent>,
}

impl Continent {
    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.subcontinents
            .iter()
            .flat_map(|s| s.countries.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeLevel {
    Continent,
    Subcontinent,
    Country,
}

/// A resolved node of the tree with all countries beneath it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub level: TreeLevel,
    pub name: String,
    pub countries: BTreeSet<CountryCode>,
}

/// Three-level hierarchy; every country sits under exactly one
/// subcontinent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionTree {
    continents: Vec<Continent>,
}

impl RegionTree {
    pub fn continents(&self) -> &[Continent] {
        &self.continents
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.continents.iter().flat_map(Continent::countries)
    }

    /// (continent, subcontinent) names a country sits under.
    pub fn placement(&self, code: CountryCode) -> Option<(&str, &str)> {
        self.continents.iter().find_map(|c| {
            c.subcontinents
                .iter()
                .find(|s| s.countries.contains(&code))
                .map(|s| (c.name.as_str(), s.name.as_str()))
        })
    }

    /// Case-insensitive lookup of a continent, then subcontinent, by name.
    pub fn group(&self, name: &str) -> Option<TreeNode> {
        let key = fold_name(name);
        if let Some(c) = self.continents.iter().find(|c| fold_name(&c.name) == key) {
            return Some(TreeNode {
                level: TreeLevel::Continent,
                name: c.name.clone(),
                countries: c.countries().collect(),
            });
        }
        self.continents
            .iter()
            .flat_map(|c| c.subcontinents.iter())
            .find(|s| fold_name(&s.name) == key)
            .map(|s| TreeNode {
                level: TreeLevel::Subcontinent,
                name: s.name.clone(),
                countries: s.countries.iter().copied().collect(),
            })
    }

    fn validate(&self) -> Result<BTreeSet<CountryCode>, GazetteerError> {
        let mut seen = BTreeSet::new();
        let mut continent_names = BTreeSet::new();
        let mut sub_names = BTreeSet::new();
        for c in &self.continents {
            if !continent_names.insert(fold_name(&c.name)) {
                return Err(GazetteerError::DuplicateNode(c.name.clone()));
            }
            for s in &c.subcontinents {
                if !sub_names.insert(fold_name(&s.name)) {
                    return Err(GazetteerError::DuplicateNode(s.name.clone()));
                }
                for code in &s.countries {
                    if !seen.insert(*code) {
                        return Err(GazetteerError::DuplicateCountry(code.to_string()));
                    }
                }
            }
        }
        Ok(seen)
    }
}

#[derive(Deserialize)]
struct GazetteerDoc {
    continents: RegionTree,
    countries: Vec<CountryInfo>,
}

/// Country names, aliases and the region tree.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    countries: BTreeMap<CountryCode, CountryInfo>,
    tree: RegionTree,
    lookup: HashMap<String, CountryCode>,
}

impl Gazetteer {
    /// The gazetteer compiled into the crate.
    pub fn bundled() -> &'static Gazetteer {
        static BUNDLED: OnceLock<Gazetteer> = OnceLock::new();
        BUNDLED
            .get_or_init(|| Gazetteer::from_json(BUNDLED_JSON).expect("bundled gazetteer is valid"))
    }

    pub fn from_json(json: &str) -> Result<Self, GazetteerError> {
        let doc: GazetteerDoc = serde_json::from_str(json)?;
        let placed = doc.continents.validate()?;

        let mut countries = BTreeMap::new();
        for info in doc.countries {
            if countries.insert(info.code, info.clone()).is_some() {
                return Err(GazetteerError::DuplicateCountry(info.code.to_string()));
            }
        }
        if let Some(code) = placed.iter().find(|c| !countries.contains_key(*c)) {
            return Err(GazetteerError::UnlistedCountry(code.to_string()));
        }
        if let Some(code) = countries.keys().find(|c| !placed.contains(*c)) {
            return Err(GazetteerError::UnplacedCountry(code.to_string()));
        }

        // canonical names take priority over aliases on collision
        let mut lookup = HashMap::new();
        for info in countries.values() {
            lookup.insert(fold_name(info.code.as_str()), info.code);
            lookup.insert(fold_name(&info.name), info.code);
        }
        for info in countries.values() {
            for alias in &info.aliases {
                lookup.entry(fold_name(alias)).or_insert(info.code);
            }
        }

        Ok(Self {
            countries,
            tree: doc.continents,
            lookup,
        })
    }

    pub fn tree(&self) -> &RegionTree {
        &self.tree
    }

    pub fn country(&self, code: CountryCode) -> Option<&CountryInfo> {
        self.countries.get(&code)
    }

    pub fn countries(&self) -> impl Iterator<Item = &CountryInfo> {
        self.countries.values()
    }

    pub fn contains(&self, code: CountryCode) -> bool {
        self.countries.contains_key(&code)
    }

    /// Resolves a free-form country name or code to its canonical code.
    /// Matching ignores case, diacritics and punctuation.
    pub fn normalize_country(&self, raw: &str) -> Option<CountryCode> {
        self.lookup.get(&fold_name(raw)).copied()
    }

    /// Resolves a name against the tree (continent, subcontinent) and then
    /// against individual countries.
    pub fn resolve_node(&self, name: &str) -> Option<TreeNode> {
        if let Some(node) = self.tree.group(name) {
            return Some(node);
        }
        let code = self.normalize_country(name)?;
        Some(TreeNode {
            level: TreeLevel::Country,
            name: self.countries[&code].name.clone(),
            countries: BTreeSet::from([code]),
        })
    }

    /// One visible region per continent, shaded in tree order.
    pub fn default_regions(&self) -> RegionSet {
        let regions = self
            .tree
            .continents
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Region::new(c.name.clone(), c.countries())
                    .expect("validated continents are non-empty")
                    .with_shade(Shade::cycled(i))
            })
            .collect();
        RegionSet::new(regions).expect("continent names are unique")
    }
}

/// Lower-cases, strips diacritics, maps `&` to `and` and `st` to `saint`,
/// and collapses every run of non-alphanumerics to one space.
pub fn fold_name(raw: &str) -> String {
    let stripped: String = raw
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .map(|c| match c {
            '&' => '+',
            c if c.is_alphanumeric() => c,
            _ => ' ',
        })
        .collect();
    stripped
        .split_whitespace()
        .map(|tok| match tok {
            "+" => "and",
            "st" => "saint",
            t => t,
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> CountryCode {
        s.parse().unwrap()
    }

    #[test]
    fn normalize_examples() {
        let g = Gazetteer::bundled();
        assert_eq!(g.normalize_country("Brazil"), Some(code("BRA")));
        assert_eq!(g.normalize_country("viet nam"), Some(code("VNM")));
        assert_eq!(g.normalize_country("Atlantis"), None);
    }

    #[test]
    fn normalize_ignores_diacritics_and_punctuation() {
        let g = Gazetteer::bundled();
        assert_eq!(g.normalize_country("COTE D'IVOIRE"), Some(code("CIV")));
        assert_eq!(g.normalize_country("Réunion"), Some(code("REU")));
        assert_eq!(g.normalize_country("St. Lucia"), Some(code("LCA")));
        assert_eq!(g.normalize_country("Trinidad & Tobago"), Some(code("TTO")));
        assert_eq!(g.normalize_country("lao pdr"), Some(code("LAO")));
        assert_eq!(g.normalize_country("jpn"), Some(code("JPN")));
    }

    #[test]
    fn every_country_placed_once() {
        let g = Gazetteer::bundled();
        let placed: Vec<_> = g.tree().countries().collect();
        let unique: BTreeSet<_> = placed.iter().copied().collect();
        assert_eq!(placed.len(), unique.len());
        assert_eq!(unique.len(), g.countries().count());
        for c in g.countries() {
            assert!(g.tree().placement(c.code).is_some(), "{}", c.code);
        }
    }

    #[test]
    fn default_regions_are_seven_continents() {
        let regions = Gazetteer::bundled().default_regions();
        let names: Vec<_> = regions.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "Africa",
                "Asia",
                "Europe",
                "North America",
                "South America",
                "Oceania",
                "Antarctica"
            ]
        );
    }

    #[test]
    fn resolves_tree_nodes() {
        let g = Gazetteer::bundled();
        let node = g.resolve_node("western africa").unwrap();
        assert_eq!(node.level, TreeLevel::Subcontinent);
        assert!(node.countries.contains(&code("NGA")));
        assert!(node.countries.contains(&code("SEN")));
        assert_eq!(g.resolve_node("Asia").unwrap().level, TreeLevel::Continent);
        assert_eq!(g.resolve_node("Japan").unwrap().countries.len(), 1);
        assert_eq!(
            g.tree().placement(code("JPN")),
            Some(("Asia", "Eastern Asia"))
        );
        assert!(g.resolve_node("Atlantis").is_none());
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let dup = r#"{"continents":[{"name":"A","subcontinents":[
            {"name":"x","countries":["AAA"]},{"name":"y","countries":["AAA"]}]}],
            "countries":[{"code":"AAA","name":"Aa"}]}"#;
        assert!(matches!(
            Gazetteer::from_json(dup),
            Err(GazetteerError::DuplicateCountry(_))
        ));
        let unplaced = r#"{"continents":[{"name":"A","subcontinents":[
            {"name":"x","countries":["AAA"]}]}],
            "countries":[{"code":"AAA","name":"Aa"},{"code":"BBB","name":"Bb"}]}"#;
        assert!(matches!(
            Gazetteer::from_json(unplaced),
            Err(GazetteerError::UnplacedCountry(_))
        ));
    }

    #[test]
    fn fold_name_examples() {
        assert_eq!(fold_name("  Viet   Nam "), "viet nam");
        assert_eq!(fold_name("Curaçao"), "curacao");
        assert_eq!(fold_name("Bosnia & Herzegovina"), "bosnia and herzegovina");
    }
}

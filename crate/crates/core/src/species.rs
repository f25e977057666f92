//! Species catalog: Rydberg and intermediate state labels, lifetimes, and the
//! decay rates gamma_r = 1/tau_c and gamma_p = 1/tau_p entering the
//! non-Hermitian model.
//!
//! The built-in data ships as a versioned TOML file compiled into the crate
//! (`data/species.toml`); values can be overridden through the main run
//! configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Catalogued atomic species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpeciesName {
    Rb87,
    Cs133,
}

impl fmt::Display for SpeciesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeciesName::Rb87 => write!(f, "Rb87"),
            SpeciesName::Cs133 => write!(f, "Cs133"),
        }
    }
}

impl FromStr for SpeciesName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Rb87" => Ok(SpeciesName::Rb87),
            "Cs133" => Ok(SpeciesName::Cs133),
            other => Err(Error::UnknownSpecies(other.to_string())),
        }
    }
}

/// Which resonance level serves as the intermediate state |P> of a target
/// atom. The second level lives roughly 5x longer and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IntermediateChoice {
    First,
    #[default]
    Second,
}

/// Resolved per-species data for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSpec {
    pub name: SpeciesName,
    pub rydberg_label: String,
    /// Rydberg-state lifetime tau_c in seconds; `inf` disables decay.
    pub rydberg_lifetime: f64,
    pub intermediate_label: String,
    /// Intermediate-state lifetime tau_p in seconds; `inf` disables decay.
    pub intermediate_lifetime: f64,
}

impl SpeciesSpec {
    /// Decay rates (gamma_r, gamma_p) in 1/s. Infinite lifetimes map to
    /// exactly zero.
    pub fn decay_rates(&self) -> (f64, f64) {
        let inv = |tau: f64| if tau.is_finite() { 1.0 / tau } else { 0.0 };
        (inv(self.rydberg_lifetime), inv(self.intermediate_lifetime))
    }
}

/// One entry of the species data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesEntry {
    pub rydberg_label: String,
    pub rydberg_lifetime_us: f64,
    pub first_intermediate_label: String,
    pub first_intermediate_lifetime_us: f64,
    pub second_intermediate_label: String,
    pub second_intermediate_lifetime_us: f64,
}

/// One pair-coefficient entry of the species data file. Frequencies are in
/// 2pi GHz um^n, radii in um.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub c3_ghz_um3_2pi: f64,
    pub c6_ghz_um6_2pi: f64,
    pub le_roy_um: f64,
    pub vdw_um: f64,
    pub regime: crate::geometry::RegimePolicy,
}

/// The species data file: species entries plus pairwise coefficients,
/// keyed by a normalized `"A:B"` pair key with A <= B lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    pub version: u32,
    pub species: BTreeMap<SpeciesName, SpeciesEntry>,
    pub pairs: BTreeMap<String, PairEntry>,
}

pub(crate) const BUILTIN_DATA: &str = include_str!("../data/species.toml");

impl Registry {
    /// The registry compiled into the crate.
    pub fn builtin() -> &'static Registry {
        static REGISTRY: OnceLock<Registry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            Registry::from_toml(BUILTIN_DATA).expect("embedded species data must parse")
        })
    }

    pub fn from_toml(text: &str) -> Result<Registry> {
        let reg: Registry =
            toml::from_str(text).map_err(|e| Error::Config(format!("species data: {e}")))?;
        for (key, entry) in &reg.pairs {
            if key_species(key).is_none() {
                return Err(Error::Config(format!(
                    "species data: malformed pair key `{key}` (expected \"A:B\")"
                )));
            }
            if !(entry.c3_ghz_um3_2pi > 0.0
                && entry.c6_ghz_um6_2pi > 0.0
                && entry.le_roy_um > 0.0
                && entry.vdw_um > 0.0)
            {
                return Err(Error::Config(format!(
                    "species data: pair `{key}` coefficients and radii must be positive"
                )));
            }
            if entry.le_roy_um >= entry.vdw_um {
                return Err(Error::Config(format!(
                    "species data: pair `{key}` must satisfy le_roy_um < vdw_um"
                )));
            }
        }
        for (name, entry) in &reg.species {
            for tau in [
                entry.rydberg_lifetime_us,
                entry.first_intermediate_lifetime_us,
                entry.second_intermediate_lifetime_us,
            ] {
                if !(tau > 0.0) {
                    return Err(Error::Config(format!(
                        "species data: {name} lifetimes must be positive"
                    )));
                }
            }
        }
        Ok(reg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("registry serializes")
    }

    pub fn species_entry(&self, name: SpeciesName) -> Result<&SpeciesEntry> {
        self.species
            .get(&name)
            .ok_or_else(|| Error::UnknownSpecies(name.to_string()))
    }

    /// Resolve a species with the requested intermediate level. Lifetimes
    /// are converted from microseconds to seconds.
    pub fn species(&self, name: SpeciesName, intermediate: IntermediateChoice) -> Result<SpeciesSpec> {
        let e = self.species_entry(name)?;
        let (label, tau_us) = match intermediate {
            IntermediateChoice::First => {
                (e.first_intermediate_label.clone(), e.first_intermediate_lifetime_us)
            }
            IntermediateChoice::Second => {
                (e.second_intermediate_label.clone(), e.second_intermediate_lifetime_us)
            }
        };
        Ok(SpeciesSpec {
            name,
            rydberg_label: e.rydberg_label.clone(),
            rydberg_lifetime: e.rydberg_lifetime_us * 1e-6,
            intermediate_label: label,
            intermediate_lifetime: tau_us * 1e-6,
        })
    }

    pub fn pair_entry(&self, a: SpeciesName, b: SpeciesName) -> Result<&PairEntry> {
        self.pairs
            .get(&pair_key(a, b))
            .ok_or_else(|| Error::UnknownPair(a.to_string(), b.to_string()))
    }
}

/// Normalized pair key, order-independent.
pub fn pair_key(a: SpeciesName, b: SpeciesName) -> String {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    format!("{x}:{y}")
}

fn key_species(key: &str) -> Option<(SpeciesName, SpeciesName)> {
    let (a, b) = key.split_once(':')?;
    let a = SpeciesName::from_str(a).ok()?;
    let b = SpeciesName::from_str(b).ok()?;
    (pair_key(a, b) == key).then_some((a, b))
}

/// Built-in species with the requested intermediate level.
pub fn builtin_species(name: SpeciesName, intermediate: IntermediateChoice) -> Result<SpeciesSpec> {
    Registry::builtin().species(name, intermediate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_lifetimes() {
        let rb2 = builtin_species(SpeciesName::Rb87, IntermediateChoice::Second).unwrap();
        assert_relative_eq!(rb2.intermediate_lifetime, 0.131e-6, max_relative = 1e-12);
        assert_relative_eq!(rb2.rydberg_lifetime, 505e-6, max_relative = 1e-12);

        let rb1 = builtin_species(SpeciesName::Rb87, IntermediateChoice::First).unwrap();
        assert_relative_eq!(rb1.intermediate_lifetime, 26.4e-9, max_relative = 1e-12);

        let cs1 = builtin_species(SpeciesName::Cs133, IntermediateChoice::First).unwrap();
        assert_relative_eq!(cs1.intermediate_lifetime, 30.5e-9, max_relative = 1e-12);
        assert_relative_eq!(cs1.rydberg_lifetime, 548e-6, max_relative = 1e-12);

        let cs2 = builtin_species(SpeciesName::Cs133, IntermediateChoice::Second).unwrap();
        assert_relative_eq!(cs2.intermediate_lifetime, 0.118e-6, max_relative = 1e-12);
    }

    #[test]
    fn decay_rates_are_reciprocals() {
        let rb = builtin_species(SpeciesName::Rb87, IntermediateChoice::Second).unwrap();
        let (gr, gp) = rb.decay_rates();
        assert_relative_eq!(gr, 1980.198, max_relative = 1e-4); // 1/505us
        assert_relative_eq!(gp, 7.634e6, max_relative = 1e-3); // 1/0.131us

        let cs = builtin_species(SpeciesName::Cs133, IntermediateChoice::Second).unwrap();
        let (_, gp) = cs.decay_rates();
        assert_relative_eq!(gp, 8.475e6, max_relative = 1e-3); // 1/0.118us
    }

    #[test]
    fn infinite_lifetime_disables_decay() {
        let spec = SpeciesSpec {
            name: SpeciesName::Rb87,
            rydberg_label: "77S1/2".into(),
            rydberg_lifetime: f64::INFINITY,
            intermediate_label: "6P3/2".into(),
            intermediate_lifetime: 0.131e-6,
        };
        let (gr, gp) = spec.decay_rates();
        assert_eq!(gr, 0.0);
        assert!(gp > 0.0);
    }

    #[test]
    fn registry_round_trips_bit_exactly() {
        let reg = Registry::builtin();
        let text = reg.to_toml();
        let reparsed = Registry::from_toml(&text).unwrap();
        assert_eq!(*reg, reparsed);
        // And the re-serialized form is stable.
        assert_eq!(text, reparsed.to_toml());
    }

    #[test]
    fn default_intermediate_is_second() {
        assert_eq!(IntermediateChoice::default(), IntermediateChoice::Second);
    }

    #[test]
    fn pair_key_is_order_independent() {
        assert_eq!(
            pair_key(SpeciesName::Rb87, SpeciesName::Cs133),
            pair_key(SpeciesName::Cs133, SpeciesName::Rb87)
        );
    }

    #[test]
    fn unknown_species_string() {
        assert!(matches!(
            "Na23".parse::<SpeciesName>(),
            Err(Error::UnknownSpecies(_))
        ));
    }
}

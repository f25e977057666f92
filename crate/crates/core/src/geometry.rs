//! Atom layouts and pairwise interaction energies.
//!
//! Interactions follow the two asymptotic regimes V(R) = C3/R^3
//! (dipole-dipole, near a Forster resonance) and V(R) = C6/R^6
//! (van der Waals), with per-pair coefficients and validity radii consumed
//! as data. The Le Roy radius is a hard floor below which the expansion is
//! not valid; the van der Waals radius marks the crossover between the two
//! scalings. All layouts place atoms in the z = 0 plane with the
//! quantization axis along z (theta = pi/2 geometry); distances are still
//! computed in 3-D.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::species::{pair_key, Registry, SpeciesName};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Role of an atom in the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Control,
    Target,
}

/// One trapped atom: role, species, and position in um.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub role: Role,
    pub species: SpeciesName,
    pub position: [f64; 3],
}

/// Spatial arrangement of control and target atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    atoms: Vec<Atom>,
}

/// The standard arrangements studied: a single target, two targets on a
/// line, three on an isosceles triangle, four on a square (all with the
/// control at the origin), and the two-control rhombus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    Single,
    Linear,
    Triangle,
    Square,
    Rhombus,
}

impl Layout {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let controls = atoms.iter().filter(|a| a.role == Role::Control).count();
        let targets = atoms.iter().filter(|a| a.role == Role::Target).count();
        if controls == 0 || targets == 0 {
            return Err(Error::EmptyLayout);
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if distance(atoms[i].position, atoms[j].position) <= 0.0 {
                    return Err(Error::CoincidentAtoms(i, j));
                }
            }
        }
        Ok(Layout { atoms })
    }

    /// Build one of the standard arrangements at the given scale.
    ///
    /// For `Single`/`Linear`/`Triangle`/`Square` the scale is the
    /// control-target distance R with the control at the origin; for
    /// `Rhombus` it is the control-control distance R_CC, with controls at
    /// (0, +-R_CC/2, 0) and targets at (+-R_CC, 0, 0) so that
    /// R_TT = 2 R_CC and the diagonals are perpendicular.
    pub fn standard(
        kind: LayoutKind,
        scale_um: f64,
        control: SpeciesName,
        target: SpeciesName,
    ) -> Result<Self> {
        if !(scale_um > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "layout scale must be positive, got {scale_um}"
            )));
        }
        let r = scale_um;
        let c = |p: [f64; 3]| Atom {
            role: Role::Control,
            species: control,
            position: p,
        };
        let t = |p: [f64; 3]| Atom {
            role: Role::Target,
            species: target,
            position: p,
        };
        let atoms = match kind {
            LayoutKind::Single => vec![c([0.0, 0.0, 0.0]), t([r, 0.0, 0.0])],
            LayoutKind::Linear => vec![c([0.0, 0.0, 0.0]), t([r, 0.0, 0.0]), t([-r, 0.0, 0.0])],
            LayoutKind::Triangle => vec![
                c([0.0, 0.0, 0.0]),
                t([-r, 0.0, 0.0]),
                t([0.0, r, 0.0]),
                t([r / 2f64.sqrt(), -r / 2f64.sqrt(), 0.0]),
            ],
            LayoutKind::Square => vec![
                c([0.0, 0.0, 0.0]),
                t([r, 0.0, 0.0]),
                t([-r, 0.0, 0.0]),
                t([0.0, r, 0.0]),
                t([0.0, -r, 0.0]),
            ],
            LayoutKind::Rhombus => vec![
                c([0.0, r / 2.0, 0.0]),
                c([0.0, -r / 2.0, 0.0]),
                t([r, 0.0, 0.0]),
                t([-r, 0.0, 0.0]),
            ],
        };
        Layout::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn controls(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.role == Role::Control)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.role == Role::Target)
    }

    pub fn control_count(&self) -> usize {
        self.controls().count()
    }

    pub fn target_count(&self) -> usize {
        self.targets().count()
    }

    /// Distance between the i-th control and the j-th target, um.
    pub fn control_target_distance(&self, i: usize, j: usize) -> f64 {
        let c = self.controls().nth(i).expect("control index in range");
        let t = self.targets().nth(j).expect("target index in range");
        distance(c.position, t.position)
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Which asymptotic form to evaluate for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimePolicy {
    DipoleDipole,
    VanDerWaals,
    /// C3/R^3 below the van der Waals radius, C6/R^6 above it.
    AutoCrossover,
}

/// The regime actually used for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    DipoleDipole,
    VanDerWaals,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::DipoleDipole => write!(f, "d-d"),
            Regime::VanDerWaals => write!(f, "vdW"),
        }
    }
}

/// Interaction coefficients for one species pair.
///
/// C3 in 2pi GHz um^3, C6 in 2pi GHz um^6, radii in um. Invariants:
/// all positive, Le Roy radius strictly below the van der Waals radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficients {
    pub species: (SpeciesName, SpeciesName),
    pub c3_ghz_um3: f64,
    pub c6_ghz_um6: f64,
    pub le_roy_um: f64,
    pub vdw_um: f64,
    pub regime: RegimePolicy,
    /// Orientation the coefficients were computed for.
    pub angle_note: String,
}

/// Built-in coefficients for one of the catalogued pairs.
pub fn builtin_pair(a: SpeciesName, b: SpeciesName) -> Result<PairCoefficients> {
    let entry = Registry::builtin().pair_entry(a, b)?;
    Ok(PairCoefficients {
        species: if a <= b { (a, b) } else { (b, a) },
        c3_ghz_um3: entry.c3_ghz_um3_2pi,
        c6_ghz_um6: entry.c6_ghz_um6_2pi,
        le_roy_um: entry.le_roy_um,
        vdw_um: entry.vdw_um,
        regime: entry.regime,
        angle_note: "theta=pi/2, phi=0".to_string(),
    })
}

/// Soft validity note attached to a potential evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeWarning {
    /// Dipole-dipole form used beyond the van der Waals radius.
    DipoleDipoleBeyondVdw,
    /// Van der Waals form used below the van der Waals radius.
    VanDerWaalsBelowVdw,
}

/// Result of one pair-potential evaluation: interaction energy in rad/s,
/// the regime that produced it, and an optional validity warning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSample {
    pub value: f64,
    pub regime: Regime,
    pub warning: Option<RegimeWarning>,
}

/// V(R) for one pair. Errors below the Le Roy radius; attaches a warning
/// when the fixed-regime policy is evaluated outside its stated range.
pub fn pair_potential(coeffs: &PairCoefficients, r_um: f64) -> Result<PotentialSample> {
    if !(r_um > coeffs.le_roy_um) {
        return Err(Error::BelowLeRoyRadius {
            r_um,
            le_roy_um: coeffs.le_roy_um,
        });
    }
    let dd = TWO_PI * 1e9 * coeffs.c3_ghz_um3 / r_um.powi(3);
    let vdw = TWO_PI * 1e9 * coeffs.c6_ghz_um6 / r_um.powi(6);
    let sample = match coeffs.regime {
        RegimePolicy::DipoleDipole => PotentialSample {
            value: dd,
            regime: Regime::DipoleDipole,
            warning: (r_um > coeffs.vdw_um).then_some(RegimeWarning::DipoleDipoleBeyondVdw),
        },
        RegimePolicy::VanDerWaals => PotentialSample {
            value: vdw,
            regime: Regime::VanDerWaals,
            warning: (r_um < coeffs.vdw_um).then_some(RegimeWarning::VanDerWaalsBelowVdw),
        },
        RegimePolicy::AutoCrossover => {
            if r_um < coeffs.vdw_um {
                PotentialSample {
                    value: dd,
                    regime: Regime::DipoleDipole,
                    warning: None,
                }
            } else {
                PotentialSample {
                    value: vdw,
                    regime: Regime::VanDerWaals,
                    warning: None,
                }
            }
        }
    };
    Ok(sample)
}

/// Set of pair coefficients covering every species pair of a layout.
#[derive(Debug, Clone, Default)]
pub struct CoefficientSet {
    pairs: std::collections::BTreeMap<String, PairCoefficients>,
}

impl CoefficientSet {
    /// Built-in coefficients for every pair formed by the given species.
    pub fn builtin_for(species: &[SpeciesName]) -> Result<Self> {
        let mut set = CoefficientSet::default();
        for (i, &a) in species.iter().enumerate() {
            for &b in &species[i..] {
                let key = pair_key(a, b);
                if !set.pairs.contains_key(&key) {
                    set.pairs.insert(key, builtin_pair(a, b)?);
                }
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, coeffs: PairCoefficients) {
        self.pairs
            .insert(pair_key(coeffs.species.0, coeffs.species.1), coeffs);
    }

    pub fn get(&self, a: SpeciesName, b: SpeciesName) -> Result<&PairCoefficients> {
        self.pairs
            .get(&pair_key(a, b))
            .ok_or_else(|| Error::UnknownPair(a.to_string(), b.to_string()))
    }
}

/// Per-category switches for the interaction table. Turning a category off
/// zeroes every entry of that kind (e.g. `control_control: false` for the
/// V_CC = 0 study).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionToggles {
    pub control_target: bool,
    pub target_target: bool,
    pub control_control: bool,
}

impl Default for InteractionToggles {
    fn default() -> Self {
        InteractionToggles {
            control_target: true,
            target_target: true,
            control_control: true,
        }
    }
}

/// Symmetric pairwise interaction energies over a layout, in rad/s, indexed
/// by (control index | target index) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionTable {
    controls: usize,
    targets: usize,
    /// Row-major (controls + targets)^2, symmetric, zero diagonal.
    values: Vec<f64>,
    pub warnings: Vec<RegimeWarning>,
}

impl InteractionTable {
    /// Evaluate every pair potential at the layout's distances.
    pub fn build(
        layout: &Layout,
        coeffs: &CoefficientSet,
        toggles: InteractionToggles,
    ) -> Result<Self> {
        // Atoms reordered as controls first, matching the Hilbert layout.
        let ordered: Vec<&Atom> = layout.controls().chain(layout.targets()).collect();
        let k = layout.control_count();
        let n = ordered.len();
        let mut values = vec![0.0; n * n];
        let mut warnings = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let keep = match (ordered[i].role, ordered[j].role) {
                    (Role::Control, Role::Control) => toggles.control_control,
                    (Role::Target, Role::Target) => toggles.target_target,
                    _ => toggles.control_target,
                };
                if !keep {
                    continue;
                }
                let pair = coeffs.get(ordered[i].species, ordered[j].species)?;
                let r = distance(ordered[i].position, ordered[j].position);
                let sample = pair_potential(pair, r)?;
                if let Some(w) = sample.warning {
                    warnings.push(w);
                }
                values[i * n + j] = sample.value;
                values[j * n + i] = sample.value;
            }
        }
        Ok(InteractionTable {
            controls: k,
            targets: n - k,
            values,
            warnings,
        })
    }

    /// All-zero table (interactions disabled).
    pub fn zero(controls: usize, targets: usize) -> Self {
        let n = controls + targets;
        InteractionTable {
            controls,
            targets,
            values: vec![0.0; n * n],
            warnings: Vec::new(),
        }
    }

    /// Table from explicit row-major values over (controls + targets)^2
    /// entries, controls first. Must be symmetric with a zero diagonal.
    pub fn from_values(controls: usize, targets: usize, values: Vec<f64>) -> Result<Self> {
        let n = controls + targets;
        if values.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "interaction table needs {} entries, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter(
                    "interaction table diagonal must be zero".into(),
                ));
            }
            for j in 0..n {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::InvalidParameter(
                        "interaction table must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(InteractionTable {
            controls,
            targets,
            values,
            warnings: Vec::new(),
        })
    }

    pub fn controls(&self) -> usize {
        self.controls
    }

    pub fn targets(&self) -> usize {
        self.targets
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.controls + self.targets) + j]
    }

    /// V between control i and target j, rad/s.
    pub fn control_target(&self, i: usize, j: usize) -> f64 {
        self.at(i, self.controls + j)
    }

    /// V between targets j and l, rad/s.
    pub fn target_target(&self, j: usize, l: usize) -> f64 {
        self.at(self.controls + j, self.controls + l)
    }

    /// V between controls i and l, rad/s.
    pub fn control_control(&self, i: usize, l: usize) -> f64 {
        self.at(i, l)
    }
}

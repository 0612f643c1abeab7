//! Scenario files: what to send, through what, and how to read it out.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use qcomm::channels::{ChannelKind, ChannelSpec};
use qcomm::fock::{coherent_state, displaced_squeezed_state, number_state, DensityOperator, FockSpace, Quadrature};
use qcomm::povm::{
    displaced_squeezed_family, gaussian_position_measurement, heterodyne_measurement, number_measurement,
    quadrature_measurement, AmplitudeGrid, MeasurementElement, MeasurementFamily, OutcomeLabel, RealGrid,
};
use qcomm::spin::{
    direction_density, direction_scheme, polygon_directions, spin_state, tetrahedron_directions, BellState, Direction,
    PairState,
};
use qcomm::tolerance::DEFAULT_DIM;
use qcomm::wigner::PhaseSpaceGrid;

use crate::ConfigError;

/// Environment variable overriding the truncation used when a scenario
/// leaves `dim` out.
pub const DIM_ENV: &str = "QCOMM_DEFAULT_DIM";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Relation the scenario reproduces, shown by `describe`.
    #[serde(default)]
    pub reproduces: String,
    pub space: SpaceSpec,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    /// Paths to sweep over; none means a lossless path.
    #[serde(default)]
    pub channels: Vec<ChannelSpec>,
    /// Cut positions, 0 at the transmitter and 1 at the receiver.
    #[serde(default = "default_cuts")]
    pub cuts: Vec<f64>,
    #[serde(default)]
    pub measurement: Option<MeasurementSpec>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

fn default_cuts() -> Vec<f64> {
    vec![0.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Fock {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_tolerance: Option<f64>,
    },
    Spin,
    SpinPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Number { n: usize },
    Coherent { re: f64, im: f64 },
    /// `D(p, q)` applied to the squeezed ground state.
    Squeezed {
        eta: f64,
        #[serde(default)]
        q: f64,
        #[serde(default)]
        p: f64,
    },
    Direction { direction: Direction },
    Directions { set: DirectionSet },
    Bell { which: BellState },
    AllBell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DirectionSet {
    Polygon { n: usize },
    Tetrahedron,
    Explicit { directions: Vec<Direction> },
}

impl DirectionSet {
    pub fn directions(&self) -> Vec<Direction> {
        match self {
            Self::Polygon { n } => polygon_directions(*n),
            Self::Tetrahedron => tetrahedron_directions(),
            Self::Explicit { directions } => directions.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasurementSpec {
    Number,
    Heterodyne { radius: f64, points: usize },
    Position,
    Momentum,
    GaussianPosition { eta: f64, grid: RealGrid },
    DisplacedSqueezed { eta: f64, q: RealGrid, p: RealGrid },
    Directions { set: DirectionSet },
    /// Particle A read along `±a`, particle B along `±b`.
    PairDirections { a: Direction, b: Direction },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisSpec {
    /// Number outcome `m` relocated through loss `p`: peak pair and the
    /// levels nearest half maximum.
    RelocatedProfile { m: usize, p: f64, peak: [usize; 2], half_max: [usize; 2] },
    /// Heterodyne table of coherent states through noise against
    /// `(π(n̄+1))⁻¹ exp(−|β−α|²/(n̄+1))`.
    HeterodyneNoise { tolerance: f64 },
    /// Mean photons `GN + G − 1` and the thermal vacuum output.
    GainPhotons { numbers: Vec<usize>, gains: Vec<f64>, tolerance: f64, thermal_tolerance: f64 },
    /// Heterodyne table of squeezed vacua through loss against the closed
    /// form, plus phase-space overlaps at a few outcomes.
    SqueezedLoss { tolerance: f64, wigner_samples: usize, grid: PhaseSpaceGrid },
    /// Inexact position then exact momentum against displaced squeezed
    /// elements.
    SequentialSqueezed {
        etas: Vec<f64>,
        work_dim: usize,
        q_points: RealGrid,
        p_max: f64,
        completeness_grid: RealGrid,
        tolerance: f64,
    },
    /// Direction-state identities on a fixed set of directions.
    SpinIdentities { directions: Vec<Direction>, tolerance: f64 },
    /// Joint readings of the four entangled pair states.
    SingletCorrelations { tolerance: f64 },
    /// Mutual information at the uniform prior and the capacity estimate.
    Information {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_bits: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_steps: Option<usize>,
        tolerance: f64,
    },
    /// Mutual information of several direction sets; only the antipodal
    /// pair may reach one bit.
    DirectionSweep { sets: Vec<DirectionSet>, tolerance: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OutputSpec {
    /// One CSV with JSON sidecar per channel and cut.
    Table,
    /// The receiver family as JSON.
    Family,
    /// Wigner distribution of a transmitted state.
    Wigner { state: usize, grid: PhaseSpaceGrid, format: GridFormat },
    Capacity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFormat {
    Csv,
    Binary,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    /// Static checks that need no numerics.
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(format!("{}: {m}", self.name)));
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return bad("name must be non-empty ASCII letters, digits, '-' or '_'".into());
        }
        if self.cuts.is_empty() {
            return bad("at least one cut position is needed".into());
        }
        if let Some(f) = self.cuts.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return bad(format!("cut fraction {f} outside [0, 1]"));
        }
        let spin = !matches!(self.space, SpaceSpec::Fock { .. });
        if spin && !self.channels.is_empty() {
            return bad("channels act on oscillator carriers only".into());
        }
        if let SpaceSpec::Fock { dim: Some(d), .. } = self.space {
            if d == 0 {
                return bad("dim must be positive".into());
            }
        }
        for st in &self.states {
            let for_spin = matches!(st, StateSpec::Direction { .. } | StateSpec::Directions { .. });
            let for_pair = matches!(st, StateSpec::Bell { .. } | StateSpec::AllBell);
            let ok = match self.space {
                SpaceSpec::Fock { .. } => !for_spin && !for_pair,
                SpaceSpec::Spin => for_spin,
                SpaceSpec::SpinPair => for_pair,
            };
            if !ok {
                return bad(format!("state {st:?} does not fit the carrier"));
            }
        }
        if let Some(m) = &self.measurement {
            let ok = match self.space {
                SpaceSpec::Fock { .. } => {
                    !matches!(m, MeasurementSpec::Directions { .. } | MeasurementSpec::PairDirections { .. })
                }
                SpaceSpec::Spin => matches!(m, MeasurementSpec::Directions { .. }),
                SpaceSpec::SpinPair => matches!(m, MeasurementSpec::PairDirections { .. }),
            };
            if !ok {
                return bad("measurement does not fit the carrier".into());
            }
        }
        for o in &self.outputs {
            match o {
                OutputSpec::Table | OutputSpec::Capacity if self.measurement.is_none() || self.states.is_empty() => {
                    return bad("table outputs need states and a measurement".into());
                }
                OutputSpec::Family if self.measurement.is_none() => return bad("family output needs a measurement".into()),
                OutputSpec::Wigner { .. } if spin => return bad("Wigner output needs an oscillator carrier".into()),
                _ => {}
            }
        }
        Ok(())
    }

    /// Truncation in use: the scenario's own, then the environment, then
    /// the library default.
    pub fn space(&self) -> Result<FockSpace, ConfigError> {
        let invalid = |e: qcomm::Error| ConfigError::Invalid(format!("{}: {e}", self.name));
        match self.space {
            SpaceSpec::Fock { dim, tail_tolerance } => {
                let dim = match dim {
                    Some(d) => d,
                    None => default_dim()?,
                };
                match tail_tolerance {
                    Some(t) => FockSpace::new(dim, t).map_err(invalid),
                    None => FockSpace::with_dim(dim).map_err(invalid),
                }
            }
            SpaceSpec::Spin => Ok(FockSpace::two_level()),
            SpaceSpec::SpinPair => FockSpace::finite_level(4).map_err(invalid),
        }
    }

    pub fn channel_specs(&self) -> Vec<ChannelSpec> {
        if self.channels.is_empty() {
            vec![ChannelSpec { kind: ChannelKind::Loss, param: 1.0 }]
        } else {
            self.channels.clone()
        }
    }
}

pub fn default_dim() -> Result<usize, ConfigError> {
    match std::env::var(DIM_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|d| *d > 0)
            .ok_or_else(|| ConfigError::Invalid(format!("{DIM_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_DIM),
    }
}

pub fn build_states(specs: &[StateSpec], space: FockSpace) -> qcomm::Result<Vec<DensityOperator>> {
    let mut out = Vec::new();
    for spec in specs {
        match spec {
            StateSpec::Number { n } => out.push(DensityOperator::pure(&number_state(space, *n)?, format!("n={n}"))?),
            StateSpec::Coherent { re, im } => out.push(DensityOperator::pure(
                &coherent_state(space, C64::new(*re, *im))?,
                format!("alpha=({re},{im})"),
            )?),
            StateSpec::Squeezed { eta, q, p } => out.push(DensityOperator::pure(
                &displaced_squeezed_state(space, *p, *q, *eta)?,
                format!("squeezed(eta={eta},q={q},p={p})"),
            )?),
            StateSpec::Direction { direction } => out.push(direction_density(direction)),
            StateSpec::Directions { set } => out.extend(set.directions().iter().map(direction_density)),
            StateSpec::Bell { which } => out.push(which.state().density(which.name())?),
            StateSpec::AllBell => {
                for b in BellState::ALL {
                    out.push(b.state().density(b.name())?);
                }
            }
        }
    }
    Ok(out)
}

pub fn build_measurement(spec: &MeasurementSpec, space: FockSpace) -> qcomm::Result<MeasurementFamily> {
    match spec {
        MeasurementSpec::Number => Ok(number_measurement(space)),
        MeasurementSpec::Heterodyne { radius, points } => {
            heterodyne_measurement(space, &AmplitudeGrid::new(*radius, *points)?)
        }
        MeasurementSpec::Position => Ok(quadrature_measurement(space, Quadrature::Position)),
        MeasurementSpec::Momentum => Ok(quadrature_measurement(space, Quadrature::Momentum)),
        MeasurementSpec::GaussianPosition { eta, grid } => gaussian_position_measurement(space, *eta, grid),
        MeasurementSpec::DisplacedSqueezed { eta, q, p } => displaced_squeezed_family(space, *eta, q, p),
        MeasurementSpec::Directions { set } => Ok(direction_scheme(&set.directions())?.measurement),
        MeasurementSpec::PairDirections { a, b } => pair_direction_measurement(a, b),
    }
}

/// Projectors on `|±a⟩_A|±b⟩_B`, ordered `(+,+), (+,−), (−,+), (−,−)`.
pub fn pair_direction_measurement(a: &Direction, b: &Direction) -> qcomm::Result<MeasurementFamily> {
    let space = FockSpace::finite_level(4)?;
    let mut elements = Vec::new();
    for (sa, da) in [(1.0, *a), (-1.0, a.antipode())] {
        for (sb, db) in [(1.0, *b), (-1.0, b.antipode())] {
            let psi = PairState::product(&spin_state(&da), &spin_state(&db));
            let op = psi.density("")?.op().clone();
            let label = OutcomeLabel::Joint(Box::new(OutcomeLabel::Real(sa)), Box::new(OutcomeLabel::Real(sb)));
            elements.push(MeasurementElement::new(label, op, 1.0)?);
        }
    }
    MeasurementFamily::new("pair-directions", space, elements, 4)
}

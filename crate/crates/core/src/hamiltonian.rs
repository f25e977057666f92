//! Assembly of the full time-dependent non-Hermitian Hamiltonian from the
//! site Hamiltonians, the pulse schedule, and the interaction table.
//!
//! With hbar = 1 the control atom sees (in the rotating frame)
//!
//! ```text
//!         1 [ 0    0        0    ]
//!   H_C = - [ 0    0        W_r  ]  - (i/2) g_r |r><r|
//!         2 [ 0    W_r      0    ]
//! ```
//!
//! and each target atom the inverted-Y four -level form
//!
//! ```text
//!         1 [ 0        0        W_p(t)   0   ]
//!   H_T = - [ 0        0        W_p(t)   0   ]  - (i/2) g_p |P><P|
//!         2 [ W_p(t)   W_p(t)  -2 Delta  W_c ]
//!           [ 0        0        W_c      0   ]
//! ```
//!
//! The composite operator adds the always-on diagonal interaction terms
//! V_ct |r><r| x |R><R|, V_tt |R><R| x |R><R| and (two controls)
//! V_cc |r><r| x |r><r|. Time dependence is segment-local: within a pi
//! pulse the operator is constant, and within the Raman window only the
//! scalar envelope factor sin^2(pi t / T) varies, so each segment is stored
//! as one static operator plus an optional envelope-scaled part.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::InteractionTable;
use crate::hilbert::{
    ControlLevel, Operator, Site, SiteMatrix, SiteOperator, SpaceDims, TargetLevel,
};
use crate::pulse::{Schedule, SegmentFields};

/// Everything needed to assemble the composite Hamiltonian. Frequencies and
/// rates in rad/s and 1/s; the drive amplitudes come from the schedule.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub dims: SpaceDims,
    /// Rydberg-state decay rate per control atom.
    pub gamma_r: Vec<f64>,
    /// Intermediate-state decay rate per target atom.
    pub gamma_p: Vec<f64>,
    pub interactions: InteractionTable,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_r.len() != self.dims.controls()
            || self.gamma_p.len() != self.dims.targets()
            || self.interactions.controls() != self.dims.controls()
            || self.interactions.targets() != self.dims.targets()
        {
            return Err(Error::InvalidParameter(
                "decay-rate and interaction tables must cover every atom".into(),
            ));
        }
        if self
            .gamma_r
            .iter()
            .chain(self.gamma_p.iter())
            .any(|&g| !(g >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "decay rates must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Control-atom Hamiltonian, Omega_r drive on |1> <-> |r> plus the
/// non-Hermitian decay of |r>.
pub fn control_hamiltonian(omega_r: f64, gamma_r: f64) -> SiteMatrix {
    let mut m = SiteMatrix::zeros(3);
    let half = C64::new(omega_r / 2.0, 0.0);
    m.set(ControlLevel::One.index(), ControlLevel::Rydberg.index(), half);
    m.set(ControlLevel::Rydberg.index(), ControlLevel::One.index(), half);
    m.set(
        ControlLevel::Rydberg.index(),
        ControlLevel::Rydberg.index(),
        C64::new(0.0, -gamma_r / 2.0),
    );
    m
}

/// Target-atom Hamiltonian at one instant: Raman amplitude Omega_p on both
/// ground legs, coupling Omega_c on |P> <-> |R>, detuning -Delta on |P>,
/// plus the non-Hermitian decay of |P>.
pub fn target_hamiltonian(omega_p: f64, omega_c: f64, delta: f64, gamma_p: f64) -> SiteMatrix {
    let mut m = SiteMatrix::zeros(4);
    let (a, b, p, r) = (
        TargetLevel::A.index(),
        TargetLevel::B.index(),
        TargetLevel::P.index(),
        TargetLevel::R.index(),
    );
    let wp = C64::new(omega_p / 2.0, 0.0);
    let wc = C64::new(omega_c / 2.0, 0.0);
    m.set(a, p, wp);
    m.set(p, a, wp);
    m.set(b, p, wp);
    m.set(p, b, wp);
    m.set(p, r, wc);
    m.set(r, p, wc);
    m.set(p, p, C64::new(-delta, -gamma_p / 2.0));
    m
}

/// The envelope-scaled part of the target Hamiltonian: the Omega_p coupling
/// pattern at peak amplitude.
fn raman_coupling_pattern(omega_p_max: f64) -> SiteMatrix {
    let mut m = SiteMatrix::zeros(4);
    let (a, b, p) = (
        TargetLevel::A.index(),
        TargetLevel::B.index(),
        TargetLevel::P.index(),
    );
    let wp = C64::new(omega_p_max / 2.0, 0.0);
    m.set(a, p, wp);
    m.set(p, a, wp);
    m.set(b, p, wp);
    m.set(p, b, wp);
    m
}

/// One schedule segment as operators: H(t) = static + sin^2(pi t/T) * raman.
#[derive(Debug, Clone)]
pub struct SegmentOperator {
    pub duration: f64,
    pub static_op: Operator,
    pub raman_op: Option<Operator>,
}

impl SegmentOperator {
    /// Envelope factor in [0, 1] at local time t.
    pub fn envelope_factor(&self, t_local: f64) -> f64 {
        if self.raman_op.is_none() {
            return 0.0;
        }
        let s = (std::f64::consts::PI * t_local / self.duration).sin();
        s * s
    }

    pub fn is_constant(&self) -> bool {
        self.raman_op.is_none()
    }

    /// y = H(t_local) x, matrix-free.
    pub fn apply(&self, t_local: f64, x: &[C64], y: &mut [C64]) {
        self.static_op.apply(x, y);
        if let Some(raman) = &self.raman_op {
            let f = self.envelope_factor(t_local);
            if f != 0.0 {
                raman.apply_add_scaled(x, y, f);
            }
        }
    }

    /// Dense H(t_local) for oracles and the exponential propagator.
    pub fn to_dense(&self, t_local: f64) -> crate::linalg::CMatrix {
        let mut dense = self.static_op.to_dense();
        if let Some(raman) = &self.raman_op {
            let f = self.envelope_factor(t_local);
            dense += raman.to_dense() * C64::new(f, 0.0);
        }
        dense
    }
}

/// The assembled gate Hamiltonian: one operator pair per schedule segment.
#[derive(Debug, Clone)]
pub struct TimeDependentHamiltonian {
    pub dims: SpaceDims,
    pub segments: Vec<SegmentOperator>,
}

impl TimeDependentHamiltonian {
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Assemble the CNOT^N Hamiltonian (one control, N targets) over a
/// three-segment schedule.
pub fn assemble_cnotn(config: &ModelConfig, schedule: &Schedule) -> Result<TimeDependentHamiltonian> {
    if config.dims.controls() != 1 {
        return Err(Error::InvalidParameter(format!(
            "CNOT^N requires exactly one control atom, got {}",
            config.dims.controls()
        )));
    }
    assemble(config, schedule)
}

/// Assemble the C2NOT^2 Hamiltonian (two controls, two targets) over the
/// five-segment schedule, including the control-control interaction term.
pub fn assemble_c2not2(
    config: &ModelConfig,
    schedule: &Schedule,
) -> Result<TimeDependentHamiltonian> {
    if config.dims.controls() != 2 || config.dims.targets() != 2 {
        return Err(Error::InvalidParameter(format!(
            "C2NOT^2 requires two controls and two targets, got {} and {}",
            config.dims.controls(),
            config.dims.targets()
        )));
    }
    assemble(config, schedule)
}

/// Shared assembly: embedded site Hamiltonians, always-on diagonal
/// interaction projectors, segment-local drives.
pub fn assemble(config: &ModelConfig, schedule: &Schedule) -> Result<TimeDependentHamiltonian> {
    config.validate()?;
    let dims = config.dims;
    if schedule.max_control() >= dims.controls() {
        return Err(Error::SiteOutOfRange {
            site: Site::Control(schedule.max_control()),
            controls: dims.controls(),
            targets: dims.targets(),
        });
    }

    // Always-on pieces: interactions (diagonal projector products) and decay.
    let mut always = Operator::zero(dims);
    let ryd = ControlLevel::Rydberg.index();
    let big_r = TargetLevel::R.index();
    for i in 0..dims.controls() {
        for j in 0..dims.targets() {
            let v = config.interactions.control_target(i, j);
            if v != 0.0 {
                always.add_projector_pair(
                    Site::Control(i),
                    ryd,
                    Site::Target(j),
                    big_r,
                    C64::new(v, 0.0),
                )?;
            }
        }
    }
    for j in 0..dims.targets() {
        for l in (j + 1)..dims.targets() {
            let v = config.interactions.target_target(j, l);
            if v != 0.0 {
                always.add_projector_pair(
                    Site::Target(j),
                    big_r,
                    Site::Target(l),
                    big_r,
                    C64::new(v, 0.0),
                )?;
            }
        }
    }
    for i in 0..dims.controls() {
        for l in (i + 1)..dims.controls() {
            let v = config.interactions.control_control(i, l);
            if v != 0.0 {
                always.add_projector_pair(
                    Site::Control(i),
                    ryd,
                    Site::Control(l),
                    ryd,
                    C64::new(v, 0.0),
                )?;
            }
        }
    }

    let mut segments = Vec::with_capacity(schedule.segments().len());
    for seg in schedule.segments() {
        let mut static_op = always.clone();
        let mut raman_op = None;
        match seg.fields {
            SegmentFields::PiPulse { control, omega_r } => {
                for i in 0..dims.controls() {
                    let drive = if i == control { omega_r } else { 0.0 };
                    static_op.add_site(&SiteOperator::new(
                        Site::Control(i),
                        control_hamiltonian(drive, config.gamma_r[i]),
                    )?)?;
                }
                for j in 0..dims.targets() {
                    // Target fields off; detuning and decay remain.
                    static_op.add_site(&SiteOperator::new(
                        Site::Target(j),
                        target_hamiltonian(0.0, 0.0, seg_delta(schedule), config.gamma_p[j]),
                    )?)?;
                }
            }
            SegmentFields::Raman {
                omega_p_max,
                omega_c,
                delta,
            } => {
                for i in 0..dims.controls() {
                    static_op.add_site(&SiteOperator::new(
                        Site::Control(i),
                        control_hamiltonian(0.0, config.gamma_r[i]),
                    )?)?;
                }
                let mut raman = Operator::zero(dims);
                for j in 0..dims.targets() {
                    static_op.add_site(&SiteOperator::new(
                        Site::Target(j),
                        target_hamiltonian(0.0, omega_c, delta, config.gamma_p[j]),
                    )?)?;
                    raman.add_site(&SiteOperator::new(
                        Site::Target(j),
                        raman_coupling_pattern(omega_p_max),
                    )?)?;
                }
                raman_op = Some(raman);
            }
        }
        segments.push(SegmentOperator {
            duration: seg.duration(),
            static_op,
            raman_op,
        });
    }
    Ok(TimeDependentHamiltonian { dims, segments })
}

// The detuning stays on the target atoms in every segment; it is a
// rotating-frame level energy, not a switched field.
fn seg_delta(schedule: &Schedule) -> f64 {
    schedule
        .segments()
        .iter()
        .find_map(|s| match s.fields {
            SegmentFields::Raman { delta, .. } => Some(delta),
            _ => None,
        })
        .unwrap_or(0.0)
}

//! Field envelopes and gate pulse schedules.
//!
//! The Raman pulse is the smooth two-photon envelope
//! Omega_p(t) = Omega_p_max sin^2(pi t / T) with the pulse area fixed by
//! int_0^T Omega_p^2 dt = 2 pi Delta, which pins the duration to
//! T = 16 pi Delta / (3 Omega_p_max^2). Control-atom pi pulses are ideal
//! squares with Omega_r t_pi = pi. The CNOT^N schedule is
//! [pi up] [Raman + coupling] [pi down]; the two-control variant excites the
//! controls in sequence and de-excites them in reverse order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Smooth Raman pulse, fully determined by its peak amplitude and the
/// single-photon detuning (both rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanPulse {
    pub omega_p_max: f64,
    pub delta: f64,
}

impl RamanPulse {
    pub fn new(omega_p_max: f64, delta: f64) -> Result<Self> {
        if !(omega_p_max > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidParameter(
                "Raman pulse requires positive peak amplitude and detuning".into(),
            ));
        }
        Ok(RamanPulse { omega_p_max, delta })
    }

    /// Pulse duration T = 16 pi Delta / (3 Omega_p_max^2), seconds.
    pub fn duration(&self) -> f64 {
        16.0 * PI * self.delta / (3.0 * self.omega_p_max * self.omega_p_max)
    }

    /// Omega_p(t) = Omega_p_max sin^2(pi t / T), rad/s.
    pub fn envelope(&self, t: f64) -> Result<f64> {
        let duration = self.duration();
        if !(0.0..=duration).contains(&t) {
            return Err(Error::OutsidePulseWindow { t, duration });
        }
        let s = (PI * t / duration).sin();
        Ok(self.omega_p_max * s * s)
    }
}

/// Square pi pulse on the |1> <-> |r> transition of one control atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiPulse {
    pub omega_r: f64,
    pub control: usize,
}

impl PiPulse {
    /// Pulse with the given duration; the area condition fixes
    /// Omega_r = pi / t_pi.
    pub fn with_duration(t_pi: f64, control: usize) -> Result<Self> {
        if !(t_pi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pi-pulse duration must be positive, got {t_pi}"
            )));
        }
        Ok(PiPulse {
            omega_r: PI / t_pi,
            control,
        })
    }

    pub fn duration(&self) -> f64 {
        PI / self.omega_r
    }
}

/// Fields active during one schedule segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SegmentFields {
    /// Square Omega_r drive on one control; target fields off.
    PiPulse { control: usize, omega_r: f64 },
    /// Raman envelope plus constant coupling on every target; control
    /// drives off.
    Raman {
        omega_p_max: f64,
        omega_c: f64,
        delta: f64,
    },
}

/// One contiguous time segment of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub fields: SegmentFields,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Ordered, contiguous, non-overlapping segments covering the whole gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    segments: Vec<Segment>,
}

/// Parameters shared by the gate schedules. Frequencies in rad/s, times in
/// seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega_p_max: f64,
    pub delta: f64,
    pub omega_c: f64,
    pub t_pi: f64,
}

impl DriveParams {
    fn validate(&self) -> Result<()> {
        if !(self.omega_p_max > 0.0 && self.delta > 0.0 && self.t_pi > 0.0) {
            return Err(Error::InvalidParameter(
                "drive parameters must be positive".into(),
            ));
        }
        if self.omega_c < 0.0 {
            return Err(Error::InvalidParameter(
                "coupling Rabi frequency must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn raman(&self) -> Result<RamanPulse> {
        RamanPulse::new(self.omega_p_max, self.delta)
    }
}

impl Schedule {
    /// CNOT^N sequence: pi pulse on the control, Raman window with the
    /// coupling field on, pi pulse on the control. The number of targets
    /// does not change the schedule, only which atoms receive the fields.
    pub fn cnot(params: &DriveParams) -> Result<Schedule> {
        params.validate()?;
        let pi_pulse = PiPulse::with_duration(params.t_pi, 0)?;
        let raman_t = params.raman()?.duration();
        let mut segments = Vec::new();
        let mut t = 0.0;
        let mut push = |fields: SegmentFields, dur: f64, t: &mut f64| {
            segments.push(Segment {
                start: *t,
                end: *t + dur,
                fields,
            });
            *t += dur;
        };
        push(
            SegmentFields::PiPulse {
                control: 0,
                omega_r: pi_pulse.omega_r,
            },
            params.t_pi,
            &mut t,
        );
        push(
            SegmentFields::Raman {
                omega_p_max: params.omega_p_max,
                omega_c: params.omega_c,
                delta: params.delta,
            },
            raman_t,
            &mut t,
        );
        push(
            SegmentFields::PiPulse {
                control: 0,
                omega_r: pi_pulse.omega_r,
            },
            params.t_pi,
            &mut t,
        );
        Ok(Schedule { segments })
    }

    /// C2NOT^2 sequence: excite control 1 then control 2, run the Raman
    /// window, then de-excite in the reversed order (control 2 first).
    pub fn c2not2(params: &DriveParams) -> Result<Schedule> {
        params.validate()?;
        let pi_pulse = PiPulse::with_duration(params.t_pi, 0)?;
        let raman_t = params.raman()?.duration();
        let mut segments = Vec::new();
        let mut t = 0.0;
        let mut push = |fields: SegmentFields, dur: f64, t: &mut f64| {
            segments.push(Segment {
                start: *t,
                end: *t + dur,
                fields,
            });
            *t += dur;
        };
        for control in [0, 1] {
            push(
                SegmentFields::PiPulse {
                    control,
                    omega_r: pi_pulse.omega_r,
                },
                params.t_pi,
                &mut t,
            );
        }
        push(
            SegmentFields::Raman {
                omega_p_max: params.omega_p_max,
                omega_c: params.omega_c,
                delta: params.delta,
            },
            raman_t,
            &mut t,
        );
        for control in [1, 0] {
            push(
                SegmentFields::PiPulse {
                    control,
                    omega_r: pi_pulse.omega_r,
                },
                params.t_pi,
                &mut t,
            );
        }
        Ok(Schedule { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Duration of the Raman window, seconds.
    pub fn raman_duration(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| matches!(s.fields, SegmentFields::Raman { .. }))
            .map(Segment::duration)
            .sum()
    }

    /// Highest control index driven by any pi pulse.
    pub fn max_control(&self) -> usize {
        self.segments
            .iter()
            .filter_map(|s| match s.fields {
                SegmentFields::PiPulse { control, .. } => Some(control),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TWO_PI: f64 = std::f64::consts::TAU;

    fn cnot_defaults() -> DriveParams {
        DriveParams {
            omega_p_max: TWO_PI * 50e6,
            delta: TWO_PI * 1200e6,
            omega_c: TWO_PI * 150e6,
            t_pi: 10e-9,
        }
    }

    #[test]
    fn envelope_endpoints_and_peak() {
        let p = RamanPulse::new(TWO_PI * 50e6, TWO_PI * 1200e6).unwrap();
        let t = p.duration();
        assert_eq!(p.envelope(0.0).unwrap(), 0.0);
        assert!(p.envelope(t).unwrap() < 1e-6 * p.omega_p_max);
        assert_relative_eq!(p.envelope(t / 2.0).unwrap(), p.omega_p_max, max_relative = 1e-12);
        assert!(p.envelope(-1e-9).is_err());
        assert!(p.envelope(t + 1e-9).is_err());
    }

    #[test]
    fn raman_duration_closed_form() {
        // Omega_p = 2pi x 50 MHz, Delta = 2pi x 1200 MHz -> T = 1.28 us.
        let p = RamanPulse::new(TWO_PI * 50e6, TWO_PI * 1200e6).unwrap();
        assert_relative_eq!(p.duration(), 1.28e-6, max_relative = 1e-12);
    }

    // Simpson's rule oracle for the pulse-area condition.
    fn simpson_area(p: &RamanPulse, n: usize) -> f64 {
        let t = p.duration();
        let h = t / n as f64;
        let f = |x: f64| {
            let v = p.envelope(x).unwrap();
            v * v
        };
        let mut sum = f(0.0) + f(t);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(i as f64 * h);
        }
        sum * h / 3.0
    }

    #[test]
    fn raman_area_is_2pi_delta() {
        let p = RamanPulse::new(TWO_PI * 50e6, TWO_PI * 1200e6).unwrap();
        let area = simpson_area(&p, 4096);
        assert_relative_eq!(area, TWO_PI * p.delta, max_relative = 1e-6);
    }

    proptest::proptest! {
        #[test]
        fn raman_area_property(omega_mhz in 5.0..300.0f64, delta_mhz in 200.0..5000.0f64) {
            let p = RamanPulse::new(TWO_PI * omega_mhz * 1e6, TWO_PI * delta_mhz * 1e6).unwrap();
            let area = simpson_area(&p, 4096);
            let rel = (area - TWO_PI * p.delta).abs() / (TWO_PI * p.delta);
            proptest::prop_assert!(rel < 1e-6, "relative area error {rel}");
        }
    }

    #[test]
    fn pi_pulse_area() {
        let p = PiPulse::with_duration(10e-9, 0).unwrap();
        assert_relative_eq!(p.omega_r, TWO_PI * 50e6, max_relative = 1e-12);
        assert_relative_eq!(p.omega_r * p.duration(), std::f64::consts::PI);
    }

    #[test]
    fn cnot_schedule_shape() {
        let sched = Schedule::cnot(&cnot_defaults()).unwrap();
        assert_eq!(sched.segments().len(), 3);
        // 10 ns + 1.28 us + 10 ns = 1.3 us.
        assert_relative_eq!(sched.total_duration(), 1.30e-6, max_relative = 1e-12);
        assert!(matches!(
            sched.segments()[0].fields,
            SegmentFields::PiPulse { control: 0, .. }
        ));
        assert!(matches!(sched.segments()[1].fields, SegmentFields::Raman { .. }));
        // Segments are contiguous and non-overlapping.
        for w in sched.segments().windows(2) {
            assert_eq!(w[0].end, w[1].start);
            assert!(w[0].duration() > 0.0);
        }
    }

    #[test]
    fn c2not2_schedule_shape() {
        let params = DriveParams {
            omega_p_max: TWO_PI * 20e6,
            omega_c: TWO_PI * 60e6,
            ..cnot_defaults()
        };
        let sched = Schedule::c2not2(&params).unwrap();
        assert_eq!(sched.segments().len(), 5);
        // T = 8.0 us Raman window, total 8.04 us.
        assert_relative_eq!(sched.raman_duration(), 8.0e-6, max_relative = 1e-12);
        assert_relative_eq!(sched.total_duration(), 8.04e-6, max_relative = 1e-12);
        // De-excitation order is the exact reverse of excitation order.
        let controls: Vec<usize> = sched
            .segments()
            .iter()
            .filter_map(|s| match s.fields {
                SegmentFields::PiPulse { control, .. } => Some(control),
                _ => None,
            })
            .collect();
        assert_eq!(controls, vec![0, 1, 1, 0]);
        // Durations mirror about the Raman midpoint.
        let d: Vec<f64> = sched.segments().iter().map(Segment::duration).collect();
        for i in 0..d.len() {
            assert_relative_eq!(d[i], d[d.len() - 1 - i], max_relative = 1e-12);
        }
    }

    #[test]
    fn raman_window_scales_inversely_with_peak_squared() {
        let base = Schedule::cnot(&cnot_defaults()).unwrap();
        let slower = Schedule::cnot(&DriveParams {
            omega_p_max: TWO_PI * 20e6,
            ..cnot_defaults()
        })
        .unwrap();
        assert_relative_eq!(
            slower.raman_duration() / base.raman_duration(),
            6.25,
            max_relative = 1e-12
        );
    }
}

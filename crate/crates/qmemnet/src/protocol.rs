//! Three-stage write/store/read orchestration with piecewise-constant
//! system matrices.
//!
//! The schedule holds a Hurwitz writing system, a storage system in literal
//! block decoherence-free form (memory coordinates have zero drift rows,
//! zero drift columns, and zero coupling), and switch times t₁ ≤ t₂. The
//! reading stage reuses the writing matrices. Input coefficients must live
//! on the memory coordinates of the storage system; anything placed on the
//! buffer would be lost the moment the port closes.

use crate::error::{Error, Result};
use crate::iosim;
use crate::linalg;
use crate::linsys::{BLOCK_TOL, PassiveLinearSystem};
use crate::pulses::{InputKind, InputSignal, PulseDirection, PulseFamily, ScalarTable};
use crate::stats;
use crate::table::Table;
use crate::{C64, CMatrix, CVector};

/// Piecewise-constant stage configuration for one protocol run.
#[derive(Debug, Clone)]
pub struct StageSchedule {
    write_sys: PassiveLinearSystem,
    store_sys: PassiveLinearSystem,
    read_sys: PassiveLinearSystem,
    t1: f64,
    t2: f64,
    memory_modes: Vec<usize>,
}

impl StageSchedule {
    /// Validate and build a schedule. The reading system is the writing
    /// system: the same matrices are restored when the port reopens.
    pub fn new(
        write_sys: PassiveLinearSystem,
        store_sys: PassiveLinearSystem,
        t1: f64,
        t2: f64,
    ) -> Result<Self> {
        if t2 < t1 {
            return Err(Error::ScheduleInvalid(format!(
                "t2 = {t2} must not precede t1 = {t1}"
            )));
        }
        if write_sys.dim() != store_sys.dim() {
            return Err(Error::ScheduleInvalid(format!(
                "write system has {} modes, store system has {}",
                write_sys.dim(),
                store_sys.dim()
            )));
        }
        if !write_sys.is_hurwitz_default()? {
            return Err(Error::ScheduleInvalid(
                "writing system must be Hurwitz".into(),
            ));
        }
        let memory_modes = memory_coordinates(&store_sys);
        if memory_modes.is_empty() {
            return Err(Error::ScheduleInvalid(
                "store system has no decoupled memory coordinates".into(),
            ));
        }
        Ok(Self {
            read_sys: write_sys.clone(),
            write_sys,
            store_sys,
            t1,
            t2,
            memory_modes,
        })
    }

    pub fn write_sys(&self) -> &PassiveLinearSystem {
        &self.write_sys
    }

    pub fn store_sys(&self) -> &PassiveLinearSystem {
        &self.store_sys
    }

    pub fn read_sys(&self) -> &PassiveLinearSystem {
        &self.read_sys
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// Coordinates that the storage configuration leaves untouched.
    pub fn memory_modes(&self) -> &[usize] {
        &self.memory_modes
    }

    fn buffer_modes(&self) -> Vec<usize> {
        (0..self.store_sys.dim())
            .filter(|k| !self.memory_modes.contains(k))
            .collect()
    }
}

/// Coordinates whose drift row, drift column, and coupling entry all vanish.
fn memory_coordinates(sys: &PassiveLinearSystem) -> Vec<usize> {
    let a = sys.drift();
    let c = sys.coupling();
    let scale = linalg::max_abs(a).max(linalg::max_abs_vec(c)).max(1.0);
    let tol = BLOCK_TOL * scale;
    (0..sys.dim())
        .filter(|&k| {
            let coupled = c[k].norm() > tol;
            let row = (0..sys.dim()).any(|j| a[(k, j)].norm() > tol);
            let col = (0..sys.dim()).any(|j| a[(j, k)].norm() > tol);
            !(coupled || row || col)
        })
        .collect()
}

/// Largest structural residual over a coordinate set, used to report why a
/// system is not in block form.
fn block_residual(sys: &PassiveLinearSystem) -> f64 {
    let a = sys.drift();
    let c = sys.coupling();
    (0..sys.dim())
        .map(|k| {
            let mut r = c[k].norm();
            for j in 0..sys.dim() {
                r = r.max(a[(k, j)].norm()).max(a[(j, k)].norm());
            }
            r
        })
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of one full write/store/read run.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    /// Amplitudes stored on the memory coordinates at t₁ (ordered as
    /// `memory_modes`).
    pub stored_coefficients: CVector,
    /// Photon weight (or coherent power) sitting outside the memory
    /// coordinates at t₁.
    pub leakage: f64,
    /// Normalized overlap |⟨target, retrieved⟩|² / (‖target‖²‖retrieved‖²).
    pub retrieval_fidelity: f64,
    /// Grid times of the reading-stage output.
    pub retrieved_times: Vec<f64>,
    /// Reading-stage output pulse samples.
    pub retrieved_pulse: Vec<C64>,
    /// Largest |output| during the writing stage.
    pub writing_output_max: f64,
    /// Copy of the schedule's memory coordinate list.
    pub memory_modes: Vec<usize>,
}

impl ProtocolReport {
    /// CSV-ready table of the retrieved pulse.
    pub fn retrieved_table(&self) -> Table {
        let mut table = Table::new(vec!["t".into(), "re_out".into(), "im_out".into()]);
        for (t, z) in self.retrieved_times.iter().zip(&self.retrieved_pulse) {
            table.push_row(vec![*t, z.re, z.im]);
        }
        table
    }
}

/// Check that the input was composed for the writing stage of `schedule`.
fn check_input_matches(schedule: &StageSchedule, input: &InputSignal) -> Result<()> {
    let family = input.family();
    if family.direction() != PulseDirection::Writing {
        return Err(Error::ScheduleInvalid(
            "protocol input must use a writing pulse family".into(),
        ));
    }
    if family.system() != schedule.write_sys() {
        return Err(Error::ScheduleInvalid(
            "input pulse family was built for a different system".into(),
        ));
    }
    if (family.switch_time() - schedule.t1).abs() > 1e-12 {
        return Err(Error::ScheduleInvalid(format!(
            "input family switches at {} but the schedule writes until {}",
            family.switch_time(),
            schedule.t1
        )));
    }
    let weight: f64 = schedule
        .buffer_modes()
        .iter()
        .map(|&k| input.coefficients()[k].norm_sqr())
        .sum();
    if weight > 1e-8 {
        return Err(Error::UnsupportedCoefficients { weight });
    }
    Ok(())
}

/// Writing-stage summary shared by the protocol driver and the early-switch
/// experiment.
struct WritingOutcome {
    amplitudes: CVector,
    mean_photon: Vec<f64>,
    output_max: f64,
}

fn run_writing(
    schedule: &StageSchedule,
    input: &InputSignal,
    until: f64,
    h: f64,
) -> Result<Option<WritingOutcome>> {
    let (raw_start, _) = input.family().default_support()?;
    // keep `until` on the grid while covering at least the raw support
    let steps = (((until - raw_start) / h).ceil() as isize).max(0);
    let t_start = until - steps as f64 * h;
    if steps == 0 {
        return Ok(None);
    }
    let sys = schedule.write_sys();
    match input.kind() {
        InputKind::SinglePhoton => {
            let photon = stats::evolve_photon_stats(sys, input, (t_start, until), h)?;
            let last = photon.node_count() - 1;
            let io = iosim::simulate_io(sys, input, (t_start, until), h)?;
            Ok(Some(WritingOutcome {
                amplitudes: photon.a10(last).conjugate(),
                mean_photon: photon.mean_photon_numbers(last),
                output_max: iosim::zero_output_check(&io, until, Some(0.0)).max_abs,
            }))
        }
        InputKind::Coherent => {
            let coherent = stats::evolve_coherent_stats(sys, input, (t_start, until), h)?;
            let last = coherent.node_count() - 1;
            let mean = coherent.mean(last).clone();
            let mean_photon = mean.iter().map(|z| z.norm_sqr()).collect();
            Ok(Some(WritingOutcome {
                amplitudes: mean,
                mean_photon,
                output_max: coherent.max_output_abs(),
            }))
        }
    }
}

/// Simulate the full write/store/read procedure and report the stored
/// coefficients, buffer leakage, and retrieval fidelity against the matched
/// reading shape Σ_k s_k ν̃_k.
pub fn run_protocol(
    schedule: &StageSchedule,
    input: &InputSignal,
    h: f64,
) -> Result<ProtocolReport> {
    check_input_matches(schedule, input)?;

    let writing = run_writing(schedule, input, schedule.t1, h)?;
    let n = schedule.write_sys().dim();
    let (amplitudes, mean_photon, output_max) = match writing {
        Some(w) => (w.amplitudes, w.mean_photon, w.output_max),
        None => (CVector::zeros(n), vec![0.0; n], 0.0),
    };

    let leakage: f64 = schedule
        .buffer_modes()
        .iter()
        .map(|&k| mean_photon[k])
        .sum();
    let stored_coefficients = CVector::from_vec(
        schedule
            .memory_modes
            .iter()
            .map(|&k| amplitudes[k])
            .collect(),
    );

    // storage: buffer ring-down, memory frozen
    let held = storage_decay(&schedule.store_sys, &amplitudes, schedule.t2 - schedule.t1)?;

    // reading: unforced emission from the stored state
    let reading = read_out(
        schedule.read_sys(),
        &held,
        input.coefficients(),
        schedule.t2,
        h,
    )?;

    Ok(ProtocolReport {
        stored_coefficients,
        leakage,
        retrieval_fidelity: reading.fidelity,
        retrieved_times: reading.times,
        retrieved_pulse: reading.pulse,
        writing_output_max: output_max,
        memory_modes: schedule.memory_modes.clone(),
    })
}

/// Reading-stage emission and its overlap with the matched target shape.
#[derive(Debug, Clone)]
pub struct ReadOut {
    /// |⟨Σ_k s_k ν̃_k, output⟩|² / (‖target‖²‖output‖²); 0 for silent runs.
    pub fidelity: f64,
    pub times: Vec<f64>,
    pub pulse: Vec<C64>,
}

/// Open the port on a loaded system at `t2` and compare the emitted pulse
/// with the matched reading shape for `coefficients`. The overlap window is
/// 40 e-foldings of the slowest mode.
pub fn read_out(
    read_sys: &PassiveLinearSystem,
    stored_state: &CVector,
    coefficients: &CVector,
    t2: f64,
    h: f64,
) -> Result<ReadOut> {
    let read_family = PulseFamily::reading(read_sys, t2)?;
    let horizon = 40.0 / read_sys.spectral_abscissa()?.abs();
    let t_end = t2 + (horizon / h).ceil() * h;
    let zeros = ScalarTable::zeros(t2, t_end, h)?;
    let ring = iosim::simulate_from_state(read_sys, stored_state, &zeros)?;
    let target = read_family.sample(t2, t_end, h)?.contract(coefficients);

    let mut cross = Vec::with_capacity(ring.node_count());
    let mut target_sq = Vec::with_capacity(ring.node_count());
    let mut ring_sq = Vec::with_capacity(ring.node_count());
    for k in 0..ring.node_count() {
        cross.push(target.node(k).conj() * ring.output(k));
        target_sq.push(target.node(k).norm_sqr());
        ring_sq.push(ring.output(k).norm_sqr());
    }
    let overlap = linalg::simpson(&cross, h).norm_sqr();
    let target_norm = linalg::simpson_real(&target_sq, h);
    let ring_norm = linalg::simpson_real(&ring_sq, h);
    let fidelity = if target_norm * ring_norm > 1e-300 {
        overlap / (target_norm * ring_norm)
    } else {
        0.0
    };
    Ok(ReadOut {
        fidelity,
        times: (0..ring.node_count()).map(|k| ring.time(k)).collect(),
        pulse: (0..ring.node_count()).map(|k| ring.output(k)).collect(),
    })
}

/// State snapshot when the port is closed before the scheduled stop time.
#[derive(Debug, Clone)]
pub struct EarlySwitchReport {
    /// Single-photon amplitude per node at the switch, in the simulation
    /// frame (conjugate of ⟨a♯⟩₁₀).
    pub amplitudes: CVector,
    /// Mean photon number per node at the switch.
    pub mean_photon_numbers: Vec<f64>,
    /// One-photon weight not yet absorbed into the system, 1 − Σ|c_k|².
    pub vacuum_weight: f64,
    /// The actual switch time used.
    pub switch_time: f64,
}

/// Stop the writing stage at `t1_actual` ≤ t₁ and report the node
/// amplitudes at that moment. Squared memory amplitudes survive storage;
/// everything on the buffer decoheres, which is what makes an early switch
/// costly.
pub fn early_switch_experiment(
    schedule: &StageSchedule,
    input: &InputSignal,
    t1_actual: f64,
    h: f64,
) -> Result<EarlySwitchReport> {
    if input.kind() != InputKind::SinglePhoton {
        return Err(Error::WrongInputKind {
            expected: "single-photon",
        });
    }
    if t1_actual > schedule.t1 {
        return Err(Error::ScheduleInvalid(format!(
            "early switch time {t1_actual} exceeds the scheduled stop {}",
            schedule.t1
        )));
    }
    check_input_matches(schedule, input)?;
    let n = schedule.write_sys().dim();
    let writing = run_writing(schedule, input, t1_actual, h)?;
    let (amplitudes, mean_photon) = match writing {
        Some(w) => (w.amplitudes, w.mean_photon),
        None => (CVector::zeros(n), vec![0.0; n]),
    };
    let absorbed: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    Ok(EarlySwitchReport {
        amplitudes,
        mean_photon_numbers: mean_photon,
        vacuum_weight: (1.0 - absorbed).max(0.0),
        switch_time: t1_actual,
    })
}

/// Propagate a node-amplitude vector through a storage period: memory
/// coordinates are returned untouched, buffer coordinates evolve by
/// e^{A_B · duration}.
pub fn storage_decay(
    store_sys: &PassiveLinearSystem,
    state: &CVector,
    duration: f64,
) -> Result<CVector> {
    if state.len() != store_sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has length {}, system has {} modes",
            state.len(),
            store_sys.dim()
        )));
    }
    let memory = memory_coordinates(store_sys);
    if memory.is_empty() {
        return Err(Error::BlockStructureViolation {
            residual: block_residual(store_sys),
        });
    }
    let buffer: Vec<usize> = (0..store_sys.dim()).filter(|k| !memory.contains(k)).collect();
    let mut out = state.clone();
    if !buffer.is_empty() && duration != 0.0 {
        let m = buffer.len();
        let a = store_sys.drift();
        let a_buffer = CMatrix::from_fn(m, m, |i, j| a[(buffer[i], buffer[j])]);
        let decay = linalg::expm(&(a_buffer * C64::new(duration, 0.0)));
        let x = CVector::from_vec(buffer.iter().map(|&k| state[k]).collect());
        let y = decay * x;
        for (i, &k) in buffer.iter().enumerate() {
            out[k] = y[i];
        }
    }
    Ok(out)
}

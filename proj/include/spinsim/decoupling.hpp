#pragma once

#include "spinsim/dynamics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace spinsim {

/// Free-evolution delay followed by an ideal collective rotation
/// exp(-i angle * sum_i (axis . I^i)).
struct PulseEvent {
    double delay_before = 0.0;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
    double angle = 0.0;
};

/// One or more repetitions of a pulse cycle; tail_delay closes each cycle.
struct PulseSequence {
    std::vector<PulseEvent> events;  // all cycles, cycle-boundary delays merged
    double tail_delay = 0.0;
    int n_cycles = 1;

    /// Duration of a single cycle (sum of its delays including the tail).
    double cycle_time() const;
    double total_time() const { return cycle_time() * n_cycles; }
    int n_pulses() const { return static_cast<int>(events.size()); }
};

enum class SequenceKind { CP, CPMG, XY4, XY8, WAHUHA, MREV8 };

SequenceKind sequence_kind_from_name(const std::string& name);

/// Canonical cycle definitions:
///   CP:     tau  PI_x  2tau PI_x  tau
///   CPMG:   tau  PI_y  2tau PI_y  tau
///   XY4:    tau  PI_x  2tau PI_y  2tau PI_x  2tau PI_y  tau
///   XY8:    XY4 followed by its pulse-order mirror
///   WAHUHA: tau  P_-x  tau  P_y   2tau P_-y  tau  P_x   tau   (P = pi/2)
///   MREV8:  tau  P_x   tau  P_-y  2tau P_y   tau  P_-x
///           2tau P_x   tau  P_y   2tau P_-y  tau  P_-x  tau
/// The MREV8 toggling table also ships as data/mrev8.seq.
PulseSequence build_sequence(SequenceKind kind, double tau, int n_cycles);

/// Plain-text sequence table: one event per line as
///   delay axis_x axis_y axis_z angle
/// with an optional final line "tail <delay>"; '#' starts a comment.
PulseSequence parse_sequence(std::istream& in);
PulseSequence load_sequence_file(const std::string& path, int n_cycles);

/// Repeat a single-cycle sequence, merging the delay across cycle boundaries.
PulseSequence repeat_sequence(const PulseSequence& cycle, int n_cycles);

/// Observable expectation sampled on a fixed grid; samples land on every
/// segment boundary, so echo times are always on-grid.
struct CoherenceTrace {
    std::vector<double> times;
    std::vector<double> values;
};

/// Optional per-pulse imperfection: each angle becomes angle * (1 + flip_error)
/// and the axis is rotated about z by phase_error.
struct PulseError {
    double flip_error = 0.0;
    double phase_error = 0.0;
};

/// exp(-i angle sum_i (axis . I^i)) as a Kronecker power of the 2x2 rotation.
ComplexMatrix collective_rotation(int n_spins, const Eigen::Vector3d& axis,
                                  double angle);

/// Piecewise evolution: exact free evolution per delay (via the eigensystem),
/// instantaneous collective rotation at each pulse.  The observable is given
/// in the computational basis.
CoherenceTrace apply_sequence(const PureState& initial, const Eigensystem& eig,
                              const PulseSequence& seq,
                              const HermitianOperator& observable,
                              int samples_per_delay,
                              const PulseError& error = {});

CoherenceTrace apply_sequence(const DensityMatrix& initial,
                              const Eigensystem& eig, const PulseSequence& seq,
                              const HermitianOperator& observable,
                              int samples_per_delay,
                              const PulseError& error = {});

/// Zeroth-order average Hamiltonian (1/t_c) sum_k tau_k U_k^dagger H U_k with
/// U_k the cumulative pulse product before segment k.  Uses one cycle only.
HermitianOperator toggling_average(const HermitianOperator& H,
                                   const PulseSequence& seq);

/// First crossing of the trace, normalized by its initial value, below
/// `threshold` (linear interpolation); +infinity when it never crosses.
double decoherence_time(const CoherenceTrace& trace, double threshold);

/// Samples closest to integer multiples of `period` (t = 0, period, 2 period,
/// ...).  Multi-pulse cycles rotate the state mid-cycle by design, so
/// coherence lifetimes under such sequences are judged at cycle boundaries;
/// this filters a dense trace down to those points.
CoherenceTrace stroboscopic(const CoherenceTrace& trace, double period);

}  // namespace spinsim

#include "spinsim/decoupling.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace spinsim {

namespace {

constexpr double kPi = std::numbers::pi;

PulseEvent pulse(double delay, double ax, double ay, double az, double angle) {
    PulseEvent e;
    e.delay_before = delay;
    e.axis = Eigen::Vector3d(ax, ay, az);
    e.angle = angle;
    return e;
}

PulseSequence one_cycle(std::vector<PulseEvent> events, double tail) {
    PulseSequence s;
    s.events = std::move(events);
    s.tail_delay = tail;
    s.n_cycles = 1;
    return s;
}

}  // namespace

double PulseSequence::cycle_time() const {
    double total = tail_delay;
    for (const auto& e : events) total += e.delay_before;
    // events holds all cycles; the per-cycle time divides evenly because
    // repeat_sequence merges boundary delays symmetrically.
    return total / n_cycles;
}

SequenceKind sequence_kind_from_name(const std::string& name) {
    if (name == "cp") return SequenceKind::CP;
    if (name == "cpmg") return SequenceKind::CPMG;
    if (name == "xy4") return SequenceKind::XY4;
    if (name == "xy8") return SequenceKind::XY8;
    if (name == "wahuha") return SequenceKind::WAHUHA;
    if (name == "mrev8") return SequenceKind::MREV8;
    throw std::invalid_argument("unknown pulse sequence kind: " + name);
}

PulseSequence build_sequence(SequenceKind kind, double tau, int n_cycles) {
    if (!(tau > 0.0))
        throw std::invalid_argument("tau must be positive");
    if (n_cycles < 1)
        throw std::invalid_argument("n_cycles must be at least 1");
    const double hp = kPi / 2.0;
    PulseSequence cycle;
    switch (kind) {
        case SequenceKind::CP:
            cycle = one_cycle({pulse(tau, 1, 0, 0, kPi), pulse(2 * tau, 1, 0, 0, kPi)},
                              tau);
            break;
        case SequenceKind::CPMG:
            cycle = one_cycle({pulse(tau, 0, 1, 0, kPi), pulse(2 * tau, 0, 1, 0, kPi)},
                              tau);
            break;
        case SequenceKind::XY4:
            cycle = one_cycle({pulse(tau, 1, 0, 0, kPi), pulse(2 * tau, 0, 1, 0, kPi),
                               pulse(2 * tau, 1, 0, 0, kPi), pulse(2 * tau, 0, 1, 0, kPi)},
                              tau);
            break;
        case SequenceKind::XY8:
            cycle = one_cycle({pulse(tau, 1, 0, 0, kPi), pulse(2 * tau, 0, 1, 0, kPi),
                               pulse(2 * tau, 1, 0, 0, kPi), pulse(2 * tau, 0, 1, 0, kPi),
                               pulse(2 * tau, 0, 1, 0, kPi), pulse(2 * tau, 1, 0, 0, kPi),
                               pulse(2 * tau, 0, 1, 0, kPi), pulse(2 * tau, 1, 0, 0, kPi)},
                              tau);
            break;
        case SequenceKind::WAHUHA:
            cycle = one_cycle({pulse(tau, -1, 0, 0, hp), pulse(tau, 0, 1, 0, hp),
                               pulse(2 * tau, 0, -1, 0, hp), pulse(tau, 1, 0, 0, hp)},
                              tau);
            break;
        case SequenceKind::MREV8:
            cycle = one_cycle({pulse(tau, 1, 0, 0, hp), pulse(tau, 0, -1, 0, hp),
                               pulse(2 * tau, 0, 1, 0, hp), pulse(tau, -1, 0, 0, hp),
                               pulse(2 * tau, 1, 0, 0, hp), pulse(tau, 0, 1, 0, hp),
                               pulse(2 * tau, 0, -1, 0, hp), pulse(tau, -1, 0, 0, hp)},
                              tau);
            break;
    }
    return repeat_sequence(cycle, n_cycles);
}

PulseSequence repeat_sequence(const PulseSequence& cycle, int n_cycles) {
    if (cycle.n_cycles != 1)
        throw std::invalid_argument("repeat_sequence expects a single cycle");
    if (n_cycles < 1)
        throw std::invalid_argument("n_cycles must be at least 1");
    PulseSequence out = cycle;
    for (int k = 1; k < n_cycles; ++k) {
        for (std::size_t i = 0; i < cycle.events.size(); ++i) {
            PulseEvent e = cycle.events[i];
            if (i == 0) e.delay_before += cycle.tail_delay;
            out.events.push_back(e);
        }
    }
    out.n_cycles = n_cycles;
    return out;
}

PulseSequence parse_sequence(std::istream& in) {
    PulseSequence seq;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "tail") {
            if (!(ls >> seq.tail_delay))
                throw std::invalid_argument("bad tail delay at line " +
                                            std::to_string(lineno));
            continue;
        }
        PulseEvent e;
        std::istringstream row(line);
        if (!(row >> e.delay_before >> e.axis.x() >> e.axis.y() >> e.axis.z() >>
              e.angle))
            throw std::invalid_argument("bad pulse event at line " +
                                        std::to_string(lineno));
        if (e.delay_before < 0.0)
            throw std::invalid_argument("negative delay at line " +
                                        std::to_string(lineno));
        const double n = e.axis.norm();
        if (std::abs(n - 1.0) > 1e-12) {
            if (n == 0.0)
                throw std::invalid_argument("zero pulse axis at line " +
                                            std::to_string(lineno));
            e.axis /= n;
        }
        seq.events.push_back(e);
    }
    return seq;
}

PulseSequence load_sequence_file(const std::string& path, int n_cycles) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open sequence file: " + path);
    return repeat_sequence(parse_sequence(in), n_cycles);
}

ComplexMatrix collective_rotation(int n_spins, const Eigen::Vector3d& axis,
                                  double angle) {
    // Single-spin rotation exp(-i angle (n . sigma) / 2).
    const Complex i(0.0, 1.0);
    ComplexMatrix sigma_n(2, 2);
    sigma_n << axis.z(), Complex(axis.x(), -axis.y()),
        Complex(axis.x(), axis.y()), -axis.z();
    const double half = 0.5 * angle;
    ComplexMatrix r2 = std::cos(half) * ComplexMatrix::Identity(2, 2) -
                       i * std::sin(half) * sigma_n;
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < n_spins; ++k) {
        ComplexMatrix next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c)
                next.block(2 * r, 2 * c, 2, 2) = out(r, c) * r2;
        out.swap(next);
    }
    return out;
}

namespace {

int spins_from_dim(Eigen::Index dim) {
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    if ((Eigen::Index{1} << n) != dim)
        throw std::invalid_argument("dimension is not a power of two");
    return n;
}

PulseEvent apply_error(const PulseEvent& e, const PulseError& err) {
    PulseEvent out = e;
    out.angle *= 1.0 + err.flip_error;
    if (err.phase_error != 0.0) {
        const double c = std::cos(err.phase_error), s = std::sin(err.phase_error);
        out.axis = Eigen::Vector3d(c * e.axis.x() - s * e.axis.y(),
                                   s * e.axis.x() + c * e.axis.y(), e.axis.z());
    }
    return out;
}

template <typename State, typename FreeEvolve, typename Rotate, typename Measure>
CoherenceTrace run_sequence(State state, const PulseSequence& seq,
                            int samples_per_delay, const PulseError& error,
                            FreeEvolve free_evolve, Rotate rotate,
                            Measure measure) {
    if (samples_per_delay < 1)
        throw std::invalid_argument("samples_per_delay must be at least 1");
    CoherenceTrace trace;
    double t = 0.0;
    trace.times.push_back(0.0);
    trace.values.push_back(measure(state));
    const auto evolve_segment = [&](double delay) {
        if (delay <= 0.0) return;
        const double h = delay / samples_per_delay;
        for (int s = 0; s < samples_per_delay; ++s) {
            state = free_evolve(state, h);
            t += h;
            trace.times.push_back(t);
            trace.values.push_back(measure(state));
        }
    };
    for (const auto& raw : seq.events) {
        const PulseEvent e = apply_error(raw, error);
        evolve_segment(e.delay_before);
        state = rotate(state, e);
        // Pulses are instantaneous; re-record the post-pulse value at t.
        trace.times.back() = t;
        trace.values.back() = measure(state);
    }
    evolve_segment(seq.tail_delay);
    return trace;
}

}  // namespace

CoherenceTrace apply_sequence(const PureState& initial, const Eigensystem& eig,
                              const PulseSequence& seq,
                              const HermitianOperator& observable,
                              int samples_per_delay, const PulseError& error) {
    if (initial.amplitudes.size() != eig.dim() || observable.dim() != eig.dim())
        throw std::invalid_argument("apply_sequence dimension mismatch");
    if (initial.basis != StateBasis::Computational)
        throw std::invalid_argument("apply_sequence expects computational basis");
    const int n = spins_from_dim(eig.dim());
    return run_sequence(
        initial.amplitudes, seq, samples_per_delay, error,
        [&](const ComplexVector& psi, double dt) -> ComplexVector {
            ComplexVector c = eig.vectors.adjoint() * psi;
            for (Eigen::Index k = 0; k < c.size(); ++k)
                c[k] *= std::polar(1.0, -eig.levels[k] * dt);
            return eig.vectors * c;
        },
        [&](const ComplexVector& psi, const PulseEvent& e) -> ComplexVector {
            return collective_rotation(n, e.axis, e.angle) * psi;
        },
        [&](const ComplexVector& psi) -> double {
            return psi.dot(observable.mat * psi).real();
        });
}

CoherenceTrace apply_sequence(const DensityMatrix& initial,
                              const Eigensystem& eig, const PulseSequence& seq,
                              const HermitianOperator& observable,
                              int samples_per_delay, const PulseError& error) {
    if (initial.entries.rows() != eig.dim() || observable.dim() != eig.dim())
        throw std::invalid_argument("apply_sequence dimension mismatch");
    const int n = spins_from_dim(eig.dim());
    return run_sequence(
        initial.entries, seq, samples_per_delay, error,
        [&](const ComplexMatrix& rho, double dt) -> ComplexMatrix {
            ComplexVector ph(eig.levels.size());
            for (Eigen::Index k = 0; k < ph.size(); ++k)
                ph[k] = std::polar(1.0, -eig.levels[k] * dt);
            const ComplexMatrix u =
                eig.vectors * ph.asDiagonal() * eig.vectors.adjoint();
            return u * rho * u.adjoint();
        },
        [&](const ComplexMatrix& rho, const PulseEvent& e) -> ComplexMatrix {
            const ComplexMatrix r = collective_rotation(n, e.axis, e.angle);
            return r * rho * r.adjoint();
        },
        [&](const ComplexMatrix& rho) -> double {
            return (observable.mat * rho).trace().real();
        });
}

HermitianOperator toggling_average(const HermitianOperator& H,
                                   const PulseSequence& seq) {
    if (seq.events.empty() && seq.tail_delay <= 0.0)
        throw std::invalid_argument("toggling_average needs a non-empty sequence");
    const int n = spins_from_dim(H.dim());
    // One cycle is enough: repeats share the same zeroth-order average.
    const std::size_t per_cycle = seq.events.size() / seq.n_cycles;
    ComplexMatrix u = ComplexMatrix::Identity(H.dim(), H.dim());
    ComplexMatrix acc = ComplexMatrix::Zero(H.dim(), H.dim());
    double total = 0.0;
    for (std::size_t k = 0; k < per_cycle; ++k) {
        const PulseEvent& e = seq.events[k];
        if (e.delay_before > 0.0) {
            acc += e.delay_before * (u.adjoint() * H.mat * u);
            total += e.delay_before;
        }
        u = collective_rotation(n, e.axis, e.angle) * u;
    }
    if (seq.tail_delay > 0.0) {
        acc += seq.tail_delay * (u.adjoint() * H.mat * u);
        total += seq.tail_delay;
    }
    return HermitianOperator::from(acc / total);
}

CoherenceTrace stroboscopic(const CoherenceTrace& trace, double period) {
    if (!(period > 0.0))
        throw std::invalid_argument("stroboscopic period must be positive");
    if (trace.times.empty())
        throw std::invalid_argument("empty coherence trace");
    CoherenceTrace out;
    const double t_end = trace.times.back();
    std::size_t cursor = 0;
    for (long k = 0;; ++k) {
        const double target = period * static_cast<double>(k);
        if (target > t_end + 0.5 * period) break;
        while (cursor + 1 < trace.times.size() &&
               std::abs(trace.times[cursor + 1] - target) <=
                   std::abs(trace.times[cursor] - target))
            ++cursor;
        if (std::abs(trace.times[cursor] - target) > 1e-6 * period + 1e-12) break;
        out.times.push_back(trace.times[cursor]);
        out.values.push_back(trace.values[cursor]);
    }
    return out;
}

double decoherence_time(const CoherenceTrace& trace, double threshold) {
    if (trace.times.empty())
        throw std::invalid_argument("empty coherence trace");
    const double initial = trace.values.front();
    if (initial == 0.0)
        throw std::invalid_argument("trace starts at zero; cannot normalize");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("threshold must be in (0, 1)");
    double prev = 1.0;
    for (std::size_t i = 1; i < trace.values.size(); ++i) {
        const double cur = trace.values[i] / initial;
        if (cur < threshold) {
            const double t0 = trace.times[i - 1], t1 = trace.times[i];
            if (prev == cur) return t1;
            return t0 + (prev - threshold) / (prev - cur) * (t1 - t0);
        }
        prev = cur;
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace spinsim

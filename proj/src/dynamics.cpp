#include "spinsim/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace spinsim {

namespace {

ComplexVector phase_vector(const RealVector& levels, double t) {
    ComplexVector ph(levels.size());
    for (Eigen::Index n = 0; n < levels.size(); ++n)
        ph[n] = std::polar(1.0, -levels[n] * t);
    return ph;
}

double default_gap_tol(const RealVector& levels) {
    const double width = levels[levels.size() - 1] - levels[0];
    return 1e-9 * width;
}

}  // namespace

PureState PureState::from(ComplexVector amps, StateBasis basis) {
    const double norm = amps.norm();
    if (std::abs(norm - 1.0) > 1e-12) {
        if (norm == 0.0)
            throw std::invalid_argument("state vector is zero");
        amps /= norm;
    }
    return PureState{std::move(amps), basis};
}

DensityMatrix DensityMatrix::from(ComplexMatrix m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("density matrix must be square");
    const double scale = std::max(1.0, max_abs(m));
    if (max_abs(m - m.adjoint().eval()) > 1e-12 * scale)
        throw std::invalid_argument("density matrix must be Hermitian");
    if (std::abs(m.trace().real() - 1.0) > 1e-12 ||
        std::abs(m.trace().imag()) > 1e-12)
        throw std::invalid_argument("density matrix must have unit trace");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    if (solver.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    return DensityMatrix{std::move(m)};
}

DensityMatrix DensityMatrix::pure(const PureState& state) {
    DensityMatrix rho;
    rho.entries = state.amplitudes * state.amplitudes.adjoint();
    return rho;
}

SpectralAmplitudes to_spectral(const PureState& state, const Eigensystem& eig) {
    if (state.amplitudes.size() != eig.dim())
        throw std::invalid_argument("state/eigensystem dimension mismatch");
    SpectralAmplitudes out;
    out.levels = eig.levels;
    out.c = (state.basis == StateBasis::Energy)
                ? state.amplitudes
                : ComplexVector(eig.vectors.adjoint() * state.amplitudes);
    return out;
}

HermitianOperator to_energy_basis(const HermitianOperator& A,
                                  const Eigensystem& eig) {
    if (A.dim() != eig.dim())
        throw std::invalid_argument("operator/eigensystem dimension mismatch");
    return HermitianOperator::from(eig.vectors.adjoint() * A.mat * eig.vectors);
}

SpectralAmplitudes evolve_pure(const SpectralAmplitudes& c, double t) {
    if (!std::isfinite(t))
        throw std::invalid_argument("evolution time must be finite");
    SpectralAmplitudes out;
    out.levels = c.levels;
    out.c = c.c.cwiseProduct(phase_vector(c.levels, t));
    return out;
}

DensityMatrix evolve_density(const DensityMatrix& rho, const Eigensystem& eig,
                             double t) {
    if (rho.entries.rows() != eig.dim())
        throw std::invalid_argument("density/eigensystem dimension mismatch");
    const ComplexVector ph = phase_vector(eig.levels, t);
    const ComplexMatrix u = eig.vectors * ph.asDiagonal() * eig.vectors.adjoint();
    DensityMatrix out;
    out.entries = u * rho.entries * u.adjoint();
    return out;
}

double expectation(const SpectralAmplitudes& c, const HermitianOperator& A_energy,
                   double t) {
    if (A_energy.dim() != c.c.size())
        throw std::invalid_argument("amplitude/operator dimension mismatch");
    const ComplexVector ct = c.c.cwiseProduct(phase_vector(c.levels, t));
    const Complex value = ct.dot(A_energy.mat * ct);  // Eigen dot conjugates lhs
    if (std::abs(value.imag()) > 1e-10)
        throw std::runtime_error("expectation value has non-real residue");
    return value.real();
}

double diagonal_ensemble(const SpectralAmplitudes& c,
                         const HermitianOperator& A_energy) {
    if (A_energy.dim() != c.c.size())
        throw std::invalid_argument("amplitude/operator dimension mismatch");
    double sum = 0.0;
    for (Eigen::Index n = 0; n < c.c.size(); ++n)
        sum += std::norm(c.c[n]) * A_energy.mat(n, n).real();
    return sum;
}

double degenerate_cross_sum(const SpectralAmplitudes& c,
                            const HermitianOperator& A_energy, double gap_tol) {
    if (gap_tol < 0.0) gap_tol = default_gap_tol(c.levels);
    double sum = 0.0;
    const Eigen::Index n = c.c.size();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b)
            if (std::abs(c.levels[a] - c.levels[b]) <= gap_tol)
                sum += 2.0 * (std::conj(c.c[a]) * c.c[b] * A_energy.mat(a, b)).real();
    return sum;
}

WindowedAverage windowed_time_average(const SpectralAmplitudes& c,
                                      const HermitianOperator& A_energy,
                                      double T, int n_samples) {
    if (!(T > 0.0))
        throw std::invalid_argument("window length T must be positive");
    if (n_samples < 100)
        throw std::invalid_argument("n_samples must be at least 100");

    WindowedAverage out;
    const double h = T / (n_samples - 1);
    double acc = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double w = (k == 0 || k == n_samples - 1) ? 0.5 : 1.0;
        acc += w * expectation(c, A_energy, k * h);
    }
    out.mean = acc / (n_samples - 1);

    const double gap_tol = default_gap_tol(c.levels);
    const Eigen::Index n = c.c.size();
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double gap = std::abs(c.levels[a] - c.levels[b]);
            if (gap <= gap_tol) continue;  // survives the limit; kept in mean
            out.bound += 2.0 * 2.0 * std::abs(c.c[a]) * std::abs(c.c[b]) *
                         std::abs(A_energy.mat(a, b)) / (T * gap);
        }
    }
    return out;
}

double loschmidt_echo(const PureState& state, const HermitianOperator& H,
                      const HermitianOperator& V_pert, double eps, double t) {
    const std::vector<double> times = {t};
    return loschmidt_echo_curve(state, H, V_pert, eps, times)[0];
}

std::vector<double> loschmidt_echo_curve(const PureState& state,
                                         const HermitianOperator& H,
                                         const HermitianOperator& V_pert,
                                         double eps,
                                         const std::vector<double>& times) {
    if (eps < 0.0)
        throw std::invalid_argument("eps must be non-negative");
    if (H.dim() != V_pert.dim() || H.dim() != state.amplitudes.size())
        throw std::invalid_argument("loschmidt_echo dimension mismatch");
    if (state.basis != StateBasis::Computational)
        throw std::invalid_argument("loschmidt_echo expects a computational-basis state");

    const Eigensystem forward = diagonalize(H);
    const Eigensystem backward =
        diagonalize(HermitianOperator::from(H.mat + eps * V_pert.mat));

    const SpectralAmplitudes c0 = to_spectral(state, forward);
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        const ComplexVector mid =
            forward.vectors * evolve_pure(c0, t).c;  // e^{-iHt} psi0
        // Reversed segment: e^{+i (H + eps V) t}.
        ComplexVector cb = backward.vectors.adjoint() * mid;
        for (Eigen::Index n = 0; n < cb.size(); ++n)
            cb[n] *= std::polar(1.0, backward.levels[n] * t);
        const ComplexVector fin = backward.vectors * cb;
        const double f = std::norm(state.amplitudes.dot(fin));
        out.push_back(std::min(1.0, std::max(0.0, f)));
    }
    return out;
}

}  // namespace spinsim

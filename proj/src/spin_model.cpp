#include "spinsim/spin_model.hpp"

#include <Eigen/Eigenvalues>

namespace spinsim {

namespace {

ComplexMatrix pauli_half(Axis axis) {
    ComplexMatrix m(2, 2);
    const Complex i(0.0, 1.0);
    switch (axis) {
        case Axis::X:
            m << 0.0, 0.5, 0.5, 0.0;
            break;
        case Axis::Y:
            m << 0.0, -0.5 * i, 0.5 * i, 0.0;
            break;
        case Axis::Z:
            m << 0.5, 0.0, 0.0, -0.5;
            break;
    }
    return m;
}

}  // namespace

void SpinSystem::validate() const {
    if (n_spins < 2 || n_spins > 12)
        throw ConfigurationError("n_spins must be in [2, 12], got " +
                                 std::to_string(n_spins));
    if (offsets.size() != n_spins)
        throw ConfigurationError("offsets length does not match n_spins");
    if (couplings.rows() != n_spins || couplings.cols() != n_spins)
        throw ConfigurationError("couplings must be n_spins x n_spins");
    for (int i = 0; i < n_spins; ++i) {
        if (couplings(i, i) != 0.0)
            throw ConfigurationError("couplings diagonal must be zero");
        for (int j = 0; j < n_spins; ++j)
            if (couplings(i, j) != couplings(j, i))
                throw ConfigurationError("couplings must be symmetric");
    }
}

HermitianOperator HermitianOperator::from(ComplexMatrix m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("operator matrix must be square");
    const double scale = max_abs(m);
    const double dev = max_abs(m - m.adjoint().eval());
    if (dev > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("matrix is not Hermitian (max deviation " +
                                    std::to_string(dev) + ")");
    HermitianOperator h;
    h.mat = 0.5 * (m + m.adjoint().eval());
    return h;
}

ComplexMatrix embedded_spin_op(int n_spins, int site, Axis axis) {
    const ComplexMatrix op = pauli_half(axis);
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < n_spins; ++k) {
        const ComplexMatrix& factor =
            (k == site) ? op : ComplexMatrix(ComplexMatrix::Identity(2, 2));
        ComplexMatrix next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c)
                next.block(2 * r, 2 * c, 2, 2) = out(r, c) * factor;
        out.swap(next);
    }
    return out;
}

HermitianOperator build_hamiltonian(const SpinSystem& sys) {
    sys.validate();
    const int d = sys.dim();
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < sys.n_spins; ++i)
        if (sys.offsets[i] != 0.0)
            h += sys.offsets[i] * embedded_spin_op(sys.n_spins, i, Axis::Z);
    for (int i = 0; i < sys.n_spins; ++i) {
        for (int j = i + 1; j < sys.n_spins; ++j) {
            const double b = sys.couplings(i, j);
            if (b == 0.0) continue;
            const ComplexMatrix zz = embedded_spin_op(sys.n_spins, i, Axis::Z) *
                                     embedded_spin_op(sys.n_spins, j, Axis::Z);
            const ComplexMatrix xx = embedded_spin_op(sys.n_spins, i, Axis::X) *
                                     embedded_spin_op(sys.n_spins, j, Axis::X);
            const ComplexMatrix yy = embedded_spin_op(sys.n_spins, i, Axis::Y) *
                                     embedded_spin_op(sys.n_spins, j, Axis::Y);
            h += b * (2.0 * zz - xx - yy);
        }
    }
    return HermitianOperator::from(std::move(h));
}

HermitianOperator collective_observable(const SpinSystem& sys, Axis axis) {
    sys.validate();
    const int d = sys.dim();
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < sys.n_spins; ++i)
        m += embedded_spin_op(sys.n_spins, i, axis);
    return HermitianOperator::from(std::move(m));
}

Eigensystem diagonalize(const HermitianOperator& H) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(H.mat);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed to converge");
    Eigensystem eig;
    eig.levels = solver.eigenvalues();
    eig.vectors = solver.eigenvectors();
    return eig;
}

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace spinsim

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace spinsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Thrown when a physical specification is invalid (bad sizes, asymmetric
/// couplings, dimension overflow).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical specification of a spin-1/2 ensemble: Zeeman detunings delta_i
/// and secular dipolar couplings b_ij, both angular frequencies with hbar = 1.
struct SpinSystem {
    int n_spins = 0;
    RealVector offsets;    // length n_spins
    RealMatrix couplings;  // symmetric, zero diagonal

    int dim() const { return 1 << n_spins; }

    /// Throws ConfigurationError unless 2 <= n_spins <= 12, sizes match and
    /// couplings are symmetric with zero diagonal.
    void validate() const;
};

enum class Axis { X, Y, Z };

/// Dense Hermitian matrix; the factory enforces hermiticity so downstream
/// code can assume it.
struct HermitianOperator {
    ComplexMatrix mat;

    int dim() const { return static_cast<int>(mat.rows()); }

    /// Accepts m if max|m - m^dagger| <= 1e-12 * max|m|, then symmetrizes to
    /// kill round-off; throws std::invalid_argument otherwise.
    static HermitianOperator from(ComplexMatrix m);
};

/// Spectral decomposition of a Hermitian operator: ascending levels E_n and
/// a unitary matrix whose columns are the eigenvectors.
struct Eigensystem {
    RealVector levels;
    ComplexMatrix vectors;

    int dim() const { return static_cast<int>(levels.size()); }
};

/// Single-spin operator I_axis embedded at site `site` of an n-spin product
/// space (identity elsewhere).
ComplexMatrix embedded_spin_op(int n_spins, int site, Axis axis);

/// H = sum_i delta_i I_z^i + sum_{i<j} b_ij (2 I_z^i I_z^j - I_x^i I_x^j - I_y^i I_y^j)
HermitianOperator build_hamiltonian(const SpinSystem& sys);

/// sum_i I_axis^i
HermitianOperator collective_observable(const SpinSystem& sys, Axis axis);

/// Full dense diagonalization.  Guarantees ascending levels, V^dagger V = 1
/// to 1e-10 and reconstruction residual <= 1e-9 * max|H|.
Eigensystem diagonalize(const HermitianOperator& H);

/// max_ij |A_ij| for diagnostics and tolerances.
double max_abs(const ComplexMatrix& m);

}  // namespace spinsim

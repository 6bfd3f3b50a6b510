#pragma once

#include "spinsim/spin_model.hpp"

namespace spinsim {

enum class StateBasis { Computational, Energy };

/// Unit-norm pure state in a tagged orthonormal basis.
struct PureState {
    ComplexVector amplitudes;
    StateBasis basis = StateBasis::Computational;

    static PureState from(ComplexVector amps,
                          StateBasis basis = StateBasis::Computational);
};

/// Expansion coefficients c_n of a pure state over the energy eigenbasis,
/// together with the levels they refer to.
struct SpectralAmplitudes {
    ComplexVector c;
    RealVector levels;
};

/// Hermitian, unit-trace, positive-semidefinite (to round-off) mixed state.
struct DensityMatrix {
    ComplexMatrix entries;

    static DensityMatrix from(ComplexMatrix m);
    static DensityMatrix pure(const PureState& state);
};

struct WindowedAverage {
    double mean = 0.0;   // trapezoidal average over [0, T]
    double bound = 0.0;  // analytic tail of the oscillatory cross terms
};

/// c = V^dagger psi.  Norm is preserved to round-off.
SpectralAmplitudes to_spectral(const PureState& state, const Eigensystem& eig);

/// A in the energy basis: A_nm = <n|A|m> = V^dagger A V.
HermitianOperator to_energy_basis(const HermitianOperator& A,
                                  const Eigensystem& eig);

/// c_n(t) = c_n(0) exp(-i E_n t); negative t implements time reversal.
SpectralAmplitudes evolve_pure(const SpectralAmplitudes& c, double t);

/// rho(t) = U rho U^dagger with U = V exp(-i diag(E) t) V^dagger.
DensityMatrix evolve_density(const DensityMatrix& rho, const Eigensystem& eig,
                             double t);

/// <A>(t) = sum_{n,m} c_n^* c_m A_nm exp(-i (E_m - E_n) t), A in the energy
/// basis.  The imaginary residue stays below 1e-10 and is discarded.
double expectation(const SpectralAmplitudes& c, const HermitianOperator& A_energy,
                   double t);

/// sum_n |c_n|^2 A_nn.
double diagonal_ensemble(const SpectralAmplitudes& c,
                         const HermitianOperator& A_energy);

/// Cross terms c_n^* c_m A_nm over pairs with |E_n - E_m| < gap_tol; these
/// survive the infinite-time average and must be added to diagonal_ensemble
/// when comparing against windowed averages.  gap_tol < 0 selects the
/// default 1e-9 * spectral width.
double degenerate_cross_sum(const SpectralAmplitudes& c,
                            const HermitianOperator& A_energy,
                            double gap_tol = -1.0);

/// Trapezoidal average of expectation over [0, T] at n_samples points,
/// with the analytic bound sum 2 |c_n||c_m||A_nm| / (T |E_m - E_n|) over
/// non-degenerate pairs.  Near-degenerate pairs (gap below 1e-9 * spectral
/// width) are excluded from the bound; their contribution is contained in
/// the mean.
WindowedAverage windowed_time_average(const SpectralAmplitudes& c,
                                      const HermitianOperator& A_energy,
                                      double T, int n_samples);

/// |<psi0| exp(+i (H + eps V) t) exp(-i H t) |psi0>|^2, clipped to [0, 1].
/// eps = 0 is a perfect Hamiltonian sign reversal and returns 1 for any t.
double loschmidt_echo(const PureState& state, const HermitianOperator& H,
                      const HermitianOperator& V_pert, double eps, double t);

/// Echo over a whole time grid, reusing the two eigendecompositions.
std::vector<double> loschmidt_echo_curve(const PureState& state,
                                         const HermitianOperator& H,
                                         const HermitianOperator& V_pert,
                                         double eps,
                                         const std::vector<double>& times);

}  // namespace spinsim

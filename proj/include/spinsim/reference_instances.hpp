#pragma once

#include "spinsim/rng.hpp"
#include "spinsim/spin_model.hpp"

namespace spinsim {

/// Fixed seeded instances shared by the oracle subcommand, the golden files
/// and the acceptance suite.  Changing any constant here invalidates the
/// pinned reference values under tests/golden/.

inline SpinSystem random_spin_system(int n_spins, double offset_scale,
                                     double coupling_scale, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    SpinSystem sys;
    sys.n_spins = n_spins;
    sys.offsets = RealVector::Zero(n_spins);
    sys.couplings = RealMatrix::Zero(n_spins, n_spins);
    for (int i = 0; i < n_spins; ++i)
        sys.offsets[i] = offset_scale * (2.0 * rng.next_double() - 1.0);
    for (int i = 0; i < n_spins; ++i)
        for (int j = i + 1; j < n_spins; ++j) {
            const double b = coupling_scale * (2.0 * rng.next_double() - 1.0);
            sys.couplings(i, j) = sys.couplings(j, i) = b;
        }
    return sys;
}

/// Six spins, pure dipolar (no offsets): the decoupling acceptance instance.
inline SpinSystem reference_six_spin() {
    return random_spin_system(6, 0.0, 1.0, 601);
}

/// Six spins with offsets only (dipolar couplings zero): CPMG echo instance.
inline SpinSystem reference_six_spin_zeeman() {
    return random_spin_system(6, 1.0, 0.0, 602);
}

/// Four spins with both terms: Loschmidt echo acceptance instance.
inline SpinSystem reference_four_spin() {
    return random_spin_system(4, 0.5, 1.0, 401);
}

// Decoupling acceptance parameters (criterion constants, pinned).
inline constexpr double kDdTau = 0.1;
inline constexpr int kDdCycles = 400;
inline constexpr double kDdThreshold = 0.9;
inline constexpr double kDdFreeDuration = 10.0;
inline constexpr int kDdFreeSamples = 4000;

// Loschmidt acceptance parameters.
inline constexpr double kEchoTMax = 20.0;
inline constexpr int kEchoPoints = 41;
inline constexpr std::uint64_t kEchoStateSeed = 77;

}  // namespace spinsim

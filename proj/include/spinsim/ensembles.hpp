#pragma once

#include "spinsim/spin_model.hpp"

#include <cstdint>
#include <utility>

namespace spinsim {

/// Ascending real energy levels, repeats allowed, at least two entries.
struct EnergyLevels {
    RealVector levels;

    static EnergyLevels from(RealVector v);

    int size() const { return static_cast<int>(levels.size()); }
    double min() const { return levels[0]; }
    double max() const { return levels[levels.size() - 1]; }
    double span() const { return max() - min(); }
};

/// Canonical (Boltzmann-Gibbs) level distribution rho(E_n) with its inverse
/// temperature and log partition function (unshifted convention).
struct CanonicalDistribution {
    double beta = 0.0;
    RealVector probs;
    double log_z = 0.0;

    double mean_energy(const EnergyLevels& lv) const {
        return probs.dot(lv.levels);
    }
};

/// Component means of |c_n|^2 under the flat measure on the fixed-energy
/// population polytope, with Monte Carlo standard errors.
struct GqmeSampleStats {
    RealVector mean_p;
    RealVector std_err;
    long n_samples = 0;
    double energy_target = 0.0;
    double min_ess = 0.0;       // smallest per-component effective sample size
    bool low_ess_warning = false;
};

struct GqmeOptions {
    long n_samples = 10000;
    long burn_in = 1000;
    long thinning = 10;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // chain index for parallel runs
};

/// rho(E_n) = exp(-beta (E_n - E_min)) / sum_m exp(-beta (E_m - E_min));
/// identical to the textbook form, shifted for overflow safety.
CanonicalDistribution canonical_from_beta(const EnergyLevels& levels, double beta);

/// Mean energy under the canonical distribution at inverse temperature beta.
double canonical_mean_energy(const EnergyLevels& levels, double beta);

/// Solves sum_n rho(E_n; beta) E_n = E_target for beta by expanding-bracket
/// bisection on the strictly decreasing map beta -> <E>.  Requires
/// E_min < E_target < E_max (strict); throws std::domain_error otherwise,
/// naming the admissible open interval.
double beta_from_energy(const EnergyLevels& levels, double E_target);

/// S = -sum rho ln rho with 0 ln 0 := 0; rejects negative entries.
double entropy(const RealVector& probs);

/// Returns (entropy(rho(beta)), beta <E> + ln Z); the two sides agree to
/// round-off for every (levels, beta).
std::pair<double, double> free_energy_identity_check(const EnergyLevels& levels,
                                                     double beta);

/// Hit-and-run over {p >= 0, sum p = 1, sum p E = E_target}: uniform random
/// direction in the two-constraint null space, uniform step on the feasible
/// chord.  Every retained sample satisfies both constraints to 1e-12.
GqmeSampleStats gqme_sample(const EnergyLevels& levels, double E_target,
                            const GqmeOptions& opts);

/// Exact flat-measure mean for L <= 4: the unique point (L = 2), midpoint of
/// the feasible segment (L = 3), centroid of the feasible polygon (L = 4).
RealVector gqme_exact_small(const EnergyLevels& levels, double E_target);

/// Merge independent chains by sample-count-weighted average; pooled
/// standard errors.
GqmeSampleStats merge_gqme_stats(const std::vector<GqmeSampleStats>& chains);

}  // namespace spinsim

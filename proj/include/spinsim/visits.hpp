#pragma once

#include "spinsim/ensembles.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace spinsim {

/// Ascending, distinct, non-negative integer energies on a gcd-reduced
/// lattice, plus the scale factor mapping back to physical units.
struct IntegerLevels {
    std::vector<long> levels;
    double scale = 1.0;

    static IntegerLevels from(std::vector<long> raw, double scale = 1.0);

    int size() const { return static_cast<int>(levels.size()); }
    EnergyLevels as_real() const;
};

/// Integer visit counts nu_n with their exactly conserved totals.
struct VisitConfiguration {
    std::vector<long> counts;
    long total = 0;         // sum nu_n
    long energy_total = 0;  // sum nu_n e_n

    static VisitConfiguration from(const IntegerLevels& levels,
                                   std::vector<long> counts);
};

/// ln P = ln N! - sum ln nu_n!  via lgamma.
double log_multinomial_weight(const VisitConfiguration& cfg);

struct MostProbableVisits {
    RealVector nu_real;          // N exp(-beta e_n) / Z
    VisitConfiguration nu_rounded;
    double beta = 0.0;
    bool at_endpoint = false;    // E_t at a corner forces the configuration
};

/// Continuous maximizer of the multinomial weight under both constraints
/// (beta solved from E_t / N), plus the best feasible integer configuration
/// within +-1 of it componentwise.
MostProbableVisits most_probable_visits(const IntegerLevels& levels, long N,
                                        long E_t);

struct BruteForceResult {
    VisitConfiguration argmax;
    double log_weight = 0.0;
    bool tie = false;  // another configuration attains the same weight
};

/// Exhaustive enumeration of all feasible configurations (L <= 5, N <= 60);
/// ties broken toward the lexicographically smallest counts vector.
/// Empty result when (N, E_t) is infeasible.
std::optional<BruteForceResult> brute_force_argmax(const IntegerLevels& levels,
                                                   long N, long E_t);

struct ChainOptions {
    long steps = 1000000;
    long burn_in = -1;     // defaults to steps / 10
    int n_batches = 32;
    long trace_stride = 0; // record every k-th post-burn-in state (0 = off)
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

struct ChainResult {
    RealVector freq;       // time-averaged nu / N
    RealVector std_err;    // batch-means standard error of freq
    double acceptance_rate = 0.0;
    long move_table_size = 0;
    bool frozen = false;   // no proposal was ever applicable
    VisitConfiguration final_state;
    std::vector<long> trace_steps;
    std::vector<std::vector<long>> trace;  // one counts vector per entry
};

/// Metropolis chain over visit configurations.  Proposals move one visit
/// each from levels (a, b) to (c, d) with e_a + e_b = e_c + e_d, drawn
/// uniformly from the precomputed move table, so both conservation laws hold
/// exactly at every step.  The stationary law is proportional to the
/// multinomial weight; the time-averaged frequencies approach the canonical
/// distribution at E_t / N as N and the step count grow.
ChainResult r_transition_chain(const IntegerLevels& levels, long N, long E_t,
                               const ChainOptions& opts);

/// Pool chains by equal-weight average with combined standard errors.
ChainResult merge_chain_results(const std::vector<ChainResult>& chains);

}  // namespace spinsim

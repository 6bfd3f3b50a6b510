#include "spinsim/visits.hpp"

#include "spinsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spinsim {

namespace {

double log_factorial(long n) { return std::lgamma(static_cast<double>(n) + 1.0); }

bool feasible_totals(const IntegerLevels& lv, long N, long E_t) {
    return N >= 0 && E_t >= N * lv.levels.front() && E_t <= N * lv.levels.back();
}

struct Move {
    int a, b, c, d;  // take one visit from a and b, give to c and d
};

std::vector<Move> build_move_table(const IntegerLevels& lv) {
    const int L = lv.size();
    std::vector<Move> table;
    for (int a = 0; a < L; ++a)
        for (int b = a; b < L; ++b)
            for (int c = 0; c < L; ++c)
                for (int d = c; d < L; ++d) {
                    if (a == c && b == d) continue;
                    if (lv.levels[a] + lv.levels[b] != lv.levels[c] + lv.levels[d])
                        continue;
                    table.push_back({a, b, c, d});
                }
    return table;  // symmetric: each move's reverse is also an entry
}

}  // namespace

IntegerLevels IntegerLevels::from(std::vector<long> raw, double scale) {
    if (raw.size() < 2)
        throw std::invalid_argument("need at least two integer levels");
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0)
            throw std::invalid_argument("integer levels must be non-negative");
        if (i > 0 && raw[i] <= raw[i - 1])
            throw std::invalid_argument("integer levels must be strictly ascending");
    }
    // gcd-reduce the spacings above the ground level; fold the factor into scale.
    long g = 0;
    for (long e : raw) g = std::gcd(g, e - raw.front());
    if (g > 1) {
        for (long& e : raw) e = raw.front() + (e - raw.front()) / g;
        scale *= static_cast<double>(g);
    }
    return IntegerLevels{std::move(raw), scale};
}

EnergyLevels IntegerLevels::as_real() const {
    RealVector v(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = static_cast<double>(levels[i]);
    return EnergyLevels::from(std::move(v));
}

VisitConfiguration VisitConfiguration::from(const IntegerLevels& lv,
                                            std::vector<long> counts) {
    if (counts.size() != lv.levels.size())
        throw std::invalid_argument("counts length does not match level count");
    VisitConfiguration cfg;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 0)
            throw std::invalid_argument("visit counts must be non-negative");
        cfg.total += counts[i];
        cfg.energy_total += counts[i] * lv.levels[i];
    }
    cfg.counts = std::move(counts);
    return cfg;
}

double log_multinomial_weight(const VisitConfiguration& cfg) {
    double s = log_factorial(cfg.total);
    for (long nu : cfg.counts) s -= log_factorial(nu);
    return s;
}

MostProbableVisits most_probable_visits(const IntegerLevels& lv, long N, long E_t) {
    if (!feasible_totals(lv, N, E_t)) {
        std::ostringstream msg;
        msg << "(N, E_t) = (" << N << ", " << E_t << ") infeasible for levels ["
            << N * lv.levels.front() << ", " << N * lv.levels.back() << "]";
        throw std::domain_error(msg.str());
    }
    const int L = lv.size();
    MostProbableVisits out;

    // Endpoint targets force the corner configuration (beta = +-infinity).
    if (E_t == N * lv.levels.front() || E_t == N * lv.levels.back()) {
        std::vector<long> corner(L, 0);
        corner[E_t == N * lv.levels.front() ? 0 : L - 1] = N;
        out.nu_rounded = VisitConfiguration::from(lv, corner);
        out.nu_real = RealVector::Zero(L);
        out.nu_real[E_t == N * lv.levels.front() ? 0 : L - 1] = static_cast<double>(N);
        out.beta = E_t == N * lv.levels.front()
                       ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
        out.at_endpoint = true;
        return out;
    }

    const EnergyLevels real_levels = lv.as_real();
    out.beta = beta_from_energy(real_levels,
                                static_cast<double>(E_t) / static_cast<double>(N));
    out.nu_real =
        static_cast<double>(N) * canonical_from_beta(real_levels, out.beta).probs;

    // Candidate search around the continuous maximizer.  For a separable
    // convex objective with the two equality rows (counts, energies) the
    // largest constraint subdeterminant is the level span, so every integer
    // optimum lies within L * span of the unique continuous optimum; a
    // pruned enumeration over that box is exact and stays cheap even for
    // large N.
    const long radius = static_cast<long>(L) * (lv.levels.back() - lv.levels.front());
    std::vector<long> lo(L), hi(L);
    for (int i = 0; i < L; ++i) {
        const double x = out.nu_real[i];
        lo[i] = std::max<long>(0, static_cast<long>(std::ceil(x)) - radius);
        hi[i] = std::min<long>(N, static_cast<long>(std::floor(x)) + radius);
    }
    // Suffix bounds for pruning on the remaining count and energy.
    std::vector<long> lo_n(L + 1, 0), hi_n(L + 1, 0), lo_e(L + 1, 0), hi_e(L + 1, 0);
    for (int i = L - 1; i >= 0; --i) {
        lo_n[i] = lo_n[i + 1] + lo[i];
        hi_n[i] = hi_n[i + 1] + hi[i];
        lo_e[i] = lo_e[i + 1] + lo[i] * lv.levels[i];
        hi_e[i] = hi_e[i + 1] + hi[i] * lv.levels[i];
    }
    std::vector<long> cur(L, 0), best;
    double best_w = -std::numeric_limits<double>::infinity();
    const auto rec = [&](auto&& self, int i, long rem, long e_rem) -> void {
        if (rem < lo_n[i] || rem > hi_n[i]) return;
        if (i == L) {
            if (e_rem != 0) return;
            const double w = log_multinomial_weight(VisitConfiguration::from(lv, cur));
            if (w > best_w + 1e-9 ||
                (std::abs(w - best_w) <= 1e-9 && (best.empty() || cur < best))) {
                best = cur;
                best_w = w;
            }
            return;
        }
        for (long v = lo[i]; v <= std::min(hi[i], rem); ++v) {
            const long e_next = e_rem - v * lv.levels[i];
            const long rem_next = rem - v;
            // The suffix must be able to absorb exactly (rem_next, e_next).
            if (e_next < rem_next * lv.levels[i + 1 < L ? i + 1 : i]) continue;
            if (e_next > rem_next * lv.levels[L - 1]) break;
            cur[i] = v;
            self(self, i + 1, rem_next, e_next);
        }
        cur[i] = 0;
    };
    rec(rec, 0, N, E_t);

    if (best.empty())
        throw std::domain_error("no feasible integer configuration exists");
    out.nu_rounded = VisitConfiguration::from(lv, best);
    return out;
}

std::optional<BruteForceResult> brute_force_argmax(const IntegerLevels& lv,
                                                   long N, long E_t) {
    const int L = lv.size();
    if (L > 5 || N > 60)
        throw std::invalid_argument("brute_force_argmax limited to L <= 5, N <= 60");
    if (!feasible_totals(lv, N, E_t)) return std::nullopt;

    std::vector<long> cur(L, 0), best;
    double best_w = -std::numeric_limits<double>::infinity();
    bool tie = false;
    const auto rec = [&](auto&& self, int i, long rem, long e_rem) -> void {
        if (i == L - 1) {
            if (e_rem != rem * lv.levels[L - 1]) return;
            cur[L - 1] = rem;
            const double w = log_multinomial_weight(VisitConfiguration::from(lv, cur));
            if (w > best_w + 1e-9) {
                best = cur;
                best_w = w;
                tie = false;
            } else if (std::abs(w - best_w) <= 1e-9 && !best.empty()) {
                tie = true;
                if (cur < best) best = cur;
            }
            return;
        }
        // Prune: the remaining levels must be able to absorb e_rem.
        for (long v = 0; v <= rem; ++v) {
            const long e_next = e_rem - v * lv.levels[i];
            const long rem_next = rem - v;
            if (e_next < rem_next * lv.levels[i + 1]) continue;
            if (e_next > rem_next * lv.levels[L - 1]) break;
            cur[i] = v;
            self(self, i + 1, rem_next, e_next);
        }
        cur[i] = 0;
    };
    rec(rec, 0, N, E_t);
    if (best.empty()) return std::nullopt;
    BruteForceResult res;
    res.argmax = VisitConfiguration::from(lv, best);
    res.log_weight = best_w;
    res.tie = tie;
    return res;
}

ChainResult r_transition_chain(const IntegerLevels& lv, long N, long E_t,
                               const ChainOptions& opts) {
    if (!feasible_totals(lv, N, E_t))
        throw std::domain_error("infeasible (N, E_t) for r_transition_chain");
    if (opts.steps < 10000)
        throw std::invalid_argument("chain needs at least 10^4 steps");
    const int L = lv.size();
    const long burn_in = opts.burn_in >= 0 ? opts.burn_in : opts.steps / 10;

    const std::vector<Move> table = build_move_table(lv);
    const MostProbableVisits start = most_probable_visits(lv, N, E_t);
    std::vector<long> nu = start.nu_rounded.counts;

    ChainResult res;
    res.move_table_size = static_cast<long>(table.size());
    res.freq = RealVector::Zero(L);
    res.std_err = RealVector::Zero(L);

    if (table.empty()) {
        // Frozen by construction.  Acceptable only when the configuration is
        // forced by the constraints; otherwise the chain cannot explore.
        if (L == 2 || start.at_endpoint) {
            for (int i = 0; i < L; ++i)
                res.freq[i] = static_cast<double>(nu[i]) / static_cast<double>(N);
            res.frozen = true;
            res.final_state = VisitConfiguration::from(lv, nu);
            return res;
        }
        throw std::runtime_error(
            "no energy-preserving moves exist (move table size 0); chain frozen");
    }

    CounterRng rng(opts.seed, opts.stream);
    long accepted = 0, applicable = 0;

    const auto step_once = [&]() {
        const Move& m = table[rng.next_below(table.size())];
        // Applicability: enough visits at the source levels.
        if (m.a == m.b ? nu[m.a] < 2 : (nu[m.a] < 1 || nu[m.b] < 1)) return;
        ++applicable;
        // Delta of ln P from the affected counts.  The four move indices may
        // repeat (a == b or c == d), so deduplicate before summing the
        // factorial terms or the repeated level is counted twice.
        int uniq[4];
        int n_uniq = 0;
        for (int idx : {m.a, m.b, m.c, m.d}) {
            bool seen = false;
            for (int j = 0; j < n_uniq; ++j)
                if (uniq[j] == idx) seen = true;
            if (!seen) uniq[n_uniq++] = idx;
        }
        double dlogp = 0.0;  // ln P(new) - ln P(old), changed terms only
        for (int j = 0; j < n_uniq; ++j) dlogp += log_factorial(nu[uniq[j]]);
        nu[m.a]--;
        nu[m.b]--;
        nu[m.c]++;
        nu[m.d]++;
        for (int j = 0; j < n_uniq; ++j) dlogp -= log_factorial(nu[uniq[j]]);
        if (std::log(rng.next_double() + 1e-300) < dlogp) {
            ++accepted;
        } else {
            nu[m.c]--;
            nu[m.d]--;
            nu[m.a]++;
            nu[m.b]++;
        }
    };

    for (long s = 0; s < burn_in; ++s) step_once();

    const int n_batches = opts.n_batches;
    const long batch = opts.steps / n_batches;
    RealMatrix batch_means = RealMatrix::Zero(n_batches, L);
    long step_index = 0;
    for (int b = 0; b < n_batches; ++b) {
        std::vector<long> acc(L, 0);
        for (long s = 0; s < batch; ++s) {
            step_once();
            ++step_index;
            for (int i = 0; i < L; ++i) acc[i] += nu[i];
            if (opts.trace_stride > 0 && step_index % opts.trace_stride == 0) {
                res.trace_steps.push_back(step_index);
                res.trace.push_back(nu);
            }
        }
        for (int i = 0; i < L; ++i)
            batch_means(b, i) = static_cast<double>(acc[i]) /
                                (static_cast<double>(batch) * static_cast<double>(N));
    }

    for (int i = 0; i < L; ++i) {
        res.freq[i] = batch_means.col(i).mean();
        double var = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            const double d = batch_means(b, i) - res.freq[i];
            var += d * d;
        }
        var /= static_cast<double>(n_batches - 1);
        res.std_err[i] = std::sqrt(var / n_batches);
    }
    res.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(opts.steps + burn_in);
    res.frozen = applicable == 0;
    res.final_state = VisitConfiguration::from(lv, nu);
    return res;
}

ChainResult merge_chain_results(const std::vector<ChainResult>& chains) {
    if (chains.empty())
        throw std::invalid_argument("no chains to merge");
    const Eigen::Index L = chains[0].freq.size();
    ChainResult out;
    out.freq = RealVector::Zero(L);
    RealVector var = RealVector::Zero(L);
    const double k = static_cast<double>(chains.size());
    for (const auto& c : chains) {
        out.freq += c.freq;
        var += c.std_err.cwiseProduct(c.std_err);
        out.move_table_size = c.move_table_size;
        out.acceptance_rate += c.acceptance_rate / k;
        out.frozen = out.frozen || c.frozen;
    }
    out.freq /= k;
    out.std_err = (var / (k * k)).cwiseSqrt();
    out.final_state = chains.back().final_state;
    return out;
}

}  // namespace spinsim

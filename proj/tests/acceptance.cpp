// Acceptance suite: one pass/fail line per criterion, non-zero exit if any
// criterion fails.  Reference values for the pinned instances live under
// tests/golden/ and are regenerated with the `oracle` subcommand.
#include "spinsim/decoupling.hpp"
#include "spinsim/dynamics.hpp"
#include "spinsim/ensembles.hpp"
#include "spinsim/experiments.hpp"
#include "spinsim/reference_instances.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/spin_model.hpp"
#include "spinsim/visits.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

using namespace spinsim;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << "  " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << "\n";
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Entropy / free-energy identity and inverse-temperature round trip.

void criterion_1() {
    CounterRng rng(2026, 0);
    double worst_identity = 0.0, worst_roundtrip = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const int L = 2 + static_cast<int>(rng.next_below(15));
        RealVector raw(L);
        for (int k = 0; k < L; ++k) raw[k] = rng.next_double();
        std::sort(raw.data(), raw.data() + L);
        raw[0] = 0.0;
        raw[L - 1] = 1.0;  // unit span keeps the beta map well conditioned
        const EnergyLevels lv = EnergyLevels::from(raw);
        const double beta = 10.0 * rng.next_double() - 5.0;

        const auto [lhs, rhs] = free_energy_identity_check(lv, beta);
        const double identity_err =
            std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
        worst_identity = std::max(worst_identity, identity_err);
        if (identity_err > 1e-12) ok = false;

        const double mean = canonical_mean_energy(lv, beta);
        const double rt = std::abs(beta_from_energy(lv, mean) - beta);
        worst_roundtrip = std::max(worst_roundtrip, rt);
        if (rt > 1e-8) ok = false;
    }
    report(1, "canonical identities over 50 seeded level sets", ok,
           "max identity err " + fmt(worst_identity) + ", max beta err " +
               fmt(worst_roundtrip));
}

// ---------------------------------------------------------------------------
// 2. Most-probable visits equal the exhaustive argmax on a full small grid.

void criterion_2() {
    long instances = 0, mismatches = 0;
    // Every ascending level set over {0..6} that starts at 0, sizes 2..5.
    std::vector<std::vector<long>> sets;
    for (int mask = 0; mask < (1 << 6); ++mask) {
        std::vector<long> s{0};
        for (int b = 0; b < 6; ++b)
            if (mask & (1 << b)) s.push_back(b + 1);
        if (s.size() >= 2 && s.size() <= 5) sets.push_back(s);
    }
    for (const auto& raw : sets) {
        const IntegerLevels lv = IntegerLevels::from(raw);
        for (long N : {10L, 25L, 40L, 60L}) {
            const long lo = N * lv.levels.front();
            const long hi = N * lv.levels.back();
            const long stride = std::max(1L, (hi - lo) / 20);
            for (long e_t = lo; e_t <= hi; e_t += stride) {
                const auto brute = brute_force_argmax(lv, N, e_t);
                if (!brute) continue;
                ++instances;
                const MostProbableVisits mp = most_probable_visits(lv, N, e_t);
                if (mp.nu_rounded.counts != brute->argmax.counts) ++mismatches;
            }
        }
    }
    const bool ok = instances >= 200 && mismatches == 0;
    report(2, "rounded visit maximizer matches brute force", ok,
           std::to_string(instances) + " instances, " +
               std::to_string(mismatches) + " mismatches");
}

// ---------------------------------------------------------------------------
// 3. Stationary visit frequencies of the energy-preserving chain vs the
//    canonical distribution at the matched energy per visit.

void criterion_3() {
    const IntegerLevels lv = IntegerLevels::from({0, 1, 2});
    const long N = 300, E_t = 240;
    const int n_chains = 8;
    std::vector<ChainResult> chains(n_chains);
    parallel_tasks(n_chains, n_chains, [&](int i) {
        ChainOptions opts;
        opts.steps = 1000000;
        opts.seed = 90210;
        opts.stream = static_cast<std::uint64_t>(i);
        chains[static_cast<std::size_t>(i)] = r_transition_chain(lv, N, E_t, opts);
    });
    const ChainResult pooled = merge_chain_results(chains);
    const EnergyLevels real_levels = lv.as_real();
    const CanonicalDistribution canon = canonical_from_beta(
        real_levels, beta_from_energy(real_levels, 0.8));

    // Exact stationary mean: for three levels the constraint shell is the
    // one-parameter family nu = (N - E_t + s, E_t - 2s, s), directly summable.
    Eigen::Vector3d exact_mean = Eigen::Vector3d::Zero();
    {
        double z = 0.0, w_max = -std::numeric_limits<double>::infinity();
        std::vector<std::pair<Eigen::Vector3d, double>> shell;
        for (long s = 0; 2 * s <= E_t; ++s) {
            const Eigen::Vector3d nu(static_cast<double>(N - E_t + s),
                                     static_cast<double>(E_t - 2 * s),
                                     static_cast<double>(s));
            if (nu[0] < 0.0) continue;
            const double lw = log_multinomial_weight(VisitConfiguration::from(
                lv, {N - E_t + s, E_t - 2 * s, s}));
            shell.emplace_back(nu, lw);
            w_max = std::max(w_max, lw);
        }
        for (const auto& [nu, lw] : shell) {
            const double w = std::exp(lw - w_max);
            z += w;
            exact_mean += w * nu;
        }
        exact_mean /= z * static_cast<double>(N);
    }

    bool ok = true;
    double worst_sigma = 0.0, worst_exact_sigma = 0.0, bias = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double diff = std::abs(pooled.freq[k] - canon.probs[k]);
        const double se = pooled.std_err[k];
        if (se > 0.01) ok = false;
        worst_sigma = std::max(worst_sigma, se > 0.0 ? diff / se : 0.0);
        if (diff > 4.0 * se) ok = false;
        if (se > 0.0)
            worst_exact_sigma =
                std::max(worst_exact_sigma,
                         std::abs(pooled.freq[k] - exact_mean[k]) / se);
        bias = std::max(bias, std::abs(exact_mean[k] - canon.probs[k]));
    }
    report(3, "chain frequencies within 4 pooled errors of canonical", ok,
           "worst deviation " + fmt(worst_sigma) + " sigma, max SE " +
               fmt(pooled.std_err.maxCoeff()) + "; vs exact stationary mean " +
               fmt(worst_exact_sigma) + " sigma, finite-size offset " +
               fmt(bias));
}

// ---------------------------------------------------------------------------
// 4. Flat fixed-energy population ensemble: sampler matches the exact
//    centroid and departs measurably from the canonical distribution.

void criterion_4() {
    const EnergyLevels lv =
        EnergyLevels::from((RealVector(3) << 0.0, 1.0, 2.0).finished());
    const double e_target = 0.8;
    const int n_chains = 4;
    std::vector<GqmeSampleStats> chains(n_chains);
    parallel_tasks(n_chains, n_chains, [&](int i) {
        GqmeOptions opts;
        opts.n_samples = 25000;
        opts.seed = 4242;
        opts.stream = static_cast<std::uint64_t>(i);
        chains[static_cast<std::size_t>(i)] = gqme_sample(lv, e_target, opts);
    });
    const GqmeSampleStats stats = merge_gqme_stats(chains);
    const RealVector exact = gqme_exact_small(lv, e_target);
    const CanonicalDistribution canon =
        canonical_from_beta(lv, beta_from_energy(lv, e_target));

    bool ok = true;
    double worst_sigma = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double diff = std::abs(stats.mean_p[k] - exact[k]);
        if (diff > 4.0 * stats.std_err[k]) ok = false;
        worst_sigma =
            std::max(worst_sigma,
                     stats.std_err[k] > 0.0 ? diff / stats.std_err[k] : 0.0);
    }
    double departure = 0.0;
    for (int k = 0; k < 3; ++k)
        departure = std::max(departure, std::abs(stats.mean_p[k] - canon.probs[k]));
    const double max_se = stats.std_err.maxCoeff();
    if (!(departure > 10.0 * max_se)) ok = false;
    report(4, "flat-ensemble mean exact within errors, departs from canonical",
           ok,
           "sampler vs exact " + fmt(worst_sigma) + " sigma, departure " +
               fmt(departure) + " vs 10 SE = " + fmt(10.0 * max_se));
}

// ---------------------------------------------------------------------------
// 5. Population conservation and windowed-average error bound on seeded
//    4-to-6-spin instances.

void criterion_5() {
    bool ok = true;
    double worst_drift = 0.0, worst_excess = -1e300;
    for (int k = 0; k < 20; ++k) {
        const int n = 4 + k % 3;
        const SpinSystem sys = random_spin_system(n, 0.5, 1.0, 1300 + k);
        const HermitianOperator H = build_hamiltonian(sys);
        const Eigensystem eig = diagonalize(H);
        const HermitianOperator A =
            to_energy_basis(collective_observable(sys, Axis::X), eig);

        CounterRng rng(7000 + k, 0);
        ComplexVector v(sys.dim());
        for (int i = 0; i < sys.dim(); ++i)
            v[i] = Complex(rng.next_normal(), rng.next_normal());
        const SpectralAmplitudes c =
            to_spectral(PureState::from(std::move(v)), eig);

        for (double t : {250.0, 1000.0}) {
            const SpectralAmplitudes ct = evolve_pure(c, t);
            for (int i = 0; i < sys.dim(); ++i) {
                const double d = std::abs(std::norm(ct.c[i]) - std::norm(c.c[i]));
                worst_drift = std::max(worst_drift, d);
                if (d > 1e-12) ok = false;
            }
        }

        const WindowedAverage w = windowed_time_average(c, A, 200.0, 20000);
        const double target = diagonal_ensemble(c, A) + degenerate_cross_sum(c, A);
        const double excess = std::abs(w.mean - target) - w.bound;
        worst_excess = std::max(worst_excess, excess);
        if (excess > 0.0) ok = false;
    }
    report(5, "population drift and windowed-average bound on 20 instances", ok,
           "max drift " + fmt(worst_drift) + ", max (|err| - bound) " +
               fmt(worst_excess));
}

// ---------------------------------------------------------------------------
// 6. Dynamical decoupling: exact CPMG refocusing, zeroth-order cancellation,
//    and the pinned lifetime-extension factor.

nlohmann::json load_golden(const std::string& name) {
    const char* dir = std::getenv("SPINSIM_GOLDEN_DIR");
    if (!dir) throw std::runtime_error("SPINSIM_GOLDEN_DIR not set");
    std::ifstream in(fs::path(dir) / name);
    if (!in) throw std::runtime_error("missing golden file " + name);
    nlohmann::json j;
    in >> j;
    return j;
}

PureState all_plus_x(int n_spins) {
    const int dim = 1 << n_spins;
    ComplexVector v = ComplexVector::Constant(dim, 1.0);
    return PureState::from(std::move(v));
}

void criterion_6() {
    bool ok = true;
    std::string detail;

    // (a) CPMG with zero dipolar couplings: exact echoes.
    {
        const SpinSystem sys = reference_six_spin_zeeman();
        const Eigensystem eig = diagonalize(build_hamiltonian(sys));
        const HermitianOperator jx = collective_observable(sys, Axis::X);
        const PureState psi = all_plus_x(6);
        const double tau = 0.35;
        const int cycles = 20;
        const PulseSequence seq = build_sequence(SequenceKind::CPMG, tau, cycles);
        const CoherenceTrace tr = apply_sequence(psi, eig, seq, jx, 4);
        double worst = 0.0;
        for (int k = 1; k <= cycles; ++k) {
            const double t_echo = 4.0 * tau * k;
            double best = 1e300, value = 0.0;
            for (std::size_t i = 0; i < tr.times.size(); ++i) {
                const double d = std::abs(tr.times[i] - t_echo);
                if (d < best) {
                    best = d;
                    value = tr.values[i];
                }
            }
            worst = std::max(worst, std::abs(value - tr.values.front()));
        }
        if (worst > 1e-9) ok = false;
        detail += "echo err " + fmt(worst);
    }

    // (b) Zeroth-order averages vanish.
    {
        SpinSystem dip = reference_six_spin();
        const HermitianOperator hd = build_hamiltonian(dip);
        SpinSystem zee = reference_six_spin_zeeman();
        const HermitianOperator hz = build_hamiltonian(zee);
        const double wah = max_abs(
            toggling_average(hd, build_sequence(SequenceKind::WAHUHA, 0.1, 1)).mat);
        const double cp = max_abs(
            toggling_average(hz, build_sequence(SequenceKind::CP, 0.1, 1)).mat);
        if (wah > 1e-12 || cp > 1e-12) ok = false;
        detail += ", avg norms " + fmt(wah) + "/" + fmt(cp);
    }

    // (c) Lifetime extension factor, pinned by the golden file.
    try {
        const SpinSystem sys = reference_six_spin();
        const Eigensystem eig = diagonalize(build_hamiltonian(sys));
        const HermitianOperator jx = collective_observable(sys, Axis::X);
        const PureState psi = all_plus_x(6);

        PulseSequence free_seq;
        free_seq.tail_delay = kDdFreeDuration;
        const double t_free = decoherence_time(
            apply_sequence(psi, eig, free_seq, jx, kDdFreeSamples), kDdThreshold);

        const PulseSequence wah =
            build_sequence(SequenceKind::WAHUHA, kDdTau, kDdCycles);
        const CoherenceTrace tr = apply_sequence(psi, eig, wah, jx, 2);
        const double t_wah =
            decoherence_time(stroboscopic(tr, wah.cycle_time()), kDdThreshold);

        const double factor = t_wah / t_free;
        const double golden =
            load_golden("dd.json").at("suppression_factor").get<double>();
        if (!(factor >= 5.0)) ok = false;
        if (!(std::abs(factor - golden) <= 1e-6 * std::max(1.0, golden)))
            ok = false;
        detail += ", factor " + fmt(factor) + " (golden " + fmt(golden) + ")";
    } catch (const std::exception& e) {
        ok = false;
        detail += std::string(", error: ") + e.what();
    }

    report(6, "decoupling suppression (echoes, averages, lifetime factor)", ok,
           detail);
}

// ---------------------------------------------------------------------------
// 7. Time reversal: perfect sign flip recovers the state; a 10% perturbation
//    decays to the golden value.

void criterion_7() {
    bool ok = true;
    std::string detail;
    try {
        const SpinSystem sys = reference_four_spin();
        const HermitianOperator H = build_hamiltonian(sys);
        SpinSystem dip = sys;
        dip.offsets.setZero();
        const HermitianOperator V = build_hamiltonian(dip);
        CounterRng rng(kEchoStateSeed, 0);
        ComplexVector v(sys.dim());
        for (int i = 0; i < sys.dim(); ++i)
            v[i] = Complex(rng.next_normal(), rng.next_normal());
        const PureState psi = PureState::from(std::move(v));

        std::vector<double> times(kEchoPoints);
        for (int i = 0; i < kEchoPoints; ++i)
            times[static_cast<std::size_t>(i)] =
                kEchoTMax * i / (kEchoPoints - 1);

        const auto perfect = loschmidt_echo_curve(psi, H, V, 0.0, times);
        const double min_perfect =
            *std::min_element(perfect.begin(), perfect.end());
        if (min_perfect < 1.0 - 1e-9) ok = false;

        const auto perturbed = loschmidt_echo_curve(psi, H, V, 0.1, times);
        const double final_f = perturbed.back();
        if (!(final_f < 0.99)) ok = false;

        const double golden =
            load_golden("echo.json").at("final_fidelity_eps0.1").get<double>();
        if (std::abs(final_f - golden) > 1e-12) ok = false;
        detail = "min F(eps=0) " + fmt(min_perfect) + ", final F(eps=0.1) " +
                 fmt(final_f) + " (golden " + fmt(golden) + ")";
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("error: ") + e.what();
    }
    report(7, "sign reversal exact; perturbed reversal decays to golden value",
           ok, detail);
}

// ---------------------------------------------------------------------------
// 8. Byte-identical payloads across repeated runs and worker counts.

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void criterion_8() {
    const char* cli = std::getenv("SPINSIM_CLI");
    if (!cli) {
        report(8, "determinism across runs and worker counts", false,
               "SPINSIM_CLI not set");
        return;
    }
    const fs::path root = fs::temp_directory_path() / "spinsim_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    const std::vector<std::pair<std::string, std::string>> configs = {
        {"canonical.ini",
         "experiment = canonical\n[output]\ndirectory = canonical\n"
         "[levels]\nvalues = 0 1 2\n[parameters]\ne_target = 0.8\n"},
        {"gqme.ini",
         "experiment = gqme\nseed = 7\n[output]\ndirectory = gqme\n"
         "[levels]\nvalues = 0 1 2\n[parameters]\ne_target = 0.8\n"
         "n_samples = 4000\nchains = 4\n"},
        {"chain.ini",
         "experiment = chain\nseed = 7\n[output]\ndirectory = chain\n"
         "[levels]\nvalues = 0 1 2\n[parameters]\nn_total = 300\n"
         "e_total = 240\nsteps = 20000\nchains = 4\ntrace_stride = 5000\n"},
        {"dd.ini",
         "experiment = dd\n[output]\ndirectory = dd\n[system]\nn_spins = 4\n"
         "disorder_seed = 601\noffset_scale = 0\ncoupling_scale = 1\n"
         "[parameters]\nsequence = wahuha\ntau = 0.05\nn_cycles = 20\n"
         "samples_per_delay = 2\nthreshold = 0.5\n"},
        {"reverse.ini",
         "experiment = reverse\nseed = 77\n[output]\ndirectory = reverse\n"
         "[system]\nn_spins = 4\ndisorder_seed = 401\noffset_scale = 0.5\n"
         "coupling_scale = 1\n[parameters]\neps = 0 0.1\nt_max = 10\n"
         "t_points = 11\n"},
        {"eth.ini",
         "experiment = eth\nseed = 55\n[output]\ndirectory = eth\n[system]\n"
         "n_spins = 4\ndisorder_seed = 17\noffset_scale = 0.5\n"
         "coupling_scale = 1\n[parameters]\nobservable = z\nt_max = 20\n"
         "t_points = 40\nwindow = 50\nwindow_samples = 500\n"},
    };
    for (const auto& [name, text] : configs) {
        std::ofstream out(root / name);
        out << text;
    }

    bool ok = true;
    std::string detail;
    const auto run_suite = [&](const std::string& label, int workers) {
        const fs::path out_root = root / label;
        fs::create_directories(out_root);
        for (const auto& [name, text] : configs) {
            std::ostringstream cmd;
            cmd << "SPINSIM_OUTPUT_ROOT=" << out_root << " " << cli << " run "
                << (root / name) << " --workers " << workers << " > /dev/null";
            if (std::system(cmd.str().c_str()) != 0) {
                ok = false;
                detail += name + " exited non-zero; ";
            }
        }
        return out_root;
    };
    const fs::path a = run_suite("a", 1);
    const fs::path b = run_suite("b", 1);
    const fs::path c = run_suite("c", 8);

    long compared = 0;
    if (ok) {
        for (const auto& entry : fs::recursive_directory_iterator(a)) {
            if (!entry.is_regular_file()) continue;
            const fs::path rel = fs::relative(entry.path(), a);
            if (rel.filename() == "run_meta.json") continue;  // wall clock only
            ++compared;
            const std::string base = slurp(entry.path());
            if (base != slurp(b / rel)) {
                ok = false;
                detail += "repeat mismatch " + rel.string() + "; ";
            }
            if (base != slurp(c / rel)) {
                ok = false;
                detail += "worker mismatch " + rel.string() + "; ";
            }
        }
        if (compared == 0) {
            ok = false;
            detail += "no payload files produced; ";
        }
    }
    fs::remove_all(root);
    report(8, "determinism across runs and worker counts", ok,
           detail.empty() ? std::to_string(compared) + " payload files identical"
                          : detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures == 0) {
        std::cout << "all acceptance criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " acceptance criteria failed\n";
    return 1;
}

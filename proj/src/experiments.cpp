#include "spinsim/experiments.hpp"

#include "spinsim/decoupling.hpp"
#include "spinsim/dynamics.hpp"
#include "spinsim/ensembles.hpp"
#include "spinsim/reference_instances.hpp"
#include "spinsim/rng.hpp"
#include "spinsim/visits.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

namespace spinsim {

namespace fs = std::filesystem;

void parallel_tasks(int n_tasks, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n_tasks));
    if (workers == 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

SpinSystem system_from_config(const Config& cfg) {
    SpinSystem sys;
    sys.n_spins = static_cast<int>(cfg.get_long("system.n_spins"));
    if (sys.n_spins < 2 || sys.n_spins > 12)
        throw ConfigError("system.n_spins must be in [2, 12]");
    sys.offsets = RealVector::Zero(sys.n_spins);
    sys.couplings = RealMatrix::Zero(sys.n_spins, sys.n_spins);

    const bool explicit_offsets = cfg.has("system.offsets");
    const bool explicit_couplings = cfg.has("system.couplings");
    const bool random = cfg.has("system.disorder_seed");
    if (random == (explicit_offsets || explicit_couplings))
        throw ConfigError(
            "system block needs either explicit offsets/couplings or a disorder_seed");

    if (random) {
        CounterRng rng(cfg.get_u64("system.disorder_seed"), 0);
        const double off_scale = cfg.get_double_or("system.offset_scale", 1.0);
        const double cpl_scale = cfg.get_double_or("system.coupling_scale", 1.0);
        for (int i = 0; i < sys.n_spins; ++i)
            sys.offsets[i] = off_scale * (2.0 * rng.next_double() - 1.0);
        for (int i = 0; i < sys.n_spins; ++i)
            for (int j = i + 1; j < sys.n_spins; ++j) {
                const double b = cpl_scale * (2.0 * rng.next_double() - 1.0);
                sys.couplings(i, j) = sys.couplings(j, i) = b;
            }
    } else {
        const std::vector<double> offs = cfg.get_doubles("system.offsets");
        if (static_cast<int>(offs.size()) != sys.n_spins)
            throw ConfigError("system.offsets length must equal n_spins");
        for (int i = 0; i < sys.n_spins; ++i) sys.offsets[i] = offs[i];
        if (explicit_couplings) {
            // Format: i:j:value triples, whitespace separated.
            std::istringstream in(cfg.get_string("system.couplings"));
            std::string tok;
            while (in >> tok) {
                int i, j;
                double b;
                char c1, c2;
                std::istringstream ts(tok);
                if (!(ts >> i >> c1 >> j >> c2 >> b) || c1 != ':' || c2 != ':')
                    throw ConfigError("bad coupling entry '" + tok +
                                      "', expected i:j:value");
                if (i < 0 || j < 0 || i >= sys.n_spins || j >= sys.n_spins || i == j)
                    throw ConfigError("coupling indices out of range in '" + tok + "'");
                sys.couplings(i, j) = sys.couplings(j, i) = b;
            }
        }
    }
    sys.validate();
    return sys;
}

namespace {

EnergyLevels levels_from_config(const Config& cfg) {
    const std::vector<double> raw = cfg.get_doubles("levels.values");
    RealVector v(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = raw[i];
    return EnergyLevels::from(std::move(v));
}

IntegerLevels integer_levels_from_config(const Config& cfg) {
    return IntegerLevels::from(cfg.get_longs("levels.values"));
}

Axis axis_from_name(const std::string& name) {
    if (name == "x") return Axis::X;
    if (name == "y") return Axis::Y;
    if (name == "z") return Axis::Z;
    throw ConfigError("axis must be x, y or z, got '" + name + "'");
}

std::vector<double> to_std(const RealVector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> index_column(Eigen::Index n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = double(i);
    return out;
}

PureState random_state(int dim, std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed, stream);
    ComplexVector v(dim);
    for (int i = 0; i < dim; ++i)
        v[i] = Complex(rng.next_normal(), rng.next_normal());
    return PureState::from(std::move(v));
}

PureState all_plus_x_state(int n_spins) {
    const int dim = 1 << n_spins;
    ComplexVector v = ComplexVector::Constant(dim, std::pow(2.0, -0.5 * n_spins));
    return PureState::from(std::move(v));
}

ResultRecord experiment_canonical(const Config& cfg) {
    const EnergyLevels lv = levels_from_config(cfg);
    double beta;
    if (cfg.has("parameters.beta")) {
        beta = cfg.get_double("parameters.beta");
        if (cfg.has("parameters.e_target"))
            throw ConfigError("give parameters.beta or parameters.e_target, not both");
    } else {
        beta = beta_from_energy(lv, cfg.get_double("parameters.e_target"));
    }
    const CanonicalDistribution dist = canonical_from_beta(lv, beta);
    const auto [lhs, rhs] = free_energy_identity_check(lv, beta);

    ResultRecord rec;
    Table t{.name = "distribution"};
    t.add_column("index", index_column(lv.size()));
    t.add_column("energy", to_std(lv.levels));
    t.add_column("probability", to_std(dist.probs), /*is_probability=*/true);
    rec.tables.push_back(std::move(t));
    rec.add_scalar("beta", beta);
    rec.add_scalar("log_z", dist.log_z);
    rec.add_scalar("mean_energy", dist.mean_energy(lv));
    rec.add_scalar("entropy", lhs);
    rec.add_scalar("free_energy_identity_residual", std::abs(lhs - rhs));
    return rec;
}

ResultRecord experiment_gqme(const Config& cfg, const RunOptions& run) {
    const EnergyLevels lv = levels_from_config(cfg);
    const double e_target = cfg.get_double("parameters.e_target");
    GqmeOptions base;
    base.seed = cfg.get_u64("seed");
    base.n_samples = cfg.get_long_or("parameters.n_samples", 10000);
    base.burn_in = cfg.get_long_or("parameters.burn_in", 1000);
    base.thinning = cfg.get_long_or("parameters.thinning", 10);
    const int n_chains = static_cast<int>(cfg.get_long_or("parameters.chains", 4));
    if (n_chains < 1) throw ConfigError("parameters.chains must be positive");

    std::vector<GqmeSampleStats> chains(n_chains);
    parallel_tasks(n_chains, run.workers, [&](int i) {
        GqmeOptions opts = base;
        opts.stream = static_cast<std::uint64_t>(i);
        chains[static_cast<std::size_t>(i)] = gqme_sample(lv, e_target, opts);
    });
    const GqmeSampleStats stats = merge_gqme_stats(chains);
    const CanonicalDistribution canon =
        canonical_from_beta(lv, beta_from_energy(lv, e_target));

    ResultRecord rec;
    Table t{.name = "gqme"};
    t.add_column("index", index_column(lv.size()));
    t.add_column("energy", to_std(lv.levels));
    t.add_column("mean_p", to_std(stats.mean_p));
    t.add_column("std_err", to_std(stats.std_err));
    t.add_column("canonical", to_std(canon.probs), /*is_probability=*/true);
    if (lv.size() <= 4)
        t.add_column("exact_mean_p", to_std(gqme_exact_small(lv, e_target)));
    rec.tables.push_back(std::move(t));

    double max_dep = 0.0, max_dep_se = 0.0;
    for (Eigen::Index i = 0; i < stats.mean_p.size(); ++i) {
        const double d = std::abs(stats.mean_p[i] - canon.probs[i]);
        if (d > max_dep) {
            max_dep = d;
            max_dep_se = stats.std_err[i];
        }
    }
    rec.add_scalar("energy_target", e_target);
    rec.add_scalar("beta_matched", canon.beta);
    rec.add_scalar("n_samples", static_cast<double>(stats.n_samples));
    rec.add_scalar("min_ess", stats.min_ess);
    rec.add_scalar("low_ess_warning", stats.low_ess_warning ? 1.0 : 0.0);
    rec.add_scalar("max_departure_from_canonical", max_dep, max_dep_se);
    rec.add_note("measure",
                 "flat (Lebesgue) measure on the population polytope "
                 "{p >= 0, sum p = 1, sum p E = E_target}; phases ignored. "
                 "The invariant measure behind equal-probability fixed-energy "
                 "ensembles is not uniquely determined; this is the simplest "
                 "faithful choice and the canonical-vs-flat discrepancy is "
                 "robust to it.");
    return rec;
}

ResultRecord experiment_visits(const Config& cfg) {
    const IntegerLevels lv = integer_levels_from_config(cfg);
    const long n_total = cfg.get_long("parameters.n_total");
    const long e_total = cfg.get_long("parameters.e_total");
    const MostProbableVisits mp = most_probable_visits(lv, n_total, e_total);

    ResultRecord rec;
    Table t{.name = "visits"};
    t.add_column("index", index_column(lv.size()));
    std::vector<double> energies, rounded;
    for (int i = 0; i < lv.size(); ++i) {
        energies.push_back(static_cast<double>(lv.levels[i]));
        rounded.push_back(static_cast<double>(mp.nu_rounded.counts[i]));
    }
    t.add_column("energy", energies);
    t.add_column("nu_real", to_std(mp.nu_real));
    t.add_column("nu_rounded", rounded);
    rec.tables.push_back(std::move(t));
    rec.add_scalar("beta", mp.beta);
    rec.add_scalar("log_weight", log_multinomial_weight(mp.nu_rounded));
    if (lv.size() <= 5 && n_total <= 60) {
        const auto bf = brute_force_argmax(lv, n_total, e_total);
        rec.add_scalar("matches_brute_force",
                       bf && bf->argmax.counts == mp.nu_rounded.counts ? 1.0 : 0.0);
    }
    return rec;
}

ResultRecord experiment_chain(const Config& cfg, const RunOptions& run) {
    const IntegerLevels lv = integer_levels_from_config(cfg);
    const long n_total = cfg.get_long("parameters.n_total");
    const long e_total = cfg.get_long("parameters.e_total");
    ChainOptions base;
    base.seed = cfg.get_u64("seed");
    base.steps = cfg.get_long_or("parameters.steps", 1000000);
    base.burn_in = cfg.get_long_or("parameters.burn_in", -1);
    base.trace_stride = cfg.get_long_or("parameters.trace_stride", 0);
    const int n_chains = static_cast<int>(cfg.get_long_or("parameters.chains", 8));
    if (n_chains < 1) throw ConfigError("parameters.chains must be positive");

    std::vector<ChainResult> chains(n_chains);
    parallel_tasks(n_chains, run.workers, [&](int i) {
        ChainOptions opts = base;
        opts.stream = static_cast<std::uint64_t>(i);
        if (i != 0) opts.trace_stride = 0;  // trace only the first chain
        chains[static_cast<std::size_t>(i)] = r_transition_chain(lv, n_total, e_total, opts);
    });
    const ChainResult pooled = merge_chain_results(chains);
    const CanonicalDistribution canon = canonical_from_beta(
        lv.as_real(),
        beta_from_energy(lv.as_real(),
                         static_cast<double>(e_total) / static_cast<double>(n_total)));

    ResultRecord rec;
    Table t{.name = "chain"};
    t.add_column("index", index_column(lv.size()));
    std::vector<double> energies;
    for (long e : lv.levels) energies.push_back(static_cast<double>(e));
    t.add_column("energy", energies);
    t.add_column("freq", to_std(pooled.freq));
    t.add_column("std_err", to_std(pooled.std_err));
    t.add_column("canonical", to_std(canon.probs), /*is_probability=*/true);
    rec.tables.push_back(std::move(t));

    if (base.trace_stride > 0) {
        Table tr{.name = "chain_trace"};
        std::vector<double> steps;
        for (long s : chains[0].trace_steps) steps.push_back(static_cast<double>(s));
        tr.add_column("step", steps);
        for (int i = 0; i < lv.size(); ++i) {
            std::vector<double> col;
            for (const auto& state : chains[0].trace)
                col.push_back(static_cast<double>(state[static_cast<std::size_t>(i)]));
            tr.add_column("nu_" + std::to_string(i), col);
        }
        rec.tables.push_back(std::move(tr));
    }

    double max_dev = 0.0;
    for (Eigen::Index i = 0; i < pooled.freq.size(); ++i)
        max_dev = std::max(max_dev, std::abs(pooled.freq[i] - canon.probs[i]));
    rec.add_scalar("max_deviation_from_canonical", max_dev,
                   pooled.std_err.maxCoeff());
    rec.add_scalar("acceptance_rate", pooled.acceptance_rate);
    rec.add_scalar("move_table_size", static_cast<double>(pooled.move_table_size));
    rec.add_scalar("frozen", pooled.frozen ? 1.0 : 0.0);
    rec.add_note("stationary_law",
                 "Metropolis stand-in: uniform proposals over the "
                 "energy-preserving move table with multinomial-weight "
                 "acceptance.  The underlying relaxation transitions fix only "
                 "the stationary combinatorics, not the rates; this chain is "
                 "the minimal choice with the same most-likely region.");
    return rec;
}

ResultRecord experiment_dd(const Config& cfg) {
    const SpinSystem sys = system_from_config(cfg);
    const HermitianOperator H = build_hamiltonian(sys);
    const Eigensystem eig = diagonalize(H);
    const Axis axis =
        axis_from_name(cfg.get_string_or("parameters.observable", "x"));
    const HermitianOperator obs = collective_observable(sys, axis);
    const double tau = cfg.get_double("parameters.tau");
    const int n_cycles = static_cast<int>(cfg.get_long_or("parameters.n_cycles", 10));
    const int samples = static_cast<int>(cfg.get_long_or("parameters.samples_per_delay", 4));
    const double threshold = cfg.get_double_or("parameters.threshold", 0.5);
    PulseError err;
    err.flip_error = cfg.get_double_or("parameters.flip_error", 0.0);
    err.phase_error = cfg.get_double_or("parameters.phase_error", 0.0);

    const std::string seq_name = cfg.get_string("parameters.sequence");
    PulseSequence seq;
    if (seq_name == "free") {
        seq.tail_delay = tau * n_cycles;
    } else if (seq_name.rfind("file:", 0) == 0) {
        seq = load_sequence_file(seq_name.substr(5), n_cycles);
    } else {
        seq = build_sequence(sequence_kind_from_name(seq_name), tau, n_cycles);
    }

    const PureState psi0 = all_plus_x_state(sys.n_spins);
    const CoherenceTrace trace = apply_sequence(psi0, eig, seq, obs, samples, err);
    const double t_dec = decoherence_time(trace, threshold);

    ResultRecord rec;
    Table t{.name = "trace"};
    t.add_column("t", trace.times);
    t.add_column("value", trace.values);
    std::vector<double> norm;
    for (double v : trace.values) norm.push_back(v / trace.values.front());
    t.add_column("normalized", norm);
    rec.tables.push_back(std::move(t));
    rec.add_scalar("decoherence_time",
                   std::isinf(t_dec) ? -1.0 : t_dec);  // -1 encodes "never crossed"
    rec.add_scalar("cycle_time", seq.cycle_time());
    rec.add_scalar("total_time", seq.total_time());
    rec.add_scalar("n_pulses", static_cast<double>(seq.n_pulses()));
    rec.add_note("boundary",
                 "This simulator is purely unitary: pulse averaging acts on "
                 "the Hamiltonian terms only.  Any decoherence channel outside "
                 "unitary dynamics is out of scope here and cannot appear in "
                 "these traces.");
    return rec;
}

ResultRecord experiment_reverse(const Config& cfg, const RunOptions& run) {
    const SpinSystem sys = system_from_config(cfg);
    const HermitianOperator H = build_hamiltonian(sys);
    // Default perturbation: the dipolar part alone.
    SpinSystem dip = sys;
    dip.offsets.setZero();
    const HermitianOperator V = build_hamiltonian(dip);

    const std::vector<double> eps_grid = cfg.get_doubles("parameters.eps");
    const double t_max = cfg.get_double("parameters.t_max");
    const int t_points = static_cast<int>(cfg.get_long_or("parameters.t_points", 51));
    if (t_points < 2) throw ConfigError("parameters.t_points must be at least 2");
    std::vector<double> times(static_cast<std::size_t>(t_points));
    for (int i = 0; i < t_points; ++i)
        times[static_cast<std::size_t>(i)] = t_max * i / (t_points - 1);

    const PureState psi0 = random_state(sys.dim(), cfg.get_u64("seed"), 0);

    std::vector<std::vector<double>> fidelities(eps_grid.size());
    parallel_tasks(static_cast<int>(eps_grid.size()), run.workers, [&](int i) {
        fidelities[static_cast<std::size_t>(i)] =
            loschmidt_echo_curve(psi0, H, V, eps_grid[static_cast<std::size_t>(i)], times);
    });

    ResultRecord rec;
    Table t{.name = "fidelity"};
    std::vector<double> col_eps, col_t, col_f;
    for (std::size_t e = 0; e < eps_grid.size(); ++e)
        for (std::size_t k = 0; k < times.size(); ++k) {
            col_eps.push_back(eps_grid[e]);
            col_t.push_back(times[k]);
            col_f.push_back(fidelities[e][k]);
        }
    t.add_column("eps", col_eps);
    t.add_column("t", col_t);
    t.add_column("fidelity", col_f);
    rec.tables.push_back(std::move(t));

    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        // Quadratic decay coefficient: least squares of -ln F against t^2.
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double f = fidelities[e][k];
            if (f < 1e-12) continue;
            const double x = times[k] * times[k];
            sxx += x * x;
            sxy += x * (-std::log(f));
        }
        const double curvature = sxx > 0.0 ? sxy / sxx : 0.0;
        std::ostringstream name;
        name << "decay_curvature_eps_" << e;
        rec.add_scalar(name.str(), curvature);
        std::ostringstream fname;
        fname << "final_fidelity_eps_" << e;
        rec.add_scalar(fname.str(), fidelities[e].back());
    }
    return rec;
}

ResultRecord experiment_eth(const Config& cfg) {
    const SpinSystem sys = system_from_config(cfg);
    if (sys.n_spins > 10)
        throw ConfigError("eth experiment limited to n_spins <= 10");
    const HermitianOperator H = build_hamiltonian(sys);
    const Eigensystem eig = diagonalize(H);
    const Axis axis = axis_from_name(cfg.get_string_or("parameters.observable", "z"));
    const HermitianOperator A = collective_observable(sys, axis);
    const HermitianOperator A_e = to_energy_basis(A, eig);

    const PureState psi0 = random_state(sys.dim(), cfg.get_u64("seed"), 0);
    const SpectralAmplitudes c = to_spectral(psi0, eig);

    const double t_max = cfg.get_double_or("parameters.t_max", 50.0);
    const int t_points = static_cast<int>(cfg.get_long_or("parameters.t_points", 200));
    const double window = cfg.get_double_or("parameters.window", 200.0);
    const int window_samples =
        static_cast<int>(cfg.get_long_or("parameters.window_samples", 2000));

    const double diag = diagonal_ensemble(c, A_e);
    const WindowedAverage wavg = windowed_time_average(c, A_e, window, window_samples);

    double energy = 0.0;
    for (Eigen::Index n = 0; n < c.c.size(); ++n)
        energy += std::norm(c.c[n]) * c.levels[n];
    const EnergyLevels lv = EnergyLevels::from(eig.levels);
    const double beta = beta_from_energy(lv, energy);
    const CanonicalDistribution canon = canonical_from_beta(lv, beta);
    double canonical_value = 0.0;
    for (Eigen::Index n = 0; n < canon.probs.size(); ++n)
        canonical_value += canon.probs[n] * A_e.mat(n, n).real();

    ResultRecord rec;
    Table diag_t{.name = "diagonal_elements"};
    diag_t.add_column("energy", to_std(eig.levels));
    std::vector<double> ann;
    for (Eigen::Index n = 0; n < eig.levels.size(); ++n)
        ann.push_back(A_e.mat(n, n).real());
    diag_t.add_column("A_nn", ann);
    rec.tables.push_back(std::move(diag_t));

    // Histogram of |A_nm| off-diagonal magnitudes, 40 fixed-width bins.
    std::vector<double> offdiag;
    for (Eigen::Index n = 0; n < A_e.dim(); ++n)
        for (Eigen::Index m = n + 1; m < A_e.dim(); ++m)
            offdiag.push_back(std::abs(A_e.mat(n, m)));
    const double max_off =
        offdiag.empty() ? 1.0 : *std::max_element(offdiag.begin(), offdiag.end());
    const double bin_width = max_off > 0.0 ? max_off / 40.0 : 1.0;
    std::vector<double> centers(40), counts(40, 0.0);
    for (int b = 0; b < 40; ++b) centers[static_cast<std::size_t>(b)] = (b + 0.5) * bin_width;
    for (double v : offdiag) {
        int b = std::min(39, static_cast<int>(v / bin_width));
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    Table hist{.name = "offdiag_histogram"};
    hist.add_column("bin_center", centers);
    hist.add_column("count", counts);
    rec.tables.push_back(std::move(hist));

    Table trace{.name = "time_trace"};
    std::vector<double> ts, vals, devs;
    for (int k = 0; k < t_points; ++k) {
        const double t = t_max * k / (t_points - 1);
        const double v = expectation(c, A_e, t);
        ts.push_back(t);
        vals.push_back(v);
        devs.push_back(std::abs(v - diag));
    }
    trace.add_column("t", ts);
    trace.add_column("value", vals);
    trace.add_column("abs_deviation_from_diagonal", devs);
    rec.tables.push_back(std::move(trace));

    rec.add_scalar("state_energy", energy);
    rec.add_scalar("beta_matched", beta);
    rec.add_scalar("diagonal_ensemble", diag);
    rec.add_scalar("canonical_value", canonical_value);
    rec.add_scalar("thermalization_gap", diag - canonical_value);
    rec.add_scalar("windowed_mean", wavg.mean);
    rec.add_scalar("windowed_bound", wavg.bound);
    return rec;
}

std::string output_directory(const Config& cfg, const RunOptions& run) {
    const std::string dir = cfg.get_string("output.directory");
    const std::string formats = cfg.get_string_or("output.formats", "csv json");
    std::istringstream in(formats);
    std::string tok;
    while (in >> tok)
        if (tok != "csv" && tok != "json")
            throw ConfigError("output.formats entries must be csv or json");
    fs::path p(dir);
    if (p.is_relative() && !run.output_root.empty()) p = fs::path(run.output_root) / p;
    return p.string();
}

ResultRecord dispatch(const Config& cfg, const RunOptions& run) {
    const std::string name = cfg.get_string("experiment");
    // Stochastic experiments must carry an explicit seed.
    if (name == "gqme" || name == "chain" || name == "reverse" || name == "eth")
        (void)cfg.get_u64("seed");
    else
        (void)cfg.get_string_or("seed", "0");

    ResultRecord rec;
    if (name == "canonical")
        rec = experiment_canonical(cfg);
    else if (name == "gqme")
        rec = experiment_gqme(cfg, run);
    else if (name == "visits")
        rec = experiment_visits(cfg);
    else if (name == "chain")
        rec = experiment_chain(cfg, run);
    else if (name == "dd")
        rec = experiment_dd(cfg);
    else if (name == "reverse")
        rec = experiment_reverse(cfg, run);
    else if (name == "eth")
        rec = experiment_eth(cfg);
    else
        throw ConfigError("unknown experiment '" + name + "'");
    return rec;
}

}  // namespace

namespace {

const std::vector<std::string>& allowed_keys(const std::string& experiment) {
    static const std::vector<std::string> common = {
        "experiment", "seed", "output.directory", "output.formats"};
    static const std::map<std::string, std::vector<std::string>> per_experiment = {
        {"canonical", {"levels.values", "parameters.beta", "parameters.e_target"}},
        {"gqme",
         {"levels.values", "parameters.e_target", "parameters.n_samples",
          "parameters.burn_in", "parameters.thinning", "parameters.chains"}},
        {"visits", {"levels.values", "parameters.n_total", "parameters.e_total"}},
        {"chain",
         {"levels.values", "parameters.n_total", "parameters.e_total",
          "parameters.steps", "parameters.burn_in", "parameters.chains",
          "parameters.trace_stride"}},
        {"dd",
         {"system.n_spins", "system.offsets", "system.couplings",
          "system.disorder_seed", "system.offset_scale", "system.coupling_scale",
          "parameters.sequence", "parameters.tau", "parameters.n_cycles",
          "parameters.samples_per_delay", "parameters.threshold",
          "parameters.observable", "parameters.flip_error",
          "parameters.phase_error"}},
        {"reverse",
         {"system.n_spins", "system.offsets", "system.couplings",
          "system.disorder_seed", "system.offset_scale", "system.coupling_scale",
          "parameters.eps", "parameters.t_max", "parameters.t_points"}},
        {"eth",
         {"system.n_spins", "system.offsets", "system.couplings",
          "system.disorder_seed", "system.offset_scale", "system.coupling_scale",
          "parameters.observable", "parameters.t_max", "parameters.t_points",
          "parameters.window", "parameters.window_samples"}},
    };
    const auto it = per_experiment.find(experiment);
    if (it == per_experiment.end())
        throw ConfigError("unknown experiment '" + experiment + "'");
    static thread_local std::vector<std::string> merged;
    merged = common;
    merged.insert(merged.end(), it->second.begin(), it->second.end());
    return merged;
}

const std::vector<std::string> kRequiredKeys = {"experiment", "output.directory"};

}  // namespace

void validate_config(const Config& cfg) {
    for (const auto& key : kRequiredKeys)
        if (!cfg.has(key))
            throw ConfigError("missing required key '" + key + "'");
    const std::string name = cfg.get_string("experiment");
    const auto& allowed = allowed_keys(name);
    for (const auto& [key, value] : cfg.entries())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "'");
}

ResultRecord run_experiment(const Config& cfg, const RunOptions& run) {
    return dispatch(cfg, run);
}

std::string run_and_write(const Config& cfg, const RunOptions& run) {
    validate_config(cfg);
    const std::string dir = output_directory(cfg, run);
    ResultRecord rec = dispatch(cfg, run);
    cfg.check_consumed();
    write_result(dir, rec, cfg);
    return dir;
}

namespace {

nlohmann::ordered_json oracle_gqme() {
    const EnergyLevels lv = EnergyLevels::from((RealVector(3) << 0, 1, 2).finished());
    nlohmann::ordered_json j;
    j["levels"] = {0, 1, 2};
    const RealVector exact08 = gqme_exact_small(lv, 0.8);
    const RealVector exact10 = gqme_exact_small(lv, 1.0);
    const CanonicalDistribution canon = canonical_from_beta(lv, beta_from_energy(lv, 0.8));
    j["exact_mean_p_E0.8"] = {exact08[0], exact08[1], exact08[2]};
    j["exact_mean_p_E1.0"] = {exact10[0], exact10[1], exact10[2]};
    j["canonical_E0.8"] = {canon.probs[0], canon.probs[1], canon.probs[2]};
    double dep = 0.0;
    for (int i = 0; i < 3; ++i)
        dep = std::max(dep, std::abs(exact08[i] - canon.probs[i]));
    j["max_departure_E0.8"] = dep;
    return j;
}

nlohmann::ordered_json oracle_visits() {
    const IntegerLevels lv = IntegerLevels::from({0, 1, 2});
    nlohmann::ordered_json j;
    const auto big = brute_force_argmax(lv, 30, 24);
    j["argmax_N30_E24"] = big->argmax.counts;
    j["tie_N30_E24"] = big->tie;
    const auto small = brute_force_argmax(lv, 6, 6);
    j["argmax_N6_E6"] = small->argmax.counts;
    j["beta_E0.8"] = beta_from_energy(lv.as_real(), 0.8);
    return j;
}

nlohmann::ordered_json oracle_dd() {
    const SpinSystem sys = reference_six_spin();
    const HermitianOperator H = build_hamiltonian(sys);
    const Eigensystem eig = diagonalize(H);
    const HermitianOperator obs = collective_observable(sys, Axis::X);
    const PureState psi0 = all_plus_x_state(sys.n_spins);

    PulseSequence free_seq;
    free_seq.tail_delay = kDdFreeDuration;
    const CoherenceTrace free_trace =
        apply_sequence(psi0, eig, free_seq, obs, kDdFreeSamples);
    const double t_free = decoherence_time(free_trace, kDdThreshold);

    const auto wahuha_time = [&](double tau, int cycles) {
        const PulseSequence seq = build_sequence(SequenceKind::WAHUHA, tau, cycles);
        // The cycle rotates the state on purpose between pulses; lifetime is
        // judged at cycle boundaries.  samples_per_delay = 2 puts a sample on
        // every boundary (they sit mid-way through merged 2 tau segments).
        const CoherenceTrace tr = apply_sequence(psi0, eig, seq, obs, 2);
        return decoherence_time(stroboscopic(tr, seq.cycle_time()), kDdThreshold);
    };
    const double t_wahuha = wahuha_time(kDdTau, kDdCycles);
    const double t_wahuha_half = wahuha_time(kDdTau / 2.0, 2 * kDdCycles);

    nlohmann::ordered_json j;
    j["t_free"] = t_free;
    j["t_wahuha"] = t_wahuha;
    j["t_wahuha_half_tc"] = t_wahuha_half;
    j["suppression_factor"] = t_wahuha / t_free;
    j["tau"] = kDdTau;
    j["n_cycles"] = kDdCycles;
    j["threshold"] = kDdThreshold;
    return j;
}

nlohmann::ordered_json oracle_echo() {
    const SpinSystem sys = reference_four_spin();
    const HermitianOperator H = build_hamiltonian(sys);
    SpinSystem dip = sys;
    dip.offsets.setZero();
    const HermitianOperator V = build_hamiltonian(dip);
    const PureState psi0 = random_state(sys.dim(), kEchoStateSeed, 0);
    std::vector<double> times(kEchoPoints);
    for (int i = 0; i < kEchoPoints; ++i)
        times[static_cast<std::size_t>(i)] = kEchoTMax * i / (kEchoPoints - 1);
    nlohmann::ordered_json j;
    const auto perfect = loschmidt_echo_curve(psi0, H, V, 0.0, times);
    const auto perturbed = loschmidt_echo_curve(psi0, H, V, 0.1, times);
    j["min_fidelity_eps0"] = *std::min_element(perfect.begin(), perfect.end());
    j["final_fidelity_eps0.1"] = perturbed.back();
    j["t_max"] = kEchoTMax;
    j["state_seed"] = kEchoStateSeed;
    return j;
}

}  // namespace

std::string run_oracle(const std::string& name) {
    nlohmann::ordered_json j;
    if (name == "gqme")
        j = oracle_gqme();
    else if (name == "visits")
        j = oracle_visits();
    else if (name == "dd")
        j = oracle_dd();
    else if (name == "echo")
        j = oracle_echo();
    else if (name == "all") {
        j["gqme"] = oracle_gqme();
        j["visits"] = oracle_visits();
        j["dd"] = oracle_dd();
        j["echo"] = oracle_echo();
    } else {
        throw ConfigError("unknown oracle '" + name +
                          "'; available: gqme, visits, dd, echo, all");
    }
    return j.dump(2) + "\n";
}

}  // namespace spinsim

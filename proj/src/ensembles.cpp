#include "spinsim/ensembles.hpp"

#include "spinsim/rng.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace spinsim {

namespace {

void require_interior_target(const EnergyLevels& lv, double E_target) {
    if (!(E_target > lv.min() && E_target < lv.max())) {
        std::ostringstream msg;
        msg << "target energy " << E_target
            << " must lie strictly inside (" << lv.min() << ", " << lv.max()
            << ")";
        throw std::domain_error(msg.str());
    }
}

}  // namespace

EnergyLevels EnergyLevels::from(RealVector v) {
    if (v.size() < 2)
        throw std::invalid_argument("need at least two energy levels");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw std::invalid_argument("energy levels must be finite");
        if (i > 0 && v[i] < v[i - 1])
            throw std::invalid_argument("energy levels must be ascending");
    }
    return EnergyLevels{std::move(v)};
}

CanonicalDistribution canonical_from_beta(const EnergyLevels& lv, double beta) {
    if (!std::isfinite(beta))
        throw std::invalid_argument("beta must be finite");
    const Eigen::Index n = lv.levels.size();
    // Shift by the dominant level so the largest weight is exactly 1.
    const double ref = beta >= 0.0 ? lv.min() : lv.max();
    RealVector w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w[i] = std::exp(-beta * (lv.levels[i] - ref));
    const double z_shifted = w.sum();
    CanonicalDistribution dist;
    dist.beta = beta;
    dist.probs = w / z_shifted;
    dist.log_z = std::log(z_shifted) - beta * ref;
    return dist;
}

double canonical_mean_energy(const EnergyLevels& lv, double beta) {
    return canonical_from_beta(lv, beta).probs.dot(lv.levels);
}

double beta_from_energy(const EnergyLevels& lv, double E_target) {
    require_interior_target(lv, E_target);
    const double span = lv.span();
    if (span == 0.0)
        throw std::domain_error("levels are all equal; beta is undefined");

    // <E>(beta) is strictly decreasing; expand the bracket until it straddles.
    double lo = -1.0 / span, hi = 1.0 / span;
    while (canonical_mean_energy(lv, lo) < E_target) lo *= 2.0;
    while (canonical_mean_energy(lv, hi) > E_target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi));
         ++it) {
        const double mid = 0.5 * (lo + hi);
        if (canonical_mean_energy(lv, mid) > E_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double entropy(const RealVector& probs) {
    double sum = 0.0, s = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (p < 0.0)
            throw std::invalid_argument("negative probability in entropy()");
        sum += p;
        if (p > 0.0) s -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("probabilities must sum to 1");
    return s;
}

std::pair<double, double> free_energy_identity_check(const EnergyLevels& lv,
                                                     double beta) {
    const CanonicalDistribution dist = canonical_from_beta(lv, beta);
    const double lhs = entropy(dist.probs);
    const double rhs = beta * dist.mean_energy(lv) + dist.log_z;
    return {lhs, rhs};
}

namespace {

/// Orthonormal basis of the null space of [1...1; E...E], dimension L-2.
RealMatrix constraint_null_space(const EnergyLevels& lv) {
    const Eigen::Index n = lv.levels.size();
    RealMatrix c(n, 2);
    c.col(0).setOnes();
    c.col(1) = lv.levels;
    Eigen::HouseholderQR<RealMatrix> qr(c);
    RealMatrix q = qr.householderQ() * RealMatrix::Identity(n, n);
    return q.rightCols(n - 2);
}

/// Least-squares re-projection onto {sum p = 1, sum p E = E_target}.
void reproject(RealVector& p, const EnergyLevels& lv, double E_target) {
    const Eigen::Index n = p.size();
    RealMatrix c(2, n);
    c.row(0).setOnes();
    c.row(1) = lv.levels.transpose();
    Eigen::Vector2d resid(p.sum() - 1.0, p.dot(lv.levels) - E_target);
    Eigen::Matrix2d gram = c * c.transpose();
    p -= c.transpose() * gram.ldlt().solve(resid);
}

}  // namespace

GqmeSampleStats gqme_sample(const EnergyLevels& lv, double E_target,
                            const GqmeOptions& opts) {
    require_interior_target(lv, E_target);
    if (opts.n_samples < 1)
        throw std::invalid_argument("n_samples must be positive");
    const Eigen::Index n = lv.levels.size();

    GqmeSampleStats stats;
    stats.energy_target = E_target;

    if (n == 2) {
        // Two constraints on two unknowns: the polytope is a single point.
        RealVector p(2);
        p[1] = (E_target - lv.levels[0]) / (lv.levels[1] - lv.levels[0]);
        p[0] = 1.0 - p[1];
        stats.mean_p = p;
        stats.std_err = RealVector::Zero(2);
        stats.n_samples = opts.n_samples;
        stats.min_ess = static_cast<double>(opts.n_samples);
        return stats;
    }

    const RealMatrix basis = constraint_null_space(lv);
    CounterRng rng(opts.seed, opts.stream);

    // Interior start: the canonical distribution at matched energy is
    // strictly positive and satisfies both constraints.
    RealVector p = canonical_from_beta(lv, beta_from_energy(lv, E_target)).probs;

    std::vector<RealVector> samples;
    samples.reserve(static_cast<std::size_t>(opts.n_samples));
    const long total_steps = opts.burn_in + opts.n_samples * opts.thinning;
    RealVector dir(n), g(basis.cols());
    for (long step = 0; step < total_steps; ++step) {
        for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = rng.next_normal();
        dir = basis * g;
        const double norm = dir.norm();
        if (norm == 0.0) continue;
        dir /= norm;
        // Chord limits from p_i + t dir_i >= 0.
        double t_lo = -std::numeric_limits<double>::infinity();
        double t_hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (dir[i] > 1e-14)
                t_lo = std::max(t_lo, -p[i] / dir[i]);
            else if (dir[i] < -1e-14)
                t_hi = std::min(t_hi, -p[i] / dir[i]);
        }
        if (!(t_hi > t_lo)) continue;
        // The walk never crosses a face, so the chord brackets 0.
        t_lo = std::min(t_lo, 0.0);
        t_hi = std::max(t_hi, 0.0);
        p += (t_lo + rng.next_double() * (t_hi - t_lo)) * dir;
        for (Eigen::Index i = 0; i < n; ++i) p[i] = std::max(p[i], 0.0);
        reproject(p, lv, E_target);
        if (step >= opts.burn_in && (step - opts.burn_in) % opts.thinning == 0)
            samples.push_back(p);
    }

    const long m = static_cast<long>(samples.size());
    stats.n_samples = m;
    stats.mean_p = RealVector::Zero(n);
    for (const auto& s : samples) stats.mean_p += s;
    stats.mean_p /= static_cast<double>(m);

    // Batch-means standard errors; plain variance for the ESS denominator.
    const int n_batches = static_cast<int>(std::min<long>(32, m));
    const long batch = m / n_batches;
    stats.std_err = RealVector::Zero(n);
    stats.min_ess = static_cast<double>(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        double var_naive = 0.0;
        for (const auto& s : samples)
            var_naive += (s[i] - stats.mean_p[i]) * (s[i] - stats.mean_p[i]);
        var_naive /= static_cast<double>(m - 1);
        double var_bm = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            double bm = 0.0;
            for (long j = b * batch; j < (b + 1) * batch; ++j) bm += samples[j][i];
            bm /= static_cast<double>(batch);
            var_bm += (bm - stats.mean_p[i]) * (bm - stats.mean_p[i]);
        }
        var_bm /= static_cast<double>(n_batches - 1);
        const double se2 = var_bm / n_batches;
        stats.std_err[i] = std::sqrt(se2);
        if (se2 > 0.0)
            stats.min_ess = std::min(stats.min_ess, var_naive / se2);
    }
    stats.low_ess_warning = stats.min_ess < 100.0;
    return stats;
}

RealVector gqme_exact_small(const EnergyLevels& lv, double E_target) {
    require_interior_target(lv, E_target);
    const Eigen::Index n = lv.levels.size();
    if (n > 4)
        throw std::invalid_argument("gqme_exact_small supports at most 4 levels");

    if (n == 2) {
        RealVector p(2);
        p[1] = (E_target - lv.levels[0]) / (lv.levels[1] - lv.levels[0]);
        p[0] = 1.0 - p[1];
        return p;
    }

    const RealMatrix basis = constraint_null_space(lv);
    const RealVector p0 =
        canonical_from_beta(lv, beta_from_energy(lv, E_target)).probs;

    if (n == 3) {
        // Feasible set is a segment; the flat-measure mean is its midpoint.
        const RealVector d = basis.col(0);
        double t_lo = -std::numeric_limits<double>::infinity();
        double t_hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < 3; ++i) {
            if (d[i] > 1e-14)
                t_lo = std::max(t_lo, -p0[i] / d[i]);
            else if (d[i] < -1e-14)
                t_hi = std::min(t_hi, -p0[i] / d[i]);
        }
        return p0 + 0.5 * (t_lo + t_hi) * d;
    }

    // n == 4: the feasible set is a polygon in the 2-D null-space coordinates;
    // the flat-measure mean is its area centroid.  Clip a large box by the
    // four half-planes p0_i + (B g)_i >= 0.
    std::vector<Eigen::Vector2d> poly = {{-1e3, -1e3}, {1e3, -1e3}, {1e3, 1e3}, {-1e3, 1e3}};
    for (Eigen::Index i = 0; i < 4; ++i) {
        const Eigen::Vector2d a(basis(i, 0), basis(i, 1));
        const double b = p0[i];  // constraint: a . g + b >= 0
        std::vector<Eigen::Vector2d> next;
        const std::size_t m = poly.size();
        for (std::size_t k = 0; k < m; ++k) {
            const Eigen::Vector2d& cur = poly[k];
            const Eigen::Vector2d& nxt = poly[(k + 1) % m];
            const double fc = a.dot(cur) + b;
            const double fn = a.dot(nxt) + b;
            if (fc >= 0.0) next.push_back(cur);
            if ((fc >= 0.0) != (fn >= 0.0))
                next.push_back(cur + (fc / (fc - fn)) * (nxt - cur));
        }
        poly.swap(next);
        if (poly.empty())
            throw std::domain_error("feasible polygon is empty");
    }
    double area2 = 0.0;
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Eigen::Vector2d& cur = poly[k];
        const Eigen::Vector2d& nxt = poly[(k + 1) % poly.size()];
        const double cross = cur.x() * nxt.y() - nxt.x() * cur.y();
        area2 += cross;
        centroid += cross * (cur + nxt);
    }
    if (std::abs(area2) < 1e-14) {
        // Degenerate polygon (segment): fall back to the vertex average.
        centroid.setZero();
        for (const auto& v : poly) centroid += v;
        centroid /= static_cast<double>(poly.size());
    } else {
        centroid /= 3.0 * area2;
    }
    return p0 + basis * centroid;
}

GqmeSampleStats merge_gqme_stats(const std::vector<GqmeSampleStats>& chains) {
    if (chains.empty())
        throw std::invalid_argument("no chains to merge");
    GqmeSampleStats out;
    out.energy_target = chains[0].energy_target;
    const Eigen::Index n = chains[0].mean_p.size();
    out.mean_p = RealVector::Zero(n);
    RealVector var = RealVector::Zero(n);
    long total = 0;
    out.min_ess = 0.0;
    for (const auto& c : chains) {
        out.mean_p += static_cast<double>(c.n_samples) * c.mean_p;
        total += c.n_samples;
        out.min_ess += c.min_ess;
    }
    out.mean_p /= static_cast<double>(total);
    for (const auto& c : chains) {
        const double w = static_cast<double>(c.n_samples) / static_cast<double>(total);
        var += (w * w) * c.std_err.cwiseProduct(c.std_err);
    }
    out.std_err = var.cwiseSqrt();
    out.n_samples = total;
    out.low_ess_warning = out.min_ess < 100.0;
    return out;
}

}  // namespace spinsim

#include "pathstab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "pathstab/rng.hpp"

namespace pathstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: size mismatch");
    if (xs.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

struct LinearSolution {
    double a = 0.0;
    double c = 0.0;
    double sse = kInf;
};

// Closed-form least squares of y ~ a * u + c for fixed b, u = exp(b * x).
LinearSolution solve_for_b(std::span<const double> xs, std::span<const double> ys, double b) {
    const auto n = static_cast<double>(xs.size());
    double su = 0.0, suu = 0.0, sy = 0.0, suy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double u = std::exp(b * xs[i]);
        if (!std::isfinite(u)) return {};
        su += u;
        suu += u * u;
        sy += ys[i];
        suy += u * ys[i];
    }
    const double det = n * suu - su * su;
    LinearSolution sol;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, n * suu))) {
        // exp(b*x) effectively constant: intercept-only model
        sol.a = 0.0;
        sol.c = sy / n;
    } else {
        sol.a = (n * suy - su * sy) / det;
        sol.c = (suu * sy - su * suy) / det;
    }
    sol.sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = sol.a * std::exp(b * xs[i]) + sol.c - ys[i];
        sol.sse += r * r;
    }
    return sol;
}

}  // namespace

ExpFit fit_exponential(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
    if (xs.size() < 4) throw std::invalid_argument("fit: need at least 4 points");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("fit: xs must be strictly increasing");
    }

    const double my = mean_of(ys);
    double ss_tot = 0.0;
    for (const double y : ys) ss_tot += (y - my) * (y - my);
    if (ss_tot == 0.0) return ExpFit{0.0, 0.0, my, 0.0, true};

    constexpr double kBLo = -5.0, kBHi = 5.0;
    constexpr int kGridSteps = 2000;
    constexpr double kStep = (kBHi - kBLo) / kGridSteps;

    double best_b = 0.0;
    double best_sse = kInf;
    for (int i = 0; i <= kGridSteps; ++i) {
        const double b = kBLo + kStep * i;
        const double sse = solve_for_b(xs, ys, b).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_b = b;
        }
    }

    // Golden-section refinement around the best grid cell.
    double lo = std::max(kBLo, best_b - kStep);
    double hi = std::min(kBHi, best_b + kStep);
    constexpr double kGolden = 0.6180339887498949;
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = solve_for_b(xs, ys, x1).sse;
    double f2 = solve_for_b(xs, ys, x2).sse;
    while (hi - lo > 1e-6 * std::max(1.0, std::abs(lo) + std::abs(hi))) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = solve_for_b(xs, ys, x1).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = solve_for_b(xs, ys, x2).sse;
        }
    }
    const double b = (lo + hi) / 2.0;
    const auto sol = solve_for_b(xs, ys, b);

    ExpFit fit;
    fit.a = sol.a;
    fit.b = b;
    fit.c = sol.c;
    fit.r_squared = 1.0 - sol.sse / ss_tot;
    return fit;
}

std::vector<std::vector<double>> zscore(const std::vector<std::vector<double>>& rows,
                                        std::span<const std::string> feature_names) {
    if (rows.empty()) throw std::invalid_argument("zscore: no rows");
    const std::size_t dim = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != dim) throw std::invalid_argument("zscore: ragged rows");
    }

    const auto n = static_cast<double>(rows.size());
    std::vector<std::vector<double>> out(rows.size(), std::vector<double>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[j];
        mean /= n;
        double var = 0.0;
        for (const auto& r : rows) var += (r[j] - mean) * (r[j] - mean);
        var /= n;
        if (var == 0.0) {
            const std::string name =
                j < feature_names.size() ? feature_names[j] : "column " + std::to_string(j);
            throw std::invalid_argument("zscore: constant feature \"" + name + "\"");
        }
        const double inv_std = 1.0 / std::sqrt(var);
        for (std::size_t i = 0; i < rows.size(); ++i) out[i][j] = (rows[i][j] - mean) * inv_std;
    }
    return out;
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct SingleRun {
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;
    double wcss = kInf;
};

SingleRun run_kmeans_once(const std::vector<std::vector<double>>& points, std::size_t k,
                          std::mt19937_64& rng) {
    const std::size_t n = points.size();
    const std::size_t dim = points.front().size();

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[static_cast<std::size_t>(u01(rng) * static_cast<double>(n)) % n]);
    std::vector<double> d2(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = kInf;
            for (const auto& c : centroids) best = std::min(best, sq_dist(points[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = u01(rng) * total;
            double cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(u01(rng) * static_cast<double>(n)) % n;
        }
        centroids.push_back(points[pick]);
    }

    std::vector<std::size_t> assign(n, 0);
    std::vector<std::size_t> counts(k, 0);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sq_dist(points[i], centroids[0]);
            std::size_t best_c = 0;
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            if (iter == 0 || assign[i] != best_c) {
                assign[i] = best_c;
                changed = true;
            }
        }

        std::fill(counts.begin(), counts.end(), 0);
        for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[assign[i]]++;
            for (std::size_t j = 0; j < dim; ++j) centroids[assign[i]][j] += points[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                centroids[c][j] /= static_cast<double>(counts[c]);
            }
        }

        // Reseed empty clusters from the point farthest from its centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            double far_d = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] <= 1) continue;  // keep donor clusters non-empty
                const double d = sq_dist(points[i], centroids[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            counts[assign[far_i]]--;
            centroids[c] = points[far_i];
            assign[far_i] = c;
            counts[c] = 1;
            changed = true;
        }
        if (!changed) break;
    }

    SingleRun run;
    run.wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) run.wcss += sq_dist(points[i], centroids[assign[i]]);
    run.assignments = std::move(assign);
    run.centroids = std::move(centroids);
    return run;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (points.size() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
    if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw std::invalid_argument("kmeans: ragged points");
    }
    if (dim == 0) throw std::invalid_argument("kmeans: zero-dimensional points");

    SingleRun best;
    for (std::size_t r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(mix_seed(seed, r + 1));
        SingleRun run = run_kmeans_once(points, k, rng);
        if (run.wcss < best.wcss) best = std::move(run);
    }

    // Canonical labels by first occurrence, independent of seeding order.
    std::vector<std::size_t> relabel(k, k);
    std::size_t next = 0;
    for (const auto a : best.assignments) {
        if (relabel[a] == k) relabel[a] = next++;
    }

    KMeansResult result;
    result.k = k;
    result.wcss = best.wcss;
    result.assignments.resize(best.assignments.size());
    result.centroids.assign(k, {});
    for (std::size_t i = 0; i < best.assignments.size(); ++i) {
        result.assignments[i] = relabel[best.assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (relabel[c] < k) result.centroids[relabel[c]] = std::move(best.centroids[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (result.centroids[c].empty()) result.centroids[c] = std::vector<double>(dim, 0.0);
    }
    return result;
}

std::vector<std::pair<std::size_t, double>> elbow_curve(
    const std::vector<std::vector<double>>& points, std::size_t k_max, std::uint64_t seed,
    std::size_t restarts) {
    if (k_max < 1 || k_max > points.size()) {
        throw std::invalid_argument("elbow: require 1 <= k_max <= |points|");
    }
    std::vector<std::pair<std::size_t, double>> curve;
    curve.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        curve.emplace_back(k, kmeans(points, k, seed, restarts).wcss);
    }
    return curve;
}

}  // namespace pathstab

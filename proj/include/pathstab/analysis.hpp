#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pathstab {

/// Sample Pearson correlation. Throws unless both inputs have the same size
/// >= 2 and nonzero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Least-squares fit of y = a * exp(b * x) + c.
struct ExpFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;  // constant ys: a = 0, b = 0, c = mean
};

/// Coarse grid over b in [-5, 5] with closed-form (a, c) per b, then local
/// refinement of b to relative tolerance 1e-6. Requires >= 4 points with
/// strictly increasing xs.
ExpFit fit_exponential(std::span<const double> xs, std::span<const double> ys);

/// Column-wise standardization to mean 0, population std 1. rows[i] is one
/// observation. Throws on a constant column, naming the feature when names
/// are supplied.
std::vector<std::vector<double>> zscore(const std::vector<std::vector<double>>& rows,
                                        std::span<const std::string> feature_names = {});

struct KMeansResult {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;        // per input point, labels 0..k-1
    std::vector<std::vector<double>> centroids;  // indexed by label
    double wcss = 0.0;
};

/// Best of `restarts` K-means runs (k-means++ seeding, Lloyd iterations to an
/// assignment fixpoint or 300 rounds, empty clusters reseeded from the point
/// farthest from its centroid). Deterministic given (seed, restarts); labels
/// are canonicalized by first occurrence. Throws when points.size() < k.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts = 100);

/// (k, wcss) for k = 1..k_max under the same seed policy as kmeans.
std::vector<std::pair<std::size_t, double>> elbow_curve(
    const std::vector<std::vector<double>>& points, std::size_t k_max, std::uint64_t seed,
    std::size_t restarts = 100);

}  // namespace pathstab

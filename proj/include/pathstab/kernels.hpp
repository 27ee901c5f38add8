#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pathstab/geodesy.hpp"

// Data-parallel inner loops of the spatial queries: squared chord distance
// from one query point to arrays of node unit vectors, stored SoA.
//
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2, a vectorized variant. Both sides use the same per-element operation
// order with FP contraction disabled, so results are bit-identical and the
// dispatched variant never changes query answers. Equivalence is enforced by
// tests/test_kernels.cpp.
//
// Variant selection happens once at startup (CPU detection, overridable via
// the PATHSTAB_SIMD environment variable) and can be changed through
// set_variant(); switching variants while queries run on other threads is
// not supported.

namespace pathstab::kernels {

enum class Variant { scalar, avx2 };

std::string variant_name(Variant v);

/// Variants usable on this machine. Always contains Variant::scalar.
std::vector<Variant> available_variants();

Variant active_variant();

/// Force a specific variant. Throws std::runtime_error if unsupported here.
void set_variant(Variant v);

/// Squared chord distance from q to each of the n points.
void chord_sq_batch(const double* xs, const double* ys, const double* zs, std::size_t n,
                    const UnitVec3& q, double* out);

struct ArgMin {
    double value;
    std::size_t pos;  // first position attaining value; n if the range is empty
};

/// Minimum squared chord distance and the first position attaining it.
ArgMin argmin_chord_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const UnitVec3& q);

/// Append base + i for every i whose squared chord distance lies in [lo, hi].
/// Positions are appended in increasing order.
void collect_in_range(const double* xs, const double* ys, const double* zs, std::size_t n,
                      const UnitVec3& q, double lo, double hi, std::uint32_t base,
                      std::vector<std::uint32_t>& out);

// Scalar reference implementations, always available; the dispatch targets
// above must match them bit for bit.
namespace scalar {
void chord_sq_batch(const double* xs, const double* ys, const double* zs, std::size_t n,
                    const UnitVec3& q, double* out);
ArgMin argmin_chord_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const UnitVec3& q);
void collect_in_range(const double* xs, const double* ys, const double* zs, std::size_t n,
                      const UnitVec3& q, double lo, double hi, std::uint32_t base,
                      std::vector<std::uint32_t>& out);
}  // namespace scalar

}  // namespace pathstab::kernels

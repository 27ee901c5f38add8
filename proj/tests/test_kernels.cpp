#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstring>
#include <random>
#include <vector>

#include "pathstab/geodesy.hpp"
#include "pathstab/kernels.hpp"

using pathstab::UnitVec3;
namespace kernels = pathstab::kernels;

namespace {

struct Soa {
    std::vector<double> xs, ys, zs;
};

Soa random_points(std::mt19937_64& rng, std::size_t n) {
    Soa soa;
    soa.xs.resize(n);
    soa.ys.resize(n);
    soa.zs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lat = -85.0 + static_cast<double>(rng() % 170'000) / 1000.0;
        const double lon = -180.0 + static_cast<double>(rng() % 360'000) / 1000.0;
        const auto v = pathstab::to_unit_vector({lat, lon});
        soa.xs[i] = v.x;
        soa.ys[i] = v.y;
        soa.zs[i] = v.z;
    }
    return soa;
}

UnitVec3 random_query(std::mt19937_64& rng) {
    const double lat = -85.0 + static_cast<double>(rng() % 170'000) / 1000.0;
    const double lon = -180.0 + static_cast<double>(rng() % 360'000) / 1000.0;
    return pathstab::to_unit_vector({lat, lon});
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Restores the previously active variant at scope exit.
struct VariantGuard {
    kernels::Variant saved = kernels::active_variant();
    ~VariantGuard() { kernels::set_variant(saved); }
};

}  // namespace

TEST_CASE("scalar chord_sq_batch matches per-point arithmetic") {
    std::mt19937_64 rng(201);
    const Soa soa = random_points(rng, 257);
    const UnitVec3 q = random_query(rng);
    std::vector<double> out(257);
    kernels::scalar::chord_sq_batch(soa.xs.data(), soa.ys.data(), soa.zs.data(), 257, q,
                                    out.data());
    for (std::size_t i = 0; i < 257; ++i) {
        const double dx = soa.xs[i] - q.x;
        const double dy = soa.ys[i] - q.y;
        const double dz = soa.zs[i] - q.z;
        CHECK(out[i] == dx * dx + dy * dy + dz * dz);
    }
}

TEST_CASE("dispatched kernels are bit-identical to the scalar reference") {
    std::mt19937_64 rng(202);
    VariantGuard guard;
    for (const auto variant : kernels::available_variants()) {
        kernels::set_variant(variant);
        INFO("variant ", kernels::variant_name(variant));
        // Sizes straddling vector width multiples to cover the tail loop.
        for (const std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 32u,
                                    33u, 100u, 1000u, 1003u}) {
            const Soa soa = random_points(rng, n);
            const UnitVec3 q = random_query(rng);

            std::vector<double> ref(n), got(n);
            kernels::scalar::chord_sq_batch(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q,
                                            ref.data());
            kernels::chord_sq_batch(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q, got.data());
            CHECK(bit_equal(ref, got));

            const auto am_ref =
                kernels::scalar::argmin_chord_sq(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q);
            const auto am_got =
                kernels::argmin_chord_sq(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q);
            CHECK(am_ref.pos == am_got.pos);
            if (n > 0) CHECK(am_ref.value == am_got.value);

            const double lo = n > 0 ? ref[rng() % n] : 0.0;
            const double hi = lo + 0.5;
            std::vector<std::uint32_t> col_ref, col_got;
            kernels::scalar::collect_in_range(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q,
                                              lo, hi, 7, col_ref);
            kernels::collect_in_range(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q, lo, hi, 7,
                                      col_got);
            CHECK(col_ref == col_got);
        }
    }
}

TEST_CASE("argmin returns the first position attaining the minimum") {
    VariantGuard guard;
    const std::size_t n = 64;
    for (const auto variant : kernels::available_variants()) {
        kernels::set_variant(variant);
        for (std::size_t first = 0; first < n; ++first) {
            // Equal minima at `first` and a later slot; ones everywhere else.
            // q = north pole, points on the equator (chord_sq 2) except the
            // minima at the pole itself (chord_sq 0).
            std::vector<double> xs(n), ys(n), zs(n);
            for (std::size_t i = 0; i < n; ++i) {
                const bool is_min = i == first || i == std::min(n - 1, first + 17);
                const auto v = pathstab::to_unit_vector(is_min ? pathstab::GeoPoint{90.0, 0.0}
                                                               : pathstab::GeoPoint{0.0, 0.0});
                xs[i] = v.x;
                ys[i] = v.y;
                zs[i] = v.z;
            }
            const UnitVec3 q = pathstab::to_unit_vector({90.0, 0.0});
            const auto am = kernels::argmin_chord_sq(xs.data(), ys.data(), zs.data(), n, q);
            CHECK(am.pos == first);
            CHECK(am.value == 0.0);
        }
    }
}

TEST_CASE("argmin over an empty range reports pos == n") {
    const UnitVec3 q = pathstab::to_unit_vector({0.0, 0.0});
    const auto am = kernels::argmin_chord_sq(nullptr, nullptr, nullptr, 0, q);
    CHECK(am.pos == 0);
}

TEST_CASE("collect_in_range honors closed bounds, base offset and order") {
    VariantGuard guard;
    std::mt19937_64 rng(203);
    const std::size_t n = 333;
    const Soa soa = random_points(rng, n);
    const UnitVec3 q = random_query(rng);
    std::vector<double> cs(n);
    kernels::scalar::chord_sq_batch(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q, cs.data());
    std::vector<double> sorted = cs;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted[n / 4];
    const double hi = sorted[3 * n / 4];

    for (const auto variant : kernels::available_variants()) {
        kernels::set_variant(variant);
        std::vector<std::uint32_t> got;
        kernels::collect_in_range(soa.xs.data(), soa.ys.data(), soa.zs.data(), n, q, lo, hi, 1000,
                                  got);
        std::vector<std::uint32_t> expect;
        for (std::uint32_t i = 0; i < n; ++i) {
            if (cs[i] >= lo && cs[i] <= hi) expect.push_back(1000 + i);
        }
        CHECK(got == expect);
        CHECK(std::is_sorted(got.begin(), got.end()));
    }
}

TEST_CASE("set_variant rejects variants not available on this machine") {
    const auto avail = kernels::available_variants();
    CHECK(std::find(avail.begin(), avail.end(), kernels::Variant::scalar) != avail.end());
    if (std::find(avail.begin(), avail.end(), kernels::Variant::avx2) == avail.end()) {
        CHECK_THROWS(kernels::set_variant(kernels::Variant::avx2));
    }
}

#include "pathstab/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace pathstab::kernels {

namespace scalar {

void chord_sq_batch(const double* xs, const double* ys, const double* zs, std::size_t n,
                    const UnitVec3& q, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - q.x;
        const double dy = ys[i] - q.y;
        const double dz = zs[i] - q.z;
        out[i] = dx * dx + dy * dy + dz * dz;
    }
}

ArgMin argmin_chord_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const UnitVec3& q) {
    ArgMin best{0.0, n};
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - q.x;
        const double dy = ys[i] - q.y;
        const double dz = zs[i] - q.z;
        const double d = dx * dx + dy * dy + dz * dz;
        if (best.pos == n || d < best.value) {
            best.value = d;
            best.pos = i;
        }
    }
    return best;
}

void collect_in_range(const double* xs, const double* ys, const double* zs, std::size_t n,
                      const UnitVec3& q, double lo, double hi, std::uint32_t base,
                      std::vector<std::uint32_t>& out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - q.x;
        const double dy = ys[i] - q.y;
        const double dz = zs[i] - q.z;
        const double d = dx * dx + dy * dy + dz * dz;
        if (d >= lo && d <= hi) {
            out.push_back(base + static_cast<std::uint32_t>(i));
        }
    }
}

}  // namespace scalar

#if defined(PATHSTAB_HAVE_AVX2)
namespace avx2 {
void chord_sq_batch(const double* xs, const double* ys, const double* zs, std::size_t n,
                    const UnitVec3& q, double* out);
ArgMin argmin_chord_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const UnitVec3& q);
void collect_in_range(const double* xs, const double* ys, const double* zs, std::size_t n,
                      const UnitVec3& q, double lo, double hi, std::uint32_t base,
                      std::vector<std::uint32_t>& out);
}  // namespace avx2
#endif

namespace {

struct Dispatch {
    Variant variant;
    void (*chord_sq_batch)(const double*, const double*, const double*, std::size_t,
                           const UnitVec3&, double*);
    ArgMin (*argmin_chord_sq)(const double*, const double*, const double*, std::size_t,
                              const UnitVec3&);
    void (*collect_in_range)(const double*, const double*, const double*, std::size_t,
                             const UnitVec3&, double, double, std::uint32_t,
                             std::vector<std::uint32_t>&);
};

constexpr Dispatch kScalarDispatch{Variant::scalar, &scalar::chord_sq_batch,
                                   &scalar::argmin_chord_sq, &scalar::collect_in_range};

#if defined(PATHSTAB_HAVE_AVX2)
constexpr Dispatch kAvx2Dispatch{Variant::avx2, &avx2::chord_sq_batch, &avx2::argmin_chord_sq,
                                 &avx2::collect_in_range};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }
#else
bool cpu_has_avx2() { return false; }
#endif

Dispatch pick_default() {
    const char* env = std::getenv("PATHSTAB_SIMD");
    if (env != nullptr) {
        const std::string want(env);
        if (want == "scalar") return kScalarDispatch;
#if defined(PATHSTAB_HAVE_AVX2)
        if (want == "avx2" && cpu_has_avx2()) return kAvx2Dispatch;
#endif
        // Unknown or unsupported request falls through to auto-detection.
    }
#if defined(PATHSTAB_HAVE_AVX2)
    if (cpu_has_avx2()) return kAvx2Dispatch;
#endif
    return kScalarDispatch;
}

Dispatch& dispatch() {
    static Dispatch d = pick_default();
    return d;
}

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::scalar: return "scalar";
        case Variant::avx2: return "avx2";
    }
    return "unknown";
}

std::vector<Variant> available_variants() {
    std::vector<Variant> vs{Variant::scalar};
    if (cpu_has_avx2()) vs.push_back(Variant::avx2);
    return vs;
}

Variant active_variant() { return dispatch().variant; }

void set_variant(Variant v) {
    if (v == Variant::scalar) {
        dispatch() = kScalarDispatch;
        return;
    }
#if defined(PATHSTAB_HAVE_AVX2)
    if (v == Variant::avx2 && cpu_has_avx2()) {
        dispatch() = kAvx2Dispatch;
        return;
    }
#endif
    throw std::runtime_error("kernel variant not supported on this machine: " + variant_name(v));
}

void chord_sq_batch(const double* xs, const double* ys, const double* zs, std::size_t n,
                    const UnitVec3& q, double* out) {
    dispatch().chord_sq_batch(xs, ys, zs, n, q, out);
}

ArgMin argmin_chord_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const UnitVec3& q) {
    return dispatch().argmin_chord_sq(xs, ys, zs, n, q);
}

void collect_in_range(const double* xs, const double* ys, const double* zs, std::size_t n,
                      const UnitVec3& q, double lo, double hi, std::uint32_t base,
                      std::vector<std::uint32_t>& out) {
    dispatch().collect_in_range(xs, ys, zs, n, q, lo, hi, base, out);
}

}  // namespace pathstab::kernels

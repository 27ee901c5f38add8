// AVX2 variants of the chord-distance kernels. Compiled with -mavx2 and
// -ffp-contract=off; each lane performs the exact operation sequence of the
// scalar reference (sub, mul, add -- no FMA), so outputs are bit-identical.

#include "pathstab/kernels.hpp"

#if defined(PATHSTAB_HAVE_AVX2)

#include <immintrin.h>

namespace pathstab::kernels::avx2 {

namespace {

inline __m256d chord_sq4(const double* xs, const double* ys, const double* zs, std::size_t i,
                         __m256d qx, __m256d qy, __m256d qz) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
    return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                         _mm256_mul_pd(dz, dz));
}

inline double chord_sq1(const double* xs, const double* ys, const double* zs, std::size_t i,
                        const UnitVec3& q) {
    const double dx = xs[i] - q.x;
    const double dy = ys[i] - q.y;
    const double dz = zs[i] - q.z;
    return dx * dx + dy * dy + dz * dz;
}

}  // namespace

void chord_sq_batch(const double* xs, const double* ys, const double* zs, std::size_t n,
                    const UnitVec3& q, double* out) {
    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qy = _mm256_set1_pd(q.y);
    const __m256d qz = _mm256_set1_pd(q.z);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, chord_sq4(xs, ys, zs, i, qx, qy, qz));
    }
    for (; i < n; ++i) {
        out[i] = chord_sq1(xs, ys, zs, i, q);
    }
}

ArgMin argmin_chord_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const UnitVec3& q) {
    ArgMin best{0.0, n};
    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qy = _mm256_set1_pd(q.y);
    const __m256d qz = _mm256_set1_pd(q.z);

    __m256d best_val = _mm256_set1_pd(__builtin_inf());
    __m256i best_idx = _mm256_set1_epi64x(-1);
    __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
    const __m256i step = _mm256_set1_epi64x(4);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = chord_sq4(xs, ys, zs, i, qx, qy, qz);
        // Strict less-than keeps the first occurrence within each lane.
        const __m256d lt = _mm256_cmp_pd(d, best_val, _CMP_LT_OQ);
        best_val = _mm256_blendv_pd(best_val, d, lt);
        best_idx = _mm256_blendv_epi8(best_idx, idx, _mm256_castpd_si256(lt));
        idx = _mm256_add_epi64(idx, step);
    }

    alignas(32) double vals[4];
    alignas(32) long long idxs[4];
    _mm256_store_pd(vals, best_val);
    _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), best_idx);
    // Lanes hold positions congruent mod 4, so the lexicographic (value, pos)
    // minimum recovers the global first occurrence.
    for (int lane = 0; lane < 4; ++lane) {
        if (idxs[lane] < 0) continue;
        const auto pos = static_cast<std::size_t>(idxs[lane]);
        if (best.pos == n || vals[lane] < best.value ||
            (vals[lane] == best.value && pos < best.pos)) {
            best.value = vals[lane];
            best.pos = pos;
        }
    }
    for (; i < n; ++i) {
        const double d = chord_sq1(xs, ys, zs, i, q);
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
    const __m256d qx = _mm256_set1_pd(q.x);
    const __m256d qy = _mm256_set1_pd(q.y);
    const __m256d qz = _mm256_set1_pd(q.z);
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = chord_sq4(xs, ys, zs, i, qx, qy, qz);
        const __m256d in = _mm256_and_pd(_mm256_cmp_pd(d, vlo, _CMP_GE_OQ),
                                         _mm256_cmp_pd(d, vhi, _CMP_LE_OQ));
        int bits = _mm256_movemask_pd(in);
        while (bits != 0) {
            const int lane = __builtin_ctz(static_cast<unsigned>(bits));
            out.push_back(base + static_cast<std::uint32_t>(i) + static_cast<std::uint32_t>(lane));
            bits &= bits - 1;
        }
    }
    for (; i < n; ++i) {
        const double d = chord_sq1(xs, ys, zs, i, q);
        if (d >= lo && d <= hi) {
            out.push_back(base + static_cast<std::uint32_t>(i));
        }
    }
}

}  // namespace pathstab::kernels::avx2

#endif  // PATHSTAB_HAVE_AVX2

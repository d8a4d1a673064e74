#pragma once

#include <algorithm>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace distlab::par {

enum class mode { serial, openmp };

// Global execution mode for the parallel kernels. Defaults to OpenMP when
// compiled with it. Every kernel also accepts an explicit mode so tests can
// compare the serial reference against the OpenMP path directly.
inline mode& global_mode() {
#ifdef _OPENMP
    static mode m = mode::openmp;
#else
    static mode m = mode::serial;
#endif
    return m;
}

inline void set_global_mode(mode m) { global_mode() = m; }

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// Data-parallel index loop. Bodies must write only to their own slots; with
// that discipline results are identical across modes and thread counts.
template <class F>
void for_each_index(std::size_t n, F&& body, mode m) {
#ifdef _OPENMP
    if (m == mode::openmp) {
        // Small chunks balance uneven per-item cost; scale them up for huge
        // loops so dispatch overhead stays negligible.
        const long long chunk =
            std::max(1LL, static_cast<long long>(n) / (64LL * omp_get_max_threads()));
#pragma omp parallel for schedule(dynamic, chunk)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#else
    (void)m;
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

template <class F>
void for_each_index(std::size_t n, F&& body) {
    for_each_index(n, body, global_mode());
}

} // namespace distlab::par

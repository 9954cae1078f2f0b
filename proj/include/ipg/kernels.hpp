// Data-parallel kernels used by the harness and the policy scans, each with a
// serial reference implementation. The parallel variants are written so any
// thread count reproduces the serial result bit for bit: loop bodies write
// only to index-addressed slots, and the argmax merge preserves the
// lowest-index tie-break.
#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

#include <utility>

namespace ipg::par {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Resolves a requested thread count: 0 means "all available".
inline int resolve_threads(int threads) {
  if (threads <= 0) return max_threads();
  return threads;
}

template <class Fn>
void for_index_serial(int n, Fn&& fn) {
  for (int i = 0; i < n; ++i) fn(i);
}

// fn(i) must touch only state owned by index i.
template <class Fn>
void for_index(int n, int threads, Fn&& fn) {
  threads = resolve_threads(threads);
  if (threads == 1) {
    for_index_serial(n, std::forward<Fn>(fn));
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int i = 0; i < n; ++i) fn(i);
#else
  for_index_serial(n, std::forward<Fn>(fn));
#endif
}

// Lowest-index argmax over score(i), i in [0, n). n must be > 0.
template <class Score>
int argmax_lowest_serial(int n, Score&& score) {
  int best = 0;
  double best_score = score(0);
  for (int i = 1; i < n; ++i) {
    const double s = score(i);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

template <class Score>
int argmax_lowest(int n, int threads, Score&& score) {
  threads = resolve_threads(threads);
  if (threads == 1 || n < 2 * threads)
    return argmax_lowest_serial(n, std::forward<Score>(score));
#ifdef _OPENMP
  int best = -1;
  double best_score = 0.0;
#pragma omp parallel num_threads(threads)
  {
    int local_best = -1;
    double local_score = 0.0;
#pragma omp for schedule(static) nowait
    for (int i = 0; i < n; ++i) {
      const double s = score(i);
      if (local_best < 0 || s > local_score) {
        local_score = s;
        local_best = i;
      }
    }
#pragma omp critical
    {
      if (local_best >= 0 &&
          (best < 0 || local_score > best_score ||
           (local_score == best_score && local_best < best))) {
        best_score = local_score;
        best = local_best;
      }
    }
  }
  return best;
#else
  return argmax_lowest_serial(n, std::forward<Score>(score));
#endif
}

}  // namespace ipg::par

#include "qdiff/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qdiff {

std::vector<int> solve_assignment(const RMat& cost, double* total) {
    if (cost.rows() != cost.cols()) throw std::invalid_argument("solve_assignment: cost matrix must be square");
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials u (rows), v (columns); p[j] = row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assign(n);
    for (int j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
    if (total) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += cost(i, assign[i]);
        *total = s;
    }
    return assign;
}

namespace {

RMat cost_matrix(const std::vector<PureState>& a, const std::vector<PureState>& b, std::size_t m) {
    RMat c(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) c(i, j) = trace_distance_pure(a[i], b[j]);
    return c;
}

}  // namespace

double wasserstein1(const std::vector<PureState>& a, const std::vector<PureState>& b) {
    const std::size_t m = std::min(a.size(), b.size());
    if (m == 0) throw std::invalid_argument("wasserstein1: empty ensemble");
    double total = 0.0;
    solve_assignment(cost_matrix(a, b, m), &total);
    return total / static_cast<double>(m);
}

W1Estimate wasserstein1_bootstrap(const std::vector<PureState>& a, const std::vector<PureState>& b, int resamples,
                                  Rng& rng) {
    const std::size_t m = std::min(a.size(), b.size());
    if (m == 0) throw std::invalid_argument("wasserstein1: empty ensemble");
    const RMat full = cost_matrix(a, b, m);
    W1Estimate est;
    solve_assignment(full, &est.value);
    est.value /= static_cast<double>(m);
    if (resamples < 2) return est;
    std::vector<double> vals;
    RMat c(m, m);
    std::vector<std::size_t> ia(m), ib(m);
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < m; ++i) {
            ia[i] = static_cast<std::size_t>(rng.below(static_cast<int>(m)));
            ib[i] = static_cast<std::size_t>(rng.below(static_cast<int>(m)));
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) c(i, j) = full(ia[i], ib[j]);
        double t = 0.0;
        solve_assignment(c, &t);
        vals.push_back(t / static_cast<double>(m));
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    est.standard_error = std::sqrt(var / (vals.size() - 1));
    return est;
}

}  // namespace qdiff

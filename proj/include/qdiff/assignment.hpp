#pragma once

#include <vector>

#include "qdiff/linalg.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/states.hpp"

namespace qdiff {

// Minimum-cost perfect matching on a square cost matrix (Hungarian method
// with potentials, O(N^3)). Returns assignment[row] = column.
std::vector<int> solve_assignment(const RMat& cost, double* total = nullptr);

// W1 between two equal-size ensembles of pure states with cost
// sqrt(2 (1 - |<a|b>|^2)). Larger ensembles are truncated to the smaller size.
double wasserstein1(const std::vector<PureState>& a, const std::vector<PureState>& b);

struct W1Estimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// W1 plus a bootstrap standard error over `resamples` paired resamples.
W1Estimate wasserstein1_bootstrap(const std::vector<PureState>& a, const std::vector<PureState>& b, int resamples,
                                  Rng& rng);

}  // namespace qdiff

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mechanisms.hpp"
#include "workload.hpp"

namespace dplr {

// Desk-scale wavelet baseline: counts are zero-padded to a power of two,
// Haar-transformed (orthonormal), each transform stage receives an equal
// share of epsilon with noise calibrated to a unit count's effect on that
// stage, and the noisy coefficients are inverted before applying W.
// Unbiased for W*D; exact in the no-noise limit. This is a simplified
// stand-in for the full published wavelet machinery, kept to branching-2
// and an even budget split.
NoisyAnswer wavelet_answer(const WorkloadMatrix& w, const Eigen::VectorXd& counts,
                           const PrivacyParams& p, Rng& rng, uint64_t seed = 0);

// Desk-scale hierarchical baseline: a binary interval tree over the domain
// (upper-median split, no padding), epsilon split evenly across the
// ceil(log2 n)+1 levels, every node perturbed with the same scale. Rows
// that are constant over one contiguous interval are answered from the
// canonical dyadic cover; other rows combine noisy leaves. Unbiased;
// exact in the no-noise limit. Simplified stand-in, branching 2 and even
// budget split only.
NoisyAnswer hierarchical_answer(const WorkloadMatrix& w,
                                const Eigen::VectorXd& counts,
                                const PrivacyParams& p, Rng& rng,
                                uint64_t seed = 0);

// Number of levels of the binary interval tree over a domain of size n.
Eigen::Index hierarchical_levels(Eigen::Index n);

// Nodes (as [lo, hi) intervals) of the canonical dyadic cover the
// hierarchical mechanism uses for the query interval [lo, hi).
std::vector<std::pair<Eigen::Index, Eigen::Index>> hierarchical_cover(
    Eigen::Index n, Eigen::Index lo, Eigen::Index hi);

}  // namespace dplr

#include "synopsis.hpp"

#include <cmath>
#include <unordered_map>

#include "errors.hpp"

namespace dplr {

namespace {

void check_inputs(const WorkloadMatrix& w, const Eigen::VectorXd& counts,
                  const PrivacyParams& p) {
  validate(p);
  if (w.n() != counts.size()) {
    throw InvalidArgument("count vector length does not match workload domain");
  }
  if (!counts.allFinite()) {
    throw InvalidArgument("count vector has non-finite entries");
  }
}

Eigen::Index padded_size(Eigen::Index n) {
  Eigen::Index size = 1;
  while (size < n) size *= 2;
  return size;
}

}  // namespace

NoisyAnswer wavelet_answer(const WorkloadMatrix& w, const Eigen::VectorXd& counts,
                           const PrivacyParams& p, Rng& rng, uint64_t seed) {
  check_inputs(w, counts, p);
  const Eigen::Index n = counts.size();
  const Eigen::Index padded = padded_size(n);
  Eigen::Index stages = 0;
  for (Eigen::Index size = padded; size > 1; size /= 2) ++stages;

  Eigen::VectorXd work = Eigen::VectorXd::Zero(padded);
  work.head(n) = counts;

  // Forward orthonormal transform, decimating: stage j maps the current
  // approximation a of length len into len/2 averages (a_even + a_odd)/sqrt(2)
  // and len/2 details (a_even - a_odd)/sqrt(2). One unit change in one count
  // moves exactly one detail coefficient of stage j by 2^(-j/2) and the
  // final approximation coefficient by 2^(-stages/2).
  std::vector<Eigen::VectorXd> details;
  details.reserve(static_cast<size_t>(stages));
  Eigen::VectorXd approx = work;
  const double inv_root2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < stages; ++j) {
    const Eigen::Index half = approx.size() / 2;
    Eigen::VectorXd next(half);
    Eigen::VectorXd detail(half);
    for (Eigen::Index i = 0; i < half; ++i) {
      next(i) = (approx(2 * i) + approx(2 * i + 1)) * inv_root2;
      detail(i) = (approx(2 * i) - approx(2 * i + 1)) * inv_root2;
    }
    details.push_back(std::move(detail));
    approx = std::move(next);
  }

  // Even budget split over the `stages` detail groups plus the final
  // approximation; each group's noise scales to its own unit-change size.
  const double levels = static_cast<double>(stages + 1);
  for (Eigen::Index j = 0; j < stages; ++j) {
    const double unit_change =
        std::pow(2.0, -0.5 * static_cast<double>(j + 1));
    const double scale =
        levels * unit_change * p.unit_sensitivity / p.epsilon;
    Eigen::VectorXd& detail = details[static_cast<size_t>(j)];
    for (Eigen::Index i = 0; i < detail.size(); ++i) {
      detail(i) += laplace_or_zero(scale, rng);
    }
  }
  {
    const double unit_change =
        std::pow(2.0, -0.5 * static_cast<double>(stages));
    const double scale =
        levels * unit_change * p.unit_sensitivity / p.epsilon;
    for (Eigen::Index i = 0; i < approx.size(); ++i) {
      approx(i) += laplace_or_zero(scale, rng);
    }
  }

  // Inverse transform.
  for (Eigen::Index j = stages - 1; j >= 0; --j) {
    const Eigen::VectorXd& detail = details[static_cast<size_t>(j)];
    const Eigen::Index half = approx.size();
    Eigen::VectorXd expanded(half * 2);
    for (Eigen::Index i = 0; i < half; ++i) {
      expanded(2 * i) = (approx(i) + detail(i)) * inv_root2;
      expanded(2 * i + 1) = (approx(i) - detail(i)) * inv_root2;
    }
    approx = std::move(expanded);
  }

  return NoisyAnswer{w.entries * approx.head(n), "WM", seed};
}

Eigen::Index hierarchical_levels(Eigen::Index n) {
  if (n < 1) throw InvalidArgument("domain size must be at least 1");
  Eigen::Index levels = 1;
  Eigen::Index size = 1;
  while (size < n) {
    size *= 2;
    ++levels;
  }
  return levels;
}

namespace {

// Binary interval tree over [0, n): a node [lo, hi) with hi - lo > 1 splits
// at lo + ceil((hi - lo)/2), longer half first.
Eigen::Index split_point(Eigen::Index lo, Eigen::Index hi) {
  return lo + (hi - lo + 1) / 2;
}

struct NoisyTree {
  // Noisy sum per node; noise is drawn in deterministic depth-first order.
  std::unordered_map<uint64_t, double> nodes;
  Eigen::VectorXd leaves;
  Eigen::Index n = 0;

  uint64_t key(Eigen::Index lo, Eigen::Index hi) const {
    return static_cast<uint64_t>(lo) * static_cast<uint64_t>(n + 1) +
           static_cast<uint64_t>(hi);
  }

  double lookup(Eigen::Index lo, Eigen::Index hi) const {
    const auto it = nodes.find(key(lo, hi));
    if (it == nodes.end()) throw DomainError("interval is not a tree node");
    return it->second;
  }
};

void build_tree(const Eigen::VectorXd& counts, Eigen::Index lo,
                Eigen::Index hi, double scale, Rng& rng, NoisyTree& out) {
  const double exact = counts.segment(lo, hi - lo).sum();
  const double noisy = exact + laplace_or_zero(scale, rng);
  out.nodes.emplace(out.key(lo, hi), noisy);
  if (hi - lo > 1) {
    const Eigen::Index mid = split_point(lo, hi);
    build_tree(counts, lo, mid, scale, rng, out);
    build_tree(counts, mid, hi, scale, rng, out);
  } else {
    out.leaves(lo) = noisy;
  }
}

void cover_recurse(Eigen::Index node_lo, Eigen::Index node_hi,
                   Eigen::Index lo, Eigen::Index hi,
                   std::vector<std::pair<Eigen::Index, Eigen::Index>>& out) {
  if (lo <= node_lo && node_hi <= hi) {
    out.push_back({node_lo, node_hi});
    return;
  }
  if (node_hi <= lo || hi <= node_lo) return;
  const Eigen::Index mid = split_point(node_lo, node_hi);
  cover_recurse(node_lo, mid, lo, hi, out);
  cover_recurse(mid, node_hi, lo, hi, out);
}

// True when the row is constant over one contiguous interval [lo, hi);
// fills lo/hi/value when so.
bool contiguous_constant(const Eigen::VectorXd& row, Eigen::Index* lo,
                         Eigen::Index* hi, double* value) {
  Eigen::Index first = -1;
  Eigen::Index last = -1;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (row(j) != 0.0) {
      if (first < 0) first = j;
      last = j;
    }
  }
  if (first < 0) {
    *lo = 0;
    *hi = 0;
    *value = 0.0;
    return true;
  }
  const double v = row(first);
  for (Eigen::Index j = first; j <= last; ++j) {
    if (row(j) != v) return false;
  }
  *lo = first;
  *hi = last + 1;
  *value = v;
  return true;
}

}  // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> hierarchical_cover(
    Eigen::Index n, Eigen::Index lo, Eigen::Index hi) {
  if (n < 1 || lo < 0 || hi > n || lo > hi) {
    throw InvalidArgument("invalid cover interval");
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  if (lo < hi) cover_recurse(0, n, lo, hi, out);
  return out;
}

NoisyAnswer hierarchical_answer(const WorkloadMatrix& w,
                                const Eigen::VectorXd& counts,
                                const PrivacyParams& p, Rng& rng,
                                uint64_t seed) {
  check_inputs(w, counts, p);
  const Eigen::Index n = counts.size();
  const double levels = static_cast<double>(hierarchical_levels(n));
  const double scale = levels * p.unit_sensitivity / p.epsilon;

  NoisyTree tree;
  tree.n = n;
  tree.leaves = Eigen::VectorXd::Zero(n);
  build_tree(counts, 0, n, scale, rng, tree);

  Eigen::VectorXd answers(w.m());
  for (Eigen::Index i = 0; i < w.m(); ++i) {
    const Eigen::VectorXd row = w.entries.row(i).transpose();
    Eigen::Index lo = 0;
    Eigen::Index hi = 0;
    double value = 0.0;
    if (contiguous_constant(row, &lo, &hi, &value)) {
      double total = 0.0;
      for (const auto& [node_lo, node_hi] : hierarchical_cover(n, lo, hi)) {
        total += tree.lookup(node_lo, node_hi);
      }
      answers(i) = value * total;
    } else {
      double total = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (row(j) != 0.0) total += row(j) * tree.leaves(j);
      }
      answers(i) = total;
    }
  }
  return NoisyAnswer{std::move(answers), "HM", seed};
}

}  // namespace dplr

#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/synopsis.hpp"
#include "core/workload.hpp"

using namespace dplr;

namespace {

WorkloadMatrix wrap(const Eigen::MatrixXd& entries) {
  return WorkloadMatrix{entries, "test", std::nullopt};
}

}  // namespace

TEST_CASE("tree depth follows the power-of-two ceiling") {
  CHECK(hierarchical_levels(1) == 1);
  CHECK(hierarchical_levels(2) == 2);
  CHECK(hierarchical_levels(3) == 3);
  CHECK(hierarchical_levels(4) == 3);
  CHECK(hierarchical_levels(5) == 4);
  CHECK(hierarchical_levels(1000) == 11);
  CHECK(hierarchical_levels(1024) == 11);
  CHECK_THROWS_AS(hierarchical_levels(0), InvalidArgument);
}

TEST_CASE("dyadic covers use canonical nodes") {
  using Cover = std::vector<std::pair<Eigen::Index, Eigen::Index>>;
  CHECK(hierarchical_cover(8, 0, 8) == Cover{{0, 8}});
  CHECK(hierarchical_cover(8, 0, 4) == Cover{{0, 4}});
  CHECK(hierarchical_cover(8, 1, 5) == Cover{{1, 2}, {2, 4}, {4, 5}});
  CHECK(hierarchical_cover(5, 0, 5) == Cover{{0, 5}});
  CHECK(hierarchical_cover(8, 2, 2).empty());
  CHECK_THROWS_AS(hierarchical_cover(8, -1, 3), InvalidArgument);
  CHECK_THROWS_AS(hierarchical_cover(8, 3, 9), InvalidArgument);
  CHECK_THROWS_AS(hierarchical_cover(8, 5, 3), InvalidArgument);
}

TEST_CASE("dyadic covers tile the query interval exactly") {
  Rng rng(91);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 40);
    const Eigen::Index lo = static_cast<Eigen::Index>(rng.next_u64() %
                                                      static_cast<uint64_t>(n));
    const Eigen::Index hi =
        lo + 1 +
        static_cast<Eigen::Index>(rng.next_u64() %
                                  static_cast<uint64_t>(n - lo));
    const auto cover = hierarchical_cover(n, lo, hi);
    REQUIRE_FALSE(cover.empty());
    // Contiguous, ordered, non-overlapping, and exactly spanning [lo, hi).
    CHECK(cover.front().first == lo);
    CHECK(cover.back().second == hi);
    for (size_t i = 1; i < cover.size(); ++i) {
      CHECK(cover[i].first == cover[i - 1].second);
    }
    // Never more nodes than twice the tree depth.
    CHECK(static_cast<Eigen::Index>(cover.size()) <=
          2 * hierarchical_levels(n));
  }
}

TEST_CASE("both synopses are exact in the no-noise limit") {
  Rng rng(92);
  Eigen::MatrixXd entries(3, 5);
  entries << 1, 1, 1, 0, 0,
             0, 0, 1, 1, 1,
             2, -1, 0, 0.5, 1;
  const auto w = wrap(entries);
  Eigen::VectorXd d(5);
  d << 3, 1, 4, 1, 5;
  const Eigen::VectorXd exact = entries * d;
  const PrivacyParams p{1e15, 1.0};
  const auto wavelet = wavelet_answer(w, d, p, rng);
  CHECK((wavelet.values - exact).norm() <= 1e-9 * (1.0 + exact.norm()));
  CHECK(wavelet.mechanism_id == "WM");
  const auto tree = hierarchical_answer(w, d, p, rng);
  CHECK((tree.values - exact).norm() <= 1e-9 * (1.0 + exact.norm()));
  CHECK(tree.mechanism_id == "HM");
}

TEST_CASE("both synopses reject a zero budget") {
  const auto w = wrap(Eigen::MatrixXd::Identity(4, 4));
  const Eigen::VectorXd d = Eigen::VectorXd::Ones(4);
  Rng rng(93);
  CHECK_THROWS_AS(wavelet_answer(w, d, PrivacyParams{0.0, 1.0}, rng),
                  InvalidArgument);
  CHECK_THROWS_AS(hierarchical_answer(w, d, PrivacyParams{0.0, 1.0}, rng),
                  InvalidArgument);
  CHECK_THROWS_AS(wavelet_answer(w, Eigen::VectorXd::Ones(3),
                                 PrivacyParams{1.0, 1.0}, rng),
                  InvalidArgument);
}

TEST_CASE("the wavelet path is unbiased") {
  Rng rng(94);
  Eigen::MatrixXd entries(2, 5);
  entries << 1, 1, 0, 0, 1,
             0, 2, 1, 0, 0;
  const auto w = wrap(entries);
  Eigen::VectorXd d(5);
  d << 2, 0, 7, 1, 3;
  const Eigen::VectorXd exact = entries * d;
  const PrivacyParams p{1.0, 1.0};
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    mean += wavelet_answer(w, d, p, rng).values - exact;
  }
  mean /= trials;
  for (int i = 0; i < 2; ++i) CHECK(std::fabs(mean(i)) < 0.25);
}

TEST_CASE("the tree path is unbiased on both row kinds") {
  Rng rng(95);
  Eigen::MatrixXd entries(2, 6);
  // One contiguous range row (dyadic-cover path), one scattered row
  // (leaf-combination path).
  entries << 0, 1, 1, 1, 0, 0,
             1, 0, -2, 0, 3, 0;
  const auto w = wrap(entries);
  Eigen::VectorXd d(6);
  d << 4, 1, 0, 2, 5, 3;
  const Eigen::VectorXd exact = entries * d;
  const PrivacyParams p{1.0, 1.0};
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  const int trials = 60000;
  for (int t = 0; t < trials; ++t) {
    mean += hierarchical_answer(w, d, p, rng).values - exact;
  }
  mean /= trials;
  for (int i = 0; i < 2; ++i) CHECK(std::fabs(mean(i)) < 0.6);
}

TEST_CASE("a full-domain range beats plain data perturbation at scale") {
  // One query summing all 1024 cells: the tree answers it from the root
  // node alone with variance 2 * (11/eps)^2 = 242/eps^2, against
  // 2 * 1024/eps^2 for per-cell perturbation.
  const Eigen::Index n = 1024;
  const auto w = wrap(Eigen::MatrixXd::Ones(1, n));
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = (i * 31) % 17;
  const double exact = (w.entries * d)(0);
  const PrivacyParams p{1.0, 1.0};
  Rng rng(96);
  double sum_sq = 0.0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const double err = hierarchical_answer(w, d, p, rng).values(0) - exact;
    sum_sq += err * err;
  }
  const double empirical = sum_sq / trials;
  CHECK(empirical == doctest::Approx(242.0).epsilon(0.06));
  const double per_cell_variance = 2.0 * static_cast<double>(n);
  CHECK(empirical < per_cell_variance);
}

#include "workload.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "rng.hpp"

namespace dplr {

const char* workload_kind_name(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Discrete:
      return "discrete";
    case WorkloadKind::Range:
      return "range";
    case WorkloadKind::Related:
      return "related";
  }
  return "unknown";
}

WorkloadKind workload_kind_from_name(const std::string& name) {
  if (name == "discrete") return WorkloadKind::Discrete;
  if (name == "range") return WorkloadKind::Range;
  if (name == "related") return WorkloadKind::Related;
  throw InvalidArgument("unknown workload kind: " + name);
}

namespace {

void check_finite(const Eigen::MatrixXd& w) {
  if (!w.allFinite()) {
    throw InvalidArgument("workload matrix has non-finite entries");
  }
}

void check_dims(const WorkloadSpec& spec) {
  if (spec.m < 1 || spec.n < 1) {
    throw InvalidArgument("workload dimensions must be at least 1");
  }
}

}  // namespace

SvdResult svd(const WorkloadMatrix& w) {
  check_finite(w.entries);
  Eigen::BDCSVD<Eigen::MatrixXd> dec(w.entries,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.u = dec.matrixU();
  out.sigma = dec.singularValues();
  out.v = dec.matrixV().transpose();

  out.summary.singular_values.assign(out.sigma.data(),
                                     out.sigma.data() + out.sigma.size());
  const double largest = out.sigma.size() > 0 ? out.sigma(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < out.sigma.size(); ++k) {
    if (out.sigma(k) > kRankThreshold * largest && out.sigma(k) > 0.0) ++rank;
  }
  out.summary.rank = rank;
  out.summary.condition_ratio = rank > 0 ? largest / out.sigma(rank - 1) : 0.0;
  return out;
}

SpectrumSummary spectrum(const WorkloadMatrix& w) { return svd(w).summary; }

double sensitivity(const Eigen::MatrixXd& w) {
  check_finite(w);
  if (w.size() == 0) return 0.0;
  return w.cwiseAbs().colwise().sum().maxCoeff();
}

WorkloadMatrix gen_wdiscrete(const WorkloadSpec& spec) {
  check_dims(spec);
  if (!(spec.p > 0.0 && spec.p < 1.0)) {
    throw InvalidArgument("discrete workload flip probability must lie in (0,1)");
  }
  Rng rng(spec.seed);
  Eigen::MatrixXd w(spec.m, spec.n);
  for (Eigen::Index i = 0; i < spec.m; ++i) {
    for (Eigen::Index j = 0; j < spec.n; ++j) {
      w(i, j) = rng.uniform() < spec.p ? 1.0 : -1.0;
    }
  }
  return WorkloadMatrix{std::move(w), "discrete", spec};
}

WorkloadMatrix gen_wrange(const WorkloadSpec& spec) {
  check_dims(spec);
  Rng rng(spec.seed);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(spec.m, spec.n);
  for (Eigen::Index i = 0; i < spec.m; ++i) {
    const auto n = spec.n;
    Eigen::Index a = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
    a = std::min(a, n - 1);
    Eigen::Index width = static_cast<Eigen::Index>(
        rng.uniform() * static_cast<double>(n - a));
    Eigen::Index b = std::min(a + width, n - 1);
    for (Eigen::Index j = a; j <= b; ++j) w(i, j) = 1.0;
  }
  return WorkloadMatrix{std::move(w), "range", spec};
}

WorkloadMatrix gen_wrelated(const WorkloadSpec& spec) {
  check_dims(spec);
  if (spec.s < 1 || spec.s > std::min(spec.m, spec.n)) {
    throw InvalidArgument("related workload requires 1 <= s <= min(m, n)");
  }
  Rng rng(spec.seed);
  Eigen::MatrixXd base(spec.s, spec.n);
  for (Eigen::Index i = 0; i < spec.s; ++i) {
    for (Eigen::Index j = 0; j < spec.n; ++j) base(i, j) = rng.normal();
  }
  Eigen::MatrixXd comb(spec.m, spec.s);
  for (Eigen::Index i = 0; i < spec.m; ++i) {
    for (Eigen::Index j = 0; j < spec.s; ++j) comb(i, j) = rng.normal();
  }
  return WorkloadMatrix{comb * base, "related", spec};
}

WorkloadMatrix generate_workload(const WorkloadSpec& spec) {
  switch (spec.kind) {
    case WorkloadKind::Discrete:
      return gen_wdiscrete(spec);
    case WorkloadKind::Range:
      return gen_wrange(spec);
    case WorkloadKind::Related:
      return gen_wrelated(spec);
  }
  throw InvalidArgument("unknown workload kind");
}

Eigen::VectorXd coarsen(const Eigen::VectorXd& raw, Eigen::Index n) {
  if (n < 1) throw InvalidArgument("target domain size must be at least 1");
  if (raw.size() < n) {
    throw InvalidArgument("count vector shorter than target domain size");
  }
  const Eigen::Index base = raw.size() / n;
  const Eigen::Index remainder = raw.size() % n;
  Eigen::VectorXd out(n);
  Eigen::Index pos = 0;
  for (Eigen::Index g = 0; g < n; ++g) {
    const Eigen::Index size = base + (g < remainder ? 1 : 0);
    out(g) = raw.segment(pos, size).sum();
    pos += size;
  }
  return out;
}

Eigen::VectorXd synthetic_counts(Eigen::Index cardinality, uint64_t seed,
                                 double alpha, double xm, double cap) {
  if (cardinality < 1) throw InvalidArgument("cardinality must be at least 1");
  if (!(alpha > 0.0) || !(xm > 0.0)) {
    throw InvalidArgument("power-law parameters must be positive");
  }
  Rng rng(seed);
  Eigen::VectorXd out(cardinality);
  for (Eigen::Index i = 0; i < cardinality; ++i) {
    const double draw = std::floor(xm * std::pow(rng.uniform(), -1.0 / alpha));
    out(i) = std::min(draw, cap);
  }
  return out;
}

}  // namespace dplr

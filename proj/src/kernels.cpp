#include "lukcon/kernels.hpp"

#include <cmath>

#include "lukcon/errors.hpp"

namespace lukcon {

void KernelSpec::validate() const {
  if (kind == KernelKind::polynomial && degree < 1)
    throw InputError("polynomial kernel degree must be >= 1");
  if (kind == KernelKind::rbf && !(width > 0.0))
    throw InputError("rbf kernel width must be > 0");
}

double KernelSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size())
    throw InputError("kernel arguments have dimensions " + std::to_string(x.size()) +
                     " and " + std::to_string(y.size()));
  switch (kind) {
    case KernelKind::linear:
    case KernelKind::polynomial: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      const double base = dot + offset;
      if (kind == KernelKind::linear) return base;
      double r = 1.0;
      for (int d = 0; d < degree; ++d) r *= base;
      return r;
    }
    case KernelKind::rbf: {
      double sq = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) sq += (x[i] - y[i]) * (x[i] - y[i]);
      return std::exp(-sq / (2.0 * width * width));
    }
  }
  return 0.0;
}

const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::linear: return "linear";
    case KernelKind::polynomial: return "polynomial";
    case KernelKind::rbf: return "rbf";
  }
  return "?";
}

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "polynomial") return KernelKind::polynomial;
  if (s == "rbf") return KernelKind::rbf;
  throw InputError("unknown kernel kind '" + s + "'");
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive_definite: return "positive_definite";
    case Definiteness::positive_semidefinite: return "positive_semidefinite";
    case Definiteness::invalid: return "invalid";
  }
  return "?";
}

GramMatrix gram(const KernelSpec& spec, const std::vector<std::vector<double>>& points) {
  spec.validate();
  if (points.empty()) throw InputError("gram matrix of an empty sample set");
  for (const auto& p : points)
    if (p.size() != points.front().size())
      throw InputError("gram matrix over points of different dimensions");
  const auto n = static_cast<Eigen::Index>(points.size());
  GramMatrix g;
  g.K.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i; k < n; ++k) {
      const double v = spec(points[i], points[k]);
      g.K(i, k) = v;
      g.K(k, i) = v;
    }
  g.symmetric = true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.K, Eigen::EigenvaluesOnly);
  g.min_eigenvalue = es.eigenvalues().minCoeff();
  return g;
}

Definiteness psd_check(const Eigen::MatrixXd& K, double tol) {
  if (K.rows() != K.cols()) throw InputError("gram matrix is not square");
  if (K.size() > 0 && (K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InputError("gram matrix is not symmetric");
  if (K.size() == 0) return Definiteness::positive_definite;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo > tol) return Definiteness::positive_definite;
  if (lo >= -tol) return Definiteness::positive_semidefinite;
  return Definiteness::invalid;
}

}  // namespace lukcon

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lukcon {

enum class KernelKind { linear, polynomial, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double offset = 1.0;  // c for linear / polynomial
  int degree = 2;       // polynomial only
  double width = 1.0;   // sigma for rbf

  /// Throws InputError unless degree >= 1 and width > 0.
  void validate() const;
  double operator()(std::span<const double> x, std::span<const double> y) const;
};

const char* to_string(KernelKind k);
KernelKind parse_kernel_kind(const std::string& s);

struct GramMatrix {
  Eigen::MatrixXd K;
  bool symmetric = true;
  double min_eigenvalue = 0.0;
};

/// K[i][k] = k(x_i, x_k). Throws InputError on empty input or mixed
/// dimensions.
GramMatrix gram(const KernelSpec& spec, const std::vector<std::vector<double>>& points);

enum class Definiteness { positive_definite, positive_semidefinite, invalid };

const char* to_string(Definiteness d);

/// Classifies by the smallest eigenvalue: > tol positive-definite,
/// >= -tol positive-semidefinite, otherwise invalid. Throws InputError when
/// K is not symmetric within 1e-12.
Definiteness psd_check(const Eigen::MatrixXd& K, double tol = 1e-9);
inline Definiteness psd_check(const GramMatrix& g, double tol = 1e-9) {
  return psd_check(g.K, tol);
}

}  // namespace lukcon

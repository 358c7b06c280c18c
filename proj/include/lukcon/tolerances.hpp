#pragma once

namespace lukcon {

/// Every numerical threshold used by the solvers and the analysis.
struct Tolerances {
  double qp = 1e-8;             // KKT tolerance of the active-set QP
  double lp = 1e-9;             // phase-1 optimum above this => infeasible
  double nullspace = 1e-10;     // singular values <= tol * sigma_max are zero
  double activity = 1e-6;       // |M_{h,i}·p* + q_{h,i}| <= this => active
  double entailment = 1e-9;     // entailment LP maximum must not exceed this
  double stationarity = 1e-7;   // ||Mλ - target|| for multiplier certificates
  double nonnegativity = 1e-9;  // λ >= -this
  double feasibility = 1e-7;    // max(M'p + q) accepted at an optimum
  double psd = 1e-9;            // eigenvalue threshold for Gram classification
  int max_iterations = 20000;   // active-set / simplex iteration cap
};

}  // namespace lukcon

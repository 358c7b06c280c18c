#pragma once

// Multiplier analysis of a trained model: the stationarity system
// M lambda = target, its nullspace parameterisation, deactivation
// certificates, grounded entailment, minimal support sets and ablation.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lukcon/compile.hpp"
#include "lukcon/linalg.hpp"
#include "lukcon/tolerances.hpp"
#include "lukcon/train.hpp"

namespace lukcon {

enum class AnalysisMode {
  all,      // every block contributes columns; target is the full alpha
  logical,  // logical blocks only; other families folded into the target
};

/// Sign relating multipliers to coefficients.
enum class SignConvention {
  lagrangian,  // M lambda = -alpha, the stationarity condition of the QP
  positive,    // M lambda = +alpha
};

const char* to_string(AnalysisMode m);
const char* to_string(SignConvention c);
AnalysisMode parse_analysis_mode(const std::string& s);
SignConvention parse_sign_convention(const std::string& s);

/// M lambda = target over a subset of the constraint-matrix columns.
struct StationaritySystem {
  Eigen::MatrixXd M;
  Eigen::VectorXd target;
  std::vector<std::size_t> columns;       // system column -> matrix column
  std::vector<std::size_t> column_block;  // system column -> block index
  std::vector<std::string> labels;
  std::vector<bool> active;

  /// System columns belonging to block h (possibly none).
  std::vector<std::size_t> block_columns(std::size_t h) const;
};

/// The coefficient vector the selected multipliers must reproduce. In
/// logical mode the pointwise and consistency contributions, rebuilt from
/// the solver multipliers, are removed first.
Eigen::VectorXd logical_coefficients(const TrainingProblem& tp, const TrainedModel& m,
                                     AnalysisMode mode, SignConvention convention);

StationaritySystem stationarity_system(const TrainingProblem& tp, const TrainedModel& m,
                                       AnalysisMode mode, SignConvention convention);

/// lambda(t) = particular + basis t; zero on inactive columns for every t.
struct GeneralSolution {
  Eigen::VectorXd particular;
  Eigen::MatrixXd basis;  // orthonormal, columns span Ker of the active-restricted M
  std::size_t rank = 0;
  double residual = 0.0;  // ||M particular - target||_2

  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
  Eigen::VectorXd at(const Eigen::VectorXd& t) const { return particular + basis * t; }
};

/// Minimum-norm particular solution on the active columns plus a nullspace
/// basis. Throws InconsistentSystemError when the residual exceeds
/// tol.stationarity.
GeneralSolution solve_stationarity(const Eigen::MatrixXd& M, const Eigen::VectorXd& target,
                               const std::vector<bool>& active, const Tolerances& tol = {});

struct MultiplierCertificate {
  Eigen::VectorXd lambda;
  Eigen::VectorXd t;
  double residual = 0.0;  // ||M lambda - target||_inf
  std::optional<std::size_t> deactivated;
};

/// Linear system over t: E t = d zeroes the given columns of lambda(t),
/// G t <= g keeps every other active column nonnegative.
struct DeactivationSystem {
  Eigen::MatrixXd E;
  Eigen::VectorXd d;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;
};

DeactivationSystem deactivation_system(const GeneralSolution& gs,
                                       const std::vector<std::size_t>& zero_columns,
                                       const std::vector<bool>& active);

/// A nonnegative multiplier vector with the block's columns at zero, or
/// nullopt. `phase_one` receives the phase-1 optimum of the search.
std::optional<MultiplierCertificate> deactivate(const GeneralSolution& gs,
                                                const StationaritySystem& sys,
                                                std::size_t block,
                                                const Tolerances& tol = {},
                                                double* phase_one = nullptr);

/// The same search without the sign constraint: lambda(t) with the block's
/// columns at zero, possibly with negative entries.
std::optional<Eigen::VectorXd> relaxed_deactivation(const GeneralSolution& gs,
                                                    const StationaritySystem& sys,
                                                    std::size_t block,
                                                    const Tolerances& tol = {});

struct EntailmentResult {
  bool entailed = false;
  bool premises_infeasible = false;
  std::vector<double> piece_max;  // LP maximum of each piece of the block
};

/// Does every valuation in [0,1]^S satisfying all other blocks satisfy
/// block h? Decided piece by piece with an LP.
EntailmentResult grounded_entailment(const std::vector<ConstraintBlock>& blocks,
                                     std::size_t h, std::size_t dimension,
                                     const Tolerances& tol = {});

struct SupportSet {
  std::vector<std::size_t> blocks;
  Eigen::VectorXd lambda;  // over the system columns
};

/// All smallest sets of active blocks whose nonnegative multipliers alone
/// satisfy the stationarity system. Throws ResourceLimitError when more
/// than `limit` blocks are active.
std::vector<SupportSet> minimal_support_sets(const StationaritySystem& sys,
                                             const Tolerances& tol = {},
                                             std::size_t limit = 20);

struct AblationRecord {
  std::size_t block = 0;
  std::string block_id;
  double loss_full = 0.0;
  double loss_ablated = 0.0;
  double p_distance = 0.0;  // ||p_full - p_ablated||_inf
  double ablated_max_violation = 0.0;  // of the full constraint set
  bool ablated_feasible_for_full = false;
  Eigen::VectorXd p_full;
  Eigen::VectorXd p_ablated;
};

AblationRecord ablate_and_compare(const TrainingProblem& tp, const TrainedModel& full,
                                  std::size_t h);
AblationRecord ablate_and_compare(const TrainingProblem& tp, std::size_t h);

enum class Verdict { entailed, removable, candidate, necessary, undetermined };

const char* to_string(Verdict v);

struct BlockAnalysis {
  std::size_t block = 0;
  Verdict verdict = Verdict::undetermined;
  bool active = false;
  bool analyzed = false;  // block has columns in the stationarity system
  std::optional<EntailmentResult> entailment;
  std::optional<MultiplierCertificate> certificate;
  std::optional<Eigen::VectorXd> relaxed_certificate;
  double deactivation_phase_one = 0.0;
  std::optional<AblationRecord> ablation;
  std::string note;
};

struct AnalysisOptions {
  AnalysisMode mode = AnalysisMode::all;
  SignConvention convention = SignConvention::lagrangian;
  bool entailment = false;
  bool minimal_sets = false;
  bool ablation = false;
  std::size_t minimal_set_limit = 20;
};

struct AnalysisReport {
  AnalysisOptions options;
  StationaritySystem system;
  std::optional<GeneralSolution> solution;  // absent when inconsistent
  double stationarity_residual = 0.0;
  bool unique = false;
  std::vector<BlockAnalysis> blocks;
  std::optional<std::vector<SupportSet>> minimal_sets;
};

/// Verdict per block: entailed when grounded entailment holds; removable
/// when a deactivation certificate exists and the optimum is unique;
/// candidate for a certificate without uniqueness; necessary when none
/// exists; undetermined when the stationarity system is inconsistent or the
/// block lies outside the analysis mode.
AnalysisReport removable_constraints(const TrainingProblem& tp, const TrainedModel& m,
                                     const AnalysisOptions& opts = {});

}  // namespace lukcon

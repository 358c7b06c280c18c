#pragma once

// JSON problem files, model files and report serialisation.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lukcon/analyze.hpp"
#include "lukcon/train.hpp"

namespace lukcon {

inline constexpr const char* kVersion = "0.1.0";

/// Throws InputError naming the offending section (or the line and column
/// for malformed JSON).
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::filesystem::path& path);

nlohmann::json to_json(const Tolerances& tol);
Tolerances tolerances_from_json(const nlohmann::json& j, Tolerances base = {});
nlohmann::json to_json(const KernelSpec& k);
KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& where);

/// Everything needed to reload the model and predict bit-identically.
nlohmann::json model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const nlohmann::json& j);

nlohmann::json training_report(const TrainingProblem& tp, const TrainedModel& m);
nlohmann::json analysis_report(const TrainingProblem& tp, const TrainedModel& m,
                               const AnalysisReport& rep);
nlohmann::json ablation_report(const TrainingProblem& tp, const AblationRecord& rec);

/// Block manifest: id, family, piece count, source.
nlohmann::json block_manifest(const TrainingProblem& tp);

}  // namespace lukcon

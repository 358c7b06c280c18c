// lukcon: compile, train, analyse and ablate constraint problems from JSON
// problem files.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lukcon/analyze.hpp"
#include "lukcon/compile.hpp"
#include "lukcon/errors.hpp"
#include "lukcon/problem_file.hpp"
#include "lukcon/random.hpp"
#include "lukcon/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lukcon;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInput = 2, kInfeasible = 3, kResource = 4 };

struct TolOverrides {
  std::optional<double> qp, lp, nullspace, activity, entailment, stationarity, feasibility, psd;
  std::optional<int> max_iterations;

  void attach(CLI::App* app) {
    app->add_option("--tol-qp", qp, "QP KKT tolerance");
    app->add_option("--tol-lp", lp, "simplex phase-1 tolerance");
    app->add_option("--tol-nullspace", nullspace, "relative singular-value cutoff");
    app->add_option("--tol-activity", activity, "activity threshold for pieces");
    app->add_option("--tol-entailment", entailment, "entailment LP threshold");
    app->add_option("--tol-stationarity", stationarity, "multiplier residual bound");
    app->add_option("--tol-feasibility", feasibility, "feasibility bound at an optimum");
    app->add_option("--tol-psd", psd, "Gram eigenvalue threshold");
    app->add_option("--max-iterations", max_iterations, "solver iteration cap");
  }

  void apply(Tolerances& t) const {
    auto set = [](double& field, const std::optional<double>& v, const char* name) {
      if (!v) return;
      if (!(*v > 0.0)) throw InputError(std::string("--tol-") + name + " must be positive");
      field = *v;
    };
    set(t.qp, qp, "qp");
    set(t.lp, lp, "lp");
    set(t.nullspace, nullspace, "nullspace");
    set(t.activity, activity, "activity");
    set(t.entailment, entailment, "entailment");
    set(t.stationarity, stationarity, "stationarity");
    set(t.feasibility, feasibility, "feasibility");
    set(t.psd, psd, "psd");
    if (max_iterations) {
      if (*max_iterations < 1) throw InputError("--max-iterations must be positive");
      t.max_iterations = *max_iterations;
    }
  }
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

TrainingProblem load(const std::string& file, const TolOverrides& tol) {
  ProblemSpec spec = load_problem(file);
  tol.apply(spec.tol);
  return assemble_problem(spec);
}

int cmd_compile(const std::string& file, const fs::path& out, const TolOverrides& tol,
                const std::string& constants, const std::string& families) {
  const TrainingProblem tp = load(file, tol);
  if (constants != "keep" && constants != "drop")
    throw InputError("--constants must be keep or drop");
  if (families != "all" && families != "logical")
    throw InputError("--families must be all or logical");
  std::vector<ConstraintBlock> blocks;
  for (const ConstraintBlock& b : tp.blocks)
    if (families == "all" || b.family == ConstraintFamily::logical) blocks.push_back(b);
  const ConstraintMatrix cm =
      assemble_M(blocks, tp.index.size(),
                 constants == "keep" ? ConstantPieces::keep : ConstantPieces::drop);
  write_file(out / "M.csv", matrix_csv(cm, tp.index));
  write_json(out / "manifest.json", block_manifest(tp));
  std::cout << "S=" << tp.index.size() << " N=" << cm.cols() << " blocks=" << tp.blocks.size()
            << "\n";
  return kOk;
}

int cmd_train(const std::string& file, const fs::path& out, const TolOverrides& tol) {
  const TrainingProblem tp = load(file, tol);
  const TrainedModel m = solve_primal(tp);
  write_json(out / "model.json", model_to_json(m));
  write_json(out / "train_report.json", training_report(tp, m));
  std::cout << "loss=" << format_double(m.loss) << "\n";
  return kOk;
}

int cmd_analyze(const std::string& file, const fs::path& out, const TolOverrides& tol,
                const AnalysisOptions& opts) {
  const TrainingProblem tp = load(file, tol);
  const TrainedModel m = solve_primal(tp);
  const AnalysisReport rep = removable_constraints(tp, m, opts);
  write_json(out / "analysis.json", analysis_report(tp, m, rep));
  for (const BlockAnalysis& ba : rep.blocks)
    std::cout << tp.blocks[ba.block].id << " " << to_string(ba.verdict) << "\n";
  return kOk;
}

int cmd_ablate(const std::string& file, const fs::path& out, const TolOverrides& tol,
               const std::string& drop) {
  const TrainingProblem tp = load(file, tol);
  const auto h = tp.find_block(drop);
  if (!h) throw InputError("unknown block id '" + drop + "'");
  const AblationRecord rec = ablate_and_compare(tp, *h);
  write_json(out / "ablation.json", ablation_report(tp, rec));
  std::cout << "loss_full=" << format_double(rec.loss_full)
            << " loss_ablated=" << format_double(rec.loss_ablated)
            << " p_distance=" << format_double(rec.p_distance) << "\n";
  return kOk;
}

int cmd_predict_grid(const std::string& file, const fs::path& out, const TolOverrides& tol,
                     const std::string& model_file, std::vector<std::string> predicates,
                     double lo, double hi, int steps) {
  if (steps < 2) throw InputError("--steps must be at least 2");
  if (!(hi > lo)) throw InputError("--max must exceed --min");
  TrainedModel m;
  if (!model_file.empty()) {
    std::ifstream in(model_file);
    if (!in) throw InputError("cannot read model file '" + model_file + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error&) {
      throw InputError("model file '" + model_file + "' is not valid JSON");
    }
    m = model_from_json(j);
  } else {
    m = solve_primal(load(file, tol));
  }
  if (predicates.empty())
    for (const PredicateModel& pm : m.predicates) predicates.push_back(pm.name);
  std::vector<const PredicateModel*> chosen;
  std::size_t dim = 0;
  for (const std::string& name : predicates) {
    const PredicateModel* found = nullptr;
    for (const PredicateModel& pm : m.predicates)
      if (pm.name == name) found = &pm;
    if (!found) throw InputError("unknown predicate '" + name + "'");
    const std::size_t d = found->points.empty() ? 0 : found->points.front().size();
    if (d != 1 && d != 2) throw InputError("predicate '" + name + "' is not 1- or 2-dimensional");
    if (dim && d != dim) throw InputError("selected predicates differ in input dimension");
    dim = d;
    chosen.push_back(found);
  }

  std::string csv = dim == 1 ? "x" : "x,y";
  for (const PredicateModel* pm : chosen) csv += "," + pm->name;
  csv += "\n";
  auto coord = [&](int i) { return lo + (hi - lo) * i / (steps - 1); };
  for (int i = 0; i < steps; ++i) {
    for (int k = 0; k < (dim == 1 ? 1 : steps); ++k) {
      std::vector<double> x{coord(i)};
      if (dim == 2) x.push_back(coord(k));
      csv += format_double(x[0]);
      if (dim == 2) csv += "," + format_double(x[1]);
      for (const PredicateModel* pm : chosen) csv += "," + format_double(predict(*pm, x));
      csv += "\n";
    }
  }
  write_file(out / "grid.csv", csv);
  return kOk;
}

// Randomised checks of the compiler against direct evaluation and of
// removal verdicts against ablation.
int cmd_selfcheck(std::uint64_t seed, int count, const fs::path& out) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int compile_failures = 0, removal_failures = 0, problems = 0;
  double worst_compile = 0.0;

  for (int n = 0; n < count; ++n) {
    FormulaShape shape;
    shape.predicates = {{"p", {"D"}, ""}, {"q", {"D", "D"}, ""}, {"r", {"D"}, ""}};
    shape.max_depth = 4;
    SampleSets ss;
    Domain d{"D", {}};
    const int ns = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < ns; ++i) d.samples.push_back({"s" + std::to_string(i + 1), {0.0}});
    ss.domains["D"] = d;
    const GroundingIndex idx = build_grounding_index(shape.predicates, ss);
    const Formula f = random_fragment_formula(rng, shape);
    const ConstraintBlock b = compile_formula(f, idx, "f");
    std::vector<double> p(idx.size());
    for (int trial = 0; trial < 200; ++trial) {
      for (double& v : p) v = unit(rng);
      const double truth = eval_lukasiewicz(f, make_interpretation(f, idx, p));
      const double err = std::abs(b.max_value(p) - (1.0 - truth));
      worst_compile = std::max(worst_compile, err);
      if (err > 1e-12) ++compile_failures;
    }
  }

  for (int n = 0; n < count; ++n) {
    const ProblemSpec spec = random_problem(rng);
    const TrainingProblem tp = assemble_problem(spec);
    TrainedModel m;
    try {
      m = solve_primal(tp);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++problems;
    const AnalysisReport rep = removable_constraints(tp, m, {});
    for (const BlockAnalysis& ba : rep.blocks) {
      if (ba.verdict != Verdict::removable && ba.verdict != Verdict::necessary) continue;
      const AblationRecord rec = ablate_and_compare(tp, m, ba.block);
      if (ba.verdict == Verdict::removable && rec.p_distance > 1e-7) ++removal_failures;
      if (ba.verdict == Verdict::necessary && rec.p_distance <= 1e-7 &&
          rec.loss_full - rec.loss_ablated <= 1e-6)
        ++removal_failures;
    }
  }

  const json summary = {{"tool", "lukcon"},
                        {"version", kVersion},
                        {"seed", seed},
                        {"formulas", count},
                        {"compile_failures", compile_failures},
                        {"compile_max_error", worst_compile},
                        {"feasible_problems", problems},
                        {"removal_failures", removal_failures}};
  write_json(out / "selfcheck.json", summary);
  std::cout << summary.dump() << "\n";
  return compile_failures == 0 && removal_failures == 0 ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel machines under Łukasiewicz constraints: compile, train, analyse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string file;
  std::string out_dir = ".";
  TolOverrides tol;

  auto common = [&](CLI::App* sub) {
    sub->add_option("problem", file, "problem file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "output directory");
    tol.attach(sub);
  };

  CLI::App* compile = app.add_subcommand("compile", "write M.csv and the block manifest");
  common(compile);
  std::string constants = "keep", families = "all";
  compile->add_option("--constants", constants, "keep or drop constant pieces")
      ->check(CLI::IsMember({"keep", "drop"}));
  compile->add_option("--families", families, "all or logical")
      ->check(CLI::IsMember({"all", "logical"}));

  CLI::App* train = app.add_subcommand("train", "solve the primal problem");
  common(train);

  CLI::App* analyze = app.add_subcommand("analyze", "classify every constraint block");
  common(analyze);
  AnalysisOptions aopts;
  std::string mode = "all", convention = "lagrangian";
  analyze->add_option("--mode", mode, "all or logical")->check(CLI::IsMember({"all", "logical"}));
  analyze->add_option("--convention", convention, "lagrangian or positive")
      ->check(CLI::IsMember({"lagrangian", "positive"}));
  analyze->add_flag("--minimal-sets", aopts.minimal_sets, "enumerate minimal support sets");
  analyze->add_flag("--entailment", aopts.entailment, "test grounded entailment");
  analyze->add_flag("--ablation", aopts.ablation, "re-solve without each block");
  analyze->add_option("--limit", aopts.minimal_set_limit, "active-block limit for minimal sets");

  CLI::App* ablate = app.add_subcommand("ablate", "compare the optimum with and without a block");
  common(ablate);
  std::string drop;
  ablate->add_option("--drop", drop, "block id to remove")->required();

  CLI::App* grid = app.add_subcommand("predict-grid", "evaluate predicates on a grid");
  common(grid);
  std::string model_file;
  std::vector<std::string> grid_predicates;
  double lo = 0.0, hi = 1.0;
  int steps = 21;
  grid->add_option("--model", model_file, "model file from train (default: train now)");
  grid->add_option("--predicate", grid_predicates, "predicates to evaluate (default: all)");
  grid->add_option("--min", lo, "lower grid bound");
  grid->add_option("--max", hi, "upper grid bound");
  grid->add_option("--steps", steps, "grid points per axis");

  CLI::App* selfcheck = app.add_subcommand("selfcheck", "randomised property checks");
  std::uint64_t seed = 1;
  int count = 20;
  selfcheck->add_option("--seed", seed, "generator seed");
  selfcheck->add_option("--count", count, "instances per check");
  selfcheck->add_option("-o,--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    aopts.mode = parse_analysis_mode(mode);
    aopts.convention = parse_sign_convention(convention);
    const fs::path out(out_dir);
    if (compile->parsed()) return cmd_compile(file, out, tol, constants, families);
    if (train->parsed()) return cmd_train(file, out, tol);
    if (analyze->parsed()) return cmd_analyze(file, out, tol, aopts);
    if (ablate->parsed()) return cmd_ablate(file, out, tol, drop);
    if (grid->parsed())
      return cmd_predict_grid(file, out, tol, model_file, grid_predicates, lo, hi, steps);
    if (selfcheck->parsed()) return cmd_selfcheck(seed, count, out);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\nphase-1 certificate: "
              << format_double(e.phase_one_value()) << "\n";
    return kInfeasible;
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const IterationLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

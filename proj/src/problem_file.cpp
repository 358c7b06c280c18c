#include "lukcon/problem_file.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lukcon/errors.hpp"

namespace lukcon {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing '") + key + "'");
  return *it;
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed,
               const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(where, "unknown key '" + it.key() + "'");
  }
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::vector<std::string> as_strings(const json& j, const std::string& where) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) fail(where, "expected a string or an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_string(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], where);
  return v;
}

json header(const Tolerances& tol) {
  return {{"tool", "lukcon"}, {"version", kVersion}, {"tolerances", to_json(tol)}};
}

json block_json(const ConstraintBlock& b) {
  return {{"id", b.id},
          {"family", to_string(b.family)},
          {"pieces", b.pieces.size()},
          {"source", b.source}};
}

}  // namespace

json to_json(const Tolerances& t) {
  return {{"qp", t.qp},
          {"lp", t.lp},
          {"nullspace", t.nullspace},
          {"activity", t.activity},
          {"entailment", t.entailment},
          {"stationarity", t.stationarity},
          {"nonnegativity", t.nonnegativity},
          {"feasibility", t.feasibility},
          {"psd", t.psd},
          {"max_iterations", t.max_iterations}};
}

Tolerances tolerances_from_json(const json& j, Tolerances t) {
  const std::string where = "options.tolerances";
  only_keys(j, {"qp", "lp", "nullspace", "activity", "entailment", "stationarity",
                "nonnegativity", "feasibility", "psd", "max_iterations"},
            where);
  auto num = [&](const char* key, double& field) {
    if (auto it = j.find(key); it != j.end()) {
      field = as_number(*it, where + "." + key);
      if (!(field > 0.0)) fail(where + "." + key, "must be positive");
    }
  };
  num("qp", t.qp);
  num("lp", t.lp);
  num("nullspace", t.nullspace);
  num("activity", t.activity);
  num("entailment", t.entailment);
  num("stationarity", t.stationarity);
  num("nonnegativity", t.nonnegativity);
  num("feasibility", t.feasibility);
  num("psd", t.psd);
  if (auto it = j.find("max_iterations"); it != j.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1)
      fail(where + ".max_iterations", "must be a positive integer");
    t.max_iterations = it->get<int>();
  }
  return t;
}

json to_json(const KernelSpec& k) {
  json j = {{"kind", to_string(k.kind)}};
  switch (k.kind) {
    case KernelKind::linear: j["offset"] = k.offset; break;
    case KernelKind::polynomial:
      j["offset"] = k.offset;
      j["degree"] = k.degree;
      break;
    case KernelKind::rbf: j["width"] = k.width; break;
  }
  return j;
}

KernelSpec kernel_from_json(const json& j, const std::string& where) {
  only_keys(j, {"kind", "offset", "degree", "width"}, where);
  KernelSpec k;
  try {
    k.kind = parse_kernel_kind(as_string(require(j, "kind", where), where + ".kind"));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
  if (auto it = j.find("offset"); it != j.end()) k.offset = as_number(*it, where + ".offset");
  if (auto it = j.find("degree"); it != j.end()) {
    if (!it->is_number_integer()) fail(where + ".degree", "expected an integer");
    k.degree = it->get<int>();
  }
  if (auto it = j.find("width"); it != j.end()) k.width = as_number(*it, where + ".width");
  try {
    k.validate();
  } catch (const InputError& e) {
    fail(where, e.what());
  }
  return k;
}

ProblemSpec parse_problem(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError("problem file: malformed JSON at line " + std::to_string(line) +
                     ", column " + std::to_string(col));
  }
  only_keys(root, {"description", "domains", "kernels", "predicates", "supervisions",
                   "formulas", "options"},
            "problem file");

  ProblemSpec spec;

  const json& domains = require(root, "domains", "problem file");
  if (!domains.is_object()) fail("domains", "expected an object of domain name -> samples");
  for (auto it = domains.begin(); it != domains.end(); ++it) {
    const std::string where = "domains." + it.key();
    if (!it->is_array()) fail(where, "expected an array of samples");
    Domain d;
    d.name = it.key();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string sw = where + "[" + std::to_string(i) + "]";
      const json& s = (*it)[i];
      only_keys(s, {"name", "coords"}, sw);
      Sample sample;
      sample.name = as_string(require(s, "name", sw), sw + ".name");
      const Eigen::VectorXd c = vec_from(require(s, "coords", sw), sw + ".coords");
      if (c.size() == 0) fail(sw + ".coords", "must not be empty");
      sample.coords.assign(c.data(), c.data() + c.size());
      d.samples.push_back(std::move(sample));
    }
    spec.samples.domains[d.name] = std::move(d);
  }

  if (auto it = root.find("kernels"); it != root.end()) {
    if (!it->is_object()) fail("kernels", "expected an object of kernel id -> spec");
    for (auto k = it->begin(); k != it->end(); ++k)
      spec.kernels[k.key()] = kernel_from_json(*k, "kernels." + k.key());
  }

  const json& preds = require(root, "predicates", "problem file");
  if (!preds.is_array()) fail("predicates", "expected an array");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string where = "predicates[" + std::to_string(i) + "]";
    const json& p = preds[i];
    only_keys(p, {"name", "domains", "kernel", "groundings"}, where);
    PredicateDecl decl;
    decl.name = as_string(require(p, "name", where), where + ".name");
    decl.domains = as_strings(require(p, "domains", where), where + ".domains");
    if (auto k = p.find("kernel"); k != p.end()) {
      decl.kernel = as_string(*k, where + ".kernel");
      if (!spec.kernels.count(decl.kernel))
        fail(where + ".kernel", "unknown kernel '" + decl.kernel + "'");
    }
    if (auto g = p.find("groundings"); g != p.end()) {
      if (!g->is_array()) fail(where + ".groundings", "expected an array of tuples");
      std::vector<SampleTuple> tuples;
      for (std::size_t t = 0; t < g->size(); ++t)
        tuples.push_back(as_strings((*g)[t], where + ".groundings[" + std::to_string(t) + "]"));
      spec.samples.grounding_overrides[decl.name] = std::move(tuples);
    }
    spec.predicates.push_back(std::move(decl));
  }

  if (auto it = root.find("supervisions"); it != root.end()) {
    if (!it->is_array()) fail("supervisions", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "supervisions[" + std::to_string(i) + "]";
      const json& s = (*it)[i];
      only_keys(s, {"predicate", "sample", "tuple", "label"}, where);
      Supervision sv;
      sv.predicate = as_string(require(s, "predicate", where), where + ".predicate");
      const bool has_sample = s.contains("sample");
      const bool has_tuple = s.contains("tuple");
      if (has_sample == has_tuple) fail(where, "give exactly one of 'sample' or 'tuple'");
      sv.tuple = has_sample ? std::vector<std::string>{as_string(s["sample"], where + ".sample")}
                            : as_strings(s["tuple"], where + ".tuple");
      const json& label = require(s, "label", where);
      if (!label.is_number_integer() || (label.get<int>() != 1 && label.get<int>() != -1))
        fail(where + ".label", "must be +1 or -1");
      sv.label = label.get<int>();
      spec.samples.supervisions.push_back(std::move(sv));
    }
  }

  if (auto it = root.find("formulas"); it != root.end()) {
    if (!it->is_array()) fail("formulas", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "formulas[" + std::to_string(i) + "]";
      const json& f = (*it)[i];
      FormulaSpec fs;
      if (f.is_string()) {
        fs.text = f.get<std::string>();
      } else {
        only_keys(f, {"id", "formula"}, where);
        if (f.contains("id")) fs.id = as_string(f["id"], where + ".id");
        fs.text = as_string(require(f, "formula", where), where + ".formula");
      }
      spec.formulas.push_back(std::move(fs));
    }
  }

  if (auto it = root.find("options"); it != root.end()) {
    only_keys(*it, {"bias", "tolerances"}, "options");
    if (auto b = it->find("bias"); b != it->end()) {
      if (!b->is_boolean()) fail("options.bias", "expected true or false");
      spec.bias = b->get<bool>();
    }
    if (auto t = it->find("tolerances"); t != it->end())
      spec.tol = tolerances_from_json(*t, spec.tol);
  }
  return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read problem file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_problem(ss.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

json model_to_json(const TrainedModel& m) {
  json preds = json::array();
  for (const PredicateModel& pm : m.predicates) {
    json points = json::array();
    for (const auto& pt : pm.points) points.push_back(pt);
    preds.push_back({{"name", pm.name},
                     {"kernel", to_json(pm.kernel)},
                     {"tuples", pm.tuple_labels},
                     {"points", points},
                     {"alpha", vec(pm.alpha)},
                     {"bias", pm.bias}});
  }
  return {{"tool", "lukcon"}, {"version", kVersion}, {"loss", m.loss}, {"predicates", preds}};
}

TrainedModel model_from_json(const json& j) {
  TrainedModel m;
  const json& preds = require(j, "predicates", "model");
  if (!preds.is_array()) fail("model.predicates", "expected an array");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string where = "model.predicates[" + std::to_string(i) + "]";
    const json& p = preds[i];
    PredicateModel pm;
    pm.name = as_string(require(p, "name", where), where + ".name");
    pm.kernel = kernel_from_json(require(p, "kernel", where), where + ".kernel");
    pm.tuple_labels = as_strings(require(p, "tuples", where), where + ".tuples");
    const json& points = require(p, "points", where);
    if (!points.is_array()) fail(where + ".points", "expected an array");
    for (const json& pt : points) {
      const Eigen::VectorXd v = vec_from(pt, where + ".points");
      pm.points.emplace_back(v.data(), v.data() + v.size());
    }
    pm.alpha = vec_from(require(p, "alpha", where), where + ".alpha");
    pm.bias = as_number(require(p, "bias", where), where + ".bias");
    if (static_cast<std::size_t>(pm.alpha.size()) != pm.points.size())
      fail(where, "alpha and points differ in length");
    m.predicates.push_back(std::move(pm));
  }
  m.loss = loss(m);
  return m;
}

json block_manifest(const TrainingProblem& tp) {
  json blocks = json::array();
  for (const ConstraintBlock& b : tp.blocks) blocks.push_back(block_json(b));
  json coords = json::array();
  for (std::size_t k = 0; k < tp.index.size(); ++k) coords.push_back(tp.index.label(k));
  json j = header(tp.tol);
  j["coordinates"] = coords;
  j["blocks"] = blocks;
  return j;
}

json training_report(const TrainingProblem& tp, const TrainedModel& m) {
  json j = header(tp.tol);
  j["loss"] = m.loss;
  j["unique"] = m.unique;
  json p = json::array();
  for (std::size_t k = 0; k < tp.index.size(); ++k)
    p.push_back({{"coord", tp.index.label(k)}, {"value", m.p(static_cast<Eigen::Index>(k))}});
  j["p"] = p;
  json alpha = json::array();
  for (const PredicateModel& pm : m.predicates)
    alpha.push_back({{"predicate", pm.name}, {"alpha", vec(pm.alpha)}, {"bias", pm.bias}});
  j["alpha"] = alpha;
  json cols = json::array();
  for (std::size_t c = 0; c < tp.matrix.cols(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    cols.push_back({{"column", tp.matrix.labels[c]},
                    {"value", tp.matrix.M.col(ci).dot(m.p) + tp.matrix.q(ci)},
                    {"active", static_cast<bool>(m.active[c])},
                    {"multiplier", m.mu(ci)}});
  }
  j["pieces"] = cols;
  j["kkt"] = {{"stationarity", m.stationarity},
              {"feasibility", m.feasibility},
              {"slackness", m.slackness},
              {"max_violation", m.max_violation},
              {"iterations", m.iterations}};
  return j;
}

json ablation_report(const TrainingProblem& tp, const AblationRecord& rec) {
  json j = header(tp.tol);
  j["dropped"] = rec.block_id;
  j["loss_full"] = rec.loss_full;
  j["loss_ablated"] = rec.loss_ablated;
  j["loss_delta"] = rec.loss_full - rec.loss_ablated;
  j["p_distance"] = rec.p_distance;
  j["ablated_feasible_for_full"] = rec.ablated_feasible_for_full;
  j["ablated_max_violation"] = rec.ablated_max_violation;
  j["p_full"] = vec(rec.p_full);
  j["p_ablated"] = vec(rec.p_ablated);
  return j;
}

json analysis_report(const TrainingProblem& tp, const TrainedModel& m,
                     const AnalysisReport& rep) {
  json j = header(tp.tol);
  j["mode"] = to_string(rep.options.mode);
  j["convention"] = to_string(rep.options.convention);
  j["unique"] = rep.unique;
  j["loss"] = m.loss;

  const StationaritySystem& sys = rep.system;
  json st = {{"columns", sys.labels},
             {"active", json::array()},
             {"target", vec(sys.target)},
             {"residual", rep.stationarity_residual},
             {"consistent", rep.solution.has_value()}};
  for (bool a : sys.active) st["active"].push_back(a);
  if (rep.solution) {
    st["particular"] = vec(rep.solution->particular);
    st["nullspace_dimension"] = rep.solution->dimension();
    st["rank"] = rep.solution->rank;
  }
  j["stationarity"] = st;

  json blocks = json::array();
  for (const BlockAnalysis& ba : rep.blocks) {
    json b = block_json(tp.blocks[ba.block]);
    b["active"] = ba.active;
    b["verdict"] = to_string(ba.verdict);
    if (!ba.note.empty()) b["note"] = ba.note;
    if (ba.entailment) {
      json maxima = json::array();
      for (double v : ba.entailment->piece_max)
        maxima.push_back(std::isfinite(v) ? json(v) : json(nullptr));
      b["entailment"] = {{"entailed", ba.entailment->entailed},
                         {"premises_infeasible", ba.entailment->premises_infeasible},
                         {"piece_max", maxima}};
    }
    if (ba.certificate)
      b["certificate"] = {{"lambda", vec(ba.certificate->lambda)},
                          {"t", vec(ba.certificate->t)},
                          {"residual", ba.certificate->residual}};
    else if (ba.analyzed)
      b["deactivation_phase_one"] = ba.deactivation_phase_one;
    if (ba.relaxed_certificate) b["relaxed_certificate"] = vec(*ba.relaxed_certificate);
    if (ba.ablation) {
      const AblationRecord& a = *ba.ablation;
      b["ablation"] = {{"loss_full", a.loss_full},
                       {"loss_ablated", a.loss_ablated},
                       {"p_distance", a.p_distance},
                       {"ablated_feasible_for_full", a.ablated_feasible_for_full}};
    }
    blocks.push_back(std::move(b));
  }
  j["blocks"] = blocks;

  if (rep.minimal_sets) {
    json sets = json::array();
    for (const SupportSet& s : *rep.minimal_sets) {
      json ids = json::array();
      for (std::size_t h : s.blocks) ids.push_back(tp.blocks[h].id);
      sets.push_back({{"blocks", ids}, {"lambda", vec(s.lambda)}});
    }
    j["minimal_sets"] = sets;
  }
  return j;
}

}  // namespace lukcon

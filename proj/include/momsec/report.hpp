#pragma once

// Report data model plus the two renderers.  The runner fills these structs;
// JSON output has a stable field order (insertion-ordered) and round-trips
// through a JSON parser, text output prints one line per check with
// PASS/FAIL and the governing number at 12 significant digits.

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace momsec {

inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct CheckLine {
  std::string id;
  std::string metric = "max_residual";  // or "min_singular_ratio"
  double value = 0.0;
  double rms = 0.0;  // meaningful for the max_residual metric only
  int points = 0;
  int components = 0;
  bool pass = true;
  std::vector<double> per_point;
};

struct SectionReport {
  std::string status = "ran";  // or "skipped (<reason>)"
  std::vector<CheckLine> checks;

  bool ran() const { return status == "ran"; }
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct PointReport {
  std::vector<double> x;
  double mu_norm = 0.0;
  int iterations = 0;
  bool regular = false;
  int dim_distribution = 0;
  int dim_level_tangent = 0;
  bool reducible = false;
  double reducibility_residual = 0.0;
  bool dual_holds = false;
  double dual_residual = 0.0;
  bool verdicts_agree = true;
};

struct ExtensionReport {
  std::string name;
  std::string invariance_status = "ok";  // or first precondition violation
  int invariance_points = 0;
  int invariance_rejections = 0;
  double invariance_max = 0.0;
  bool invariance_pass = true;
  bool bracket_seen = false;
  double bracket_min = 0.0;
  double bracket_max = 0.0;
  std::string orbit_status = "ok";
  double orbit_drift = 0.0;
  bool orbit_pass = true;
  bool has_alternative = false;
  std::string independence_status = "ok";
  int independence_points = 0;
  int independence_rejections = 0;
  double independence_max = 0.0;
  bool independence_pass = true;

  bool pass() const {
    return invariance_pass && orbit_pass && independence_pass;
  }
};

struct ReductionReport {
  std::string status = "ran";
  int seeds = 0;
  int accepted = 0;
  int failed = 0;
  int near_singular = 0;
  std::vector<PointReport> points;
  bool reducible_all = true;
  double reducibility_worst = 0.0;
  bool dual_all = true;
  double dual_worst = 0.0;
  bool agreement = true;
  std::string invariants_status = "ran";  // or "skipped (<reason>)"
  std::vector<ExtensionReport> extensions;

  bool ran() const { return status == "ran"; }
  bool pass() const {
    if (!reducible_all || !dual_all || !agreement) return false;
    if (invariants_status == "ran")
      for (const auto& e : extensions)
        if (!e.pass()) return false;
    return true;
  }
};

struct FlatCandidateReport {
  int index = 0;
  bool flat = false;
  double max_residual = 0.0;
};

struct FlatPairReport {
  int first = 0;
  int second = 0;
  double closure_residual = 0.0;
  bool pass = true;
};

struct FlatReport {
  std::string status = "ran";
  std::vector<FlatCandidateReport> candidates;
  std::vector<FlatPairReport> closures;

  bool ran() const { return status == "ran"; }
  bool pass() const {
    for (const auto& c : closures)
      if (!c.pass) return false;
    return true;
  }
};

struct Report {
  int schema_version = 1;
  std::string name;
  std::string structure_kind;  // "poisson" | "symplectic"
  int sample_count = 0;
  std::uint64_t seed = 0;
  double box_lo = 0.0;
  double box_hi = 0.0;
  double tol_on_level = 0.0;
  double tol_subspace = 0.0;
  double tol_residual = 0.0;
  std::vector<std::vector<double>> sample_points;
  SectionReport structure;
  SectionReport algebroid;
  SectionReport conditions;
  std::optional<FlatReport> flat;
  ReductionReport reduction;
  std::vector<std::string> assumptions;

  // A report passes when every stage that actually ran passed; skipped
  // stages neither pass nor fail.
  bool overall_pass() const {
    if (structure.ran() && !structure.pass()) return false;
    if (algebroid.ran() && !algebroid.pass()) return false;
    if (conditions.ran() && !conditions.pass()) return false;
    if (flat && flat->ran() && !flat->pass()) return false;
    if (reduction.ran() && !reduction.pass()) return false;
    return true;
  }
  std::string overall() const { return overall_pass() ? "PASS" : "FAIL"; }
};

// ---------------------------------------------------------------------------
// JSON rendering.

namespace detail {

using rjson = nlohmann::ordered_json;

inline rjson to_json(const CheckLine& c) {
  rjson j;
  j["id"] = c.id;
  j[c.metric] = c.value;
  if (c.metric == "max_residual") {
    j["rms"] = c.rms;
    j["components"] = c.components;
  }
  j["points"] = c.points;
  j["pass"] = c.pass;
  j["per_point"] = c.per_point;
  return j;
}

inline rjson to_json(const SectionReport& s) {
  rjson j;
  j["status"] = s.status;
  if (s.ran())
    j["pass"] = s.pass();
  else
    j["pass"] = nullptr;
  j["checks"] = rjson::array();
  for (const auto& c : s.checks) j["checks"].push_back(to_json(c));
  return j;
}

inline rjson to_json(const PointReport& p) {
  rjson j;
  j["x"] = p.x;
  j["mu_norm"] = p.mu_norm;
  j["iterations"] = p.iterations;
  j["regular"] = p.regular;
  j["dim_distribution"] = p.dim_distribution;
  j["dim_level_tangent"] = p.dim_level_tangent;
  j["reducible"] = p.reducible;
  j["reducibility_residual"] = p.reducibility_residual;
  j["dual_holds"] = p.dual_holds;
  j["dual_residual"] = p.dual_residual;
  j["verdicts_agree"] = p.verdicts_agree;
  return j;
}

inline rjson to_json(const ExtensionReport& e) {
  rjson j;
  j["name"] = e.name;
  rjson inv;
  inv["status"] = e.invariance_status;
  inv["points"] = e.invariance_points;
  inv["rejections"] = e.invariance_rejections;
  inv["max_residual"] = e.invariance_max;
  inv["pass"] = e.invariance_pass;
  j["invariance"] = inv;
  if (e.bracket_seen) {
    rjson br;
    br["min"] = e.bracket_min;
    br["max"] = e.bracket_max;
    j["reduced_bracket"] = br;
  } else {
    j["reduced_bracket"] = nullptr;
  }
  rjson orb;
  orb["status"] = e.orbit_status;
  orb["max_drift"] = e.orbit_drift;
  orb["pass"] = e.orbit_pass;
  j["orbit_constancy"] = orb;
  if (e.has_alternative) {
    rjson ind;
    ind["status"] = e.independence_status;
    ind["points"] = e.independence_points;
    ind["rejections"] = e.independence_rejections;
    ind["max_difference"] = e.independence_max;
    ind["pass"] = e.independence_pass;
    j["extension_independence"] = ind;
  } else {
    j["extension_independence"] = nullptr;
  }
  j["pass"] = e.pass();
  return j;
}

inline rjson to_json(const ReductionReport& r) {
  rjson j;
  j["status"] = r.status;
  if (r.ran())
    j["pass"] = r.pass();
  else
    j["pass"] = nullptr;
  j["seeds"] = r.seeds;
  j["accepted"] = r.accepted;
  j["failed"] = r.failed;
  j["near_singular"] = r.near_singular;
  j["reducible_all"] = r.reducible_all;
  j["reducibility_worst"] = r.reducibility_worst;
  j["dual_all"] = r.dual_all;
  j["dual_worst"] = r.dual_worst;
  j["verdicts_agree"] = r.agreement;
  j["points"] = rjson::array();
  for (const auto& p : r.points) j["points"].push_back(to_json(p));
  j["invariants_status"] = r.invariants_status;
  j["extensions"] = rjson::array();
  for (const auto& e : r.extensions) j["extensions"].push_back(to_json(e));
  return j;
}

inline rjson to_json(const FlatReport& f) {
  rjson j;
  j["status"] = f.status;
  if (f.ran())
    j["pass"] = f.pass();
  else
    j["pass"] = nullptr;
  j["candidates"] = rjson::array();
  for (const auto& c : f.candidates) {
    rjson e;
    e["index"] = c.index;
    e["flat"] = c.flat;
    e["max_residual"] = c.max_residual;
    j["candidates"].push_back(e);
  }
  j["closures"] = rjson::array();
  for (const auto& c : f.closures) {
    rjson e;
    e["pair"] = {c.first, c.second};
    e["max_residual"] = c.closure_residual;
    e["pass"] = c.pass;
    j["closures"].push_back(e);
  }
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const Report& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = r.schema_version;
  j["name"] = r.name;
  j["structure_kind"] = r.structure_kind;
  nlohmann::ordered_json sampling;
  sampling["count"] = r.sample_count;
  sampling["seed"] = r.seed;
  sampling["box"] = {r.box_lo, r.box_hi};
  j["sampling"] = sampling;
  nlohmann::ordered_json tol;
  tol["on_level"] = r.tol_on_level;
  tol["subspace"] = r.tol_subspace;
  tol["residual"] = r.tol_residual;
  j["tolerances"] = tol;
  j["sample_points"] = r.sample_points;
  j["structure_validation"] = detail::to_json(r.structure);
  j["algebroid_validation"] = detail::to_json(r.algebroid);
  j["conditions"] = detail::to_json(r.conditions);
  if (r.flat)
    j["flat_sections"] = detail::to_json(*r.flat);
  else
    j["flat_sections"] = nullptr;
  j["reduction"] = detail::to_json(r.reduction);
  j["assumptions"] = r.assumptions;
  j["overall"] = r.overall();
  return j;
}

// ---------------------------------------------------------------------------
// Text rendering.

namespace detail {

inline void text_check(std::ostream& os, int indent, const std::string& id,
                       bool pass, const std::string& detail) {
  os << std::string(indent, ' ') << std::left << std::setw(30) << id
     << (pass ? "PASS" : "FAIL") << "   " << detail << "\n";
}

inline void text_info(std::ostream& os, int indent, const std::string& id,
                      const std::string& detail) {
  os << std::string(indent, ' ') << std::left << std::setw(30) << id << "       "
     << detail << "\n";
}

inline void text_section(std::ostream& os, const std::string& title,
                         const SectionReport& s) {
  os << title;
  if (!s.ran()) {
    os << "  [" << s.status << "]\n";
    return;
  }
  os << "\n";
  for (const auto& c : s.checks) {
    std::string what = c.metric == "max_residual"
                           ? "max residual " + fmt12(c.value)
                           : "min singular ratio " + fmt12(c.value);
    text_check(os, 2, c.id, c.pass, what);
  }
}

}  // namespace detail

inline std::string report_to_text(const Report& r) {
  std::ostringstream os;
  os << "scenario: " << r.name << "\n";
  os << "structure: " << r.structure_kind << "\n";
  os << "samples: " << r.sample_count << " points, seed " << r.seed
     << ", box [" << fmt12(r.box_lo) << ", " << fmt12(r.box_hi) << "]\n";
  os << "tolerances: on_level " << fmt12(r.tol_on_level) << ", subspace "
     << fmt12(r.tol_subspace) << ", residual " << fmt12(r.tol_residual)
     << "\n\n";
  detail::text_section(os, "structure validation", r.structure);
  detail::text_section(os, "algebroid validation", r.algebroid);
  detail::text_section(os, "conditions", r.conditions);
  if (r.flat) {
    os << "flat sections";
    if (!r.flat->ran()) {
      os << "  [" << r.flat->status << "]\n";
    } else {
      os << "\n";
      for (const auto& c : r.flat->candidates)
        detail::text_info(os, 2, "candidate " + std::to_string(c.index + 1),
                          std::string(c.flat ? "flat" : "not flat") +
                              ", max residual " + fmt12(c.max_residual));
      for (const auto& c : r.flat->closures)
        detail::text_check(os, 2,
                           "closure (" + std::to_string(c.first + 1) + ", " +
                               std::to_string(c.second + 1) + ")",
                           c.pass,
                           "max residual " + fmt12(c.closure_residual));
    }
  }
  const ReductionReport& red = r.reduction;
  os << "reduction";
  if (!red.ran()) {
    os << "  [" << red.status << "]\n";
  } else {
    os << "\n";
    os << "  seeds " << red.seeds << ", accepted " << red.accepted
       << ", failed " << red.failed << ", near singular loci "
       << red.near_singular << "\n";
    detail::text_check(os, 2, "reducibility", red.reducible_all,
                       "worst residual " + fmt12(red.reducibility_worst) +
                           " (" + std::to_string(red.points.size()) +
                           " points)");
    detail::text_check(os, 2, "dual form", red.dual_all,
                       "worst residual " + fmt12(red.dual_worst));
    detail::text_check(os, 2, "verdict agreement", red.agreement,
                       red.agreement
                           ? "direct and dual verdicts agree at every point"
                           : "direct and dual verdicts disagree somewhere");
    if (red.invariants_status != "ran") {
      os << "  invariants  [" << red.invariants_status << "]\n";
    } else {
      for (const auto& e : red.extensions) {
        os << "  extension " << e.name << "\n";
        detail::text_check(
            os, 4, "invariance", e.invariance_pass,
            "max residual " + fmt12(e.invariance_max) + " (" +
                std::to_string(e.invariance_points) + " ok, " +
                std::to_string(e.invariance_rejections) + " rejected" +
                (e.invariance_status == "ok"
                     ? std::string(")")
                     : "; first: " + e.invariance_status + ")"));
        if (e.bracket_seen)
          detail::text_info(os, 4, "reduced bracket",
                            "values in [" + fmt12(e.bracket_min) + ", " +
                                fmt12(e.bracket_max) + "]");
        detail::text_check(os, 4, "orbit constancy", e.orbit_pass,
                           "max drift " + fmt12(e.orbit_drift) +
                               (e.orbit_status == "ok"
                                    ? std::string()
                                    : " (" + e.orbit_status + ")"));
        if (e.has_alternative)
          detail::text_check(
              os, 4, "independence", e.independence_pass,
              "max difference " + fmt12(e.independence_max) + " (" +
                  std::to_string(e.independence_points) + " ok, " +
                  std::to_string(e.independence_rejections) + " rejected" +
                  (e.independence_status == "ok"
                       ? std::string(")")
                       : "; first: " + e.independence_status + ")"));
      }
    }
  }
  os << "assumptions\n";
  for (const auto& a : r.assumptions) os << "  - " << a << "\n";
  os << "\noverall: " << r.overall() << "\n";
  return os.str();
}

}  // namespace momsec

#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "curplus/diagnostics.hpp"
#include "curplus/harness.hpp"
#include "curplus/solver.hpp"
#include "curplus/types.hpp"

namespace curplus {

using json = nlohmann::ordered_json;

inline json to_json(const ExperimentRecord& r) {
  json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["r"] = r.r;
  j["d"] = r.d;
  j["omega_size"] = r.omega_size;
  j["alpha"] = r.alpha;
  j["seed"] = r.seed;
  j["method"] = r.method;
  j["ell_s"] = r.ell_s ? json(*r.ell_s) : json(nullptr);
  j["ell_F"] = r.ell_F ? json(*r.ell_F) : json(nullptr);
  j["rel_frobenius_to_M"] = r.rel_frobenius_to_M;
  j["runtime_ms"] = r.runtime_ms;
  j["converged"] = r.converged;
  j["caps_applied"] = r.caps_applied;
  return j;
}

inline json to_json(const std::vector<ExperimentRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr;
}

inline json to_json(const SweepResult& s) {
  json j;
  j["n"] = s.n;
  j["r"] = s.r;
  j["minimal_d"] = s.minimal_d ? json(*s.minimal_d) : json(nullptr);
  j["minimal_omega"] =
      s.minimal_omega ? json(*s.minimal_omega) : json(nullptr);
  j["trials_per_point"] = s.trials_per_point;
  return j;
}

inline json to_json(const std::vector<SweepResult>& results) {
  json arr = json::array();
  for (const auto& s : results) arr.push_back(to_json(s));
  return arr;
}

inline json to_json(const SolveReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["final_residual"] = r.final_residual;
  j["hessian_min_eig"] =
      r.hessian_min_eig ? json(*r.hessian_min_eig) : json(nullptr);
  j["objective_value"] = r.objective_value;
  j["converged"] = r.converged;
  return j;
}

inline json incoherence_to_json(const IncoherenceReport& rep,
                                bool with_mu_hat) {
  json j;
  j["mu_r"] = rep.mu_r;
  j["mu_hat_r"] = with_mu_hat ? json(rep.mu_hat_r) : json(nullptr);
  j["mu_eta"] = rep.mu_eta;
  j["numerical_rank"] = rep.numerical_rank;
  j["eta"] = rep.eta;
  return j;
}

inline json indices_to_json(const std::vector<Index>& idx) {
  json arr = json::array();
  for (const Index i : idx) arr.push_back(i);
  return arr;
}

}  // namespace curplus

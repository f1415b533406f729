#include "gplag/serialize.hpp"

#include "gplag/error.hpp"

namespace gplag {

namespace {

bool has_nu(Family f) { return f == Family::LMat || f == Family::GneitingMatern; }
bool has_c(Family f) { return f == Family::GneitingMatern || f == Family::GneitingExpSep; }

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw FormatError(std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

}  // namespace

Json estimates_to_json(const MultiParams& p) {
  Json j;
  j["sigma2"] = p.sigma2;
  j["b"] = p.b;
  j["tau2"] = p.tau2;
  if (p.num_series() == 2) {
    j["a"] = p.A(0, 1);
    j["s"] = p.S[1];
  } else {
    Json A = Json::array();
    for (int i = 0; i < p.A.rows(); ++i) {
      Json row = Json::array();
      for (int k = 0; k < p.A.cols(); ++k) row.push_back(p.A(i, k));
      A.push_back(row);
    }
    j["A"] = A;
    j["S"] = std::vector<double>(p.S.data(), p.S.data() + p.S.size());
  }
  return j;
}

Json kernel_to_json(const KernelSpec& spec, const MultiParams& params) {
  Json j = estimates_to_json(params);
  j["family"] = family_name(spec.family);
  if (has_nu(spec.family)) j["nu"] = spec.nu;
  if (has_c(spec.family)) j["c"] = spec.c;
  return j;
}

std::pair<KernelSpec, MultiParams> kernel_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("kernel spec must be a JSON object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw FormatError("missing string field 'family'");
  }
  KernelSpec spec;
  spec.family = parse_family(j.at("family").get<std::string>());
  if (j.contains("nu")) spec.nu = number(j, "nu");
  if (j.contains("c")) spec.c = number(j, "c");
  check_spec(spec);

  MultiParams p;
  p.sigma2 = number(j, "sigma2");
  p.b = number(j, "b");
  p.tau2 = number(j, "tau2");
  if (j.contains("A") || j.contains("S")) {
    if (!j.contains("A") || !j.contains("S")) throw FormatError("'A' and 'S' go together");
    const auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    const auto S = j.at("S").get<std::vector<double>>();
    const auto L = static_cast<Eigen::Index>(S.size());
    if (static_cast<Eigen::Index>(rows.size()) != L) throw FormatError("'A' must be L x L");
    p.A.resize(L, L);
    p.S.resize(L);
    for (Eigen::Index i = 0; i < L; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != L) throw FormatError("'A' must be L x L");
      for (Eigen::Index k = 0; k < L; ++k) p.A(i, k) = rows[i][k];
      p.S[i] = S[i];
    }
  } else {
    p = MultiParams::from_pairwise({p.sigma2, p.b, number(j, "a"), number(j, "s"), p.tau2});
  }
  return {spec, p};
}

Json fit_to_json(const FitResult& fit) {
  Json j;
  j["family"] = family_name(fit.spec.family);
  if (has_nu(fit.spec.family)) j["nu"] = fit.spec.nu;
  if (has_c(fit.spec.family)) j["c"] = fit.spec.c;
  j["estimates"] = estimates_to_json(fit.params);
  j["loglik"] = fit.loglik;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["start_used"] = fit.start_used;
  Json report = Json::array();
  for (const auto& c : fit.constraint_report) {
    report.push_back({{"constraint", c.name},
                      {"parameter", c.parameter},
                      {"indices", c.indices},
                      {"value", c.value}});
  }
  j["constraint_report"] = report;
  Json starts = Json::array();
  for (const auto& s : fit.starts) {
    Json e{{"s_start", s.s_start},
           {"iterations", s.iterations},
           {"converged", s.converged},
           {"message", s.message}};
    e["loglik"] = std::isfinite(s.loglik) ? Json(s.loglik) : Json(nullptr);
    starts.push_back(e);
  }
  j["starts"] = starts;
  return j;
}

FitResult fit_from_json(const Json& j) {
  if (!j.contains("estimates")) throw FormatError("fit result lacks 'estimates'");
  Json kernel = j.at("estimates");
  kernel["family"] = j.at("family");
  if (j.contains("nu")) kernel["nu"] = j.at("nu");
  if (j.contains("c")) kernel["c"] = j.at("c");
  auto [spec, params] = kernel_from_json(kernel);
  FitResult fit;
  fit.spec = spec;
  fit.params = params;
  fit.loglik = j.value("loglik", 0.0);
  fit.iterations = j.value("iterations", 0);
  fit.converged = j.value("converged", false);
  fit.start_used = j.value("start_used", 0);
  return fit;
}

Json summary_to_json(const std::array<ParamSummary, 5>& summary, double acceptance_rate) {
  Json j;
  for (int k = 0; k < 5; ++k) {
    j[kBayesNames[k]] = {{"mean", summary[k].mean},
                         {"median", summary[k].median},
                         {"q025", summary[k].q025},
                         {"q975", summary[k].q975}};
  }
  j["acceptance_rate"] = acceptance_rate;
  return j;
}

}  // namespace gplag

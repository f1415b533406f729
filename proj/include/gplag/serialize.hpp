#pragma once

#include <utility>

#include "json.hpp"

#include "gplag/bayes.hpp"
#include "gplag/inference.hpp"
#include "gplag/kernels.hpp"

namespace gplag {

using Json = nlohmann::json;

/// {"family", "nu"?, "c"?, "sigma2", "b", "a"|"A", "s"|"S", "tau2"}; two-series
/// parameters use the scalar "a"/"s" keys.
Json kernel_to_json(const KernelSpec& spec, const MultiParams& params);
std::pair<KernelSpec, MultiParams> kernel_from_json(const Json& j);

Json estimates_to_json(const MultiParams& params);

/// {"family", "estimates", "loglik", "iterations", "converged", "start_used",
///  "constraint_report", "starts"}.
Json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const Json& j);

Json summary_to_json(const std::array<ParamSummary, 5>& summary, double acceptance_rate);

}  // namespace gplag

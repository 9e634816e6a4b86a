#pragma once

#include <string>

#include "json.hpp"

#include "lcc/assignment.hpp"
#include "lcc/correction.hpp"
#include "lcc/metrics.hpp"

namespace lcc {

using Json = nlohmann::ordered_json;

inline Json assignment_json(const Assignment& a, std::size_t n_cc, std::size_t n_mc) {
    Json alpha = Json::object();
    for (std::size_t c = 0; c < a.alpha.size(); ++c) alpha[std::to_string(c)] = a.alpha[c];
    return Json{{"alpha", alpha}, {"objective", a.objective}, {"n_cc", n_cc}, {"n_mc", n_mc}};
}

inline Json loss_json(const LossReport& r) {
    return Json{{"loss", r.loss}, {"n_corr", r.n_corr}, {"mode", to_string(r.mode)}};
}

inline Json subset_metrics_json(const SubsetMetrics& m) {
    const auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    return Json{{"acc_cc", opt(m.acc_cc)}, {"acc_mc", opt(m.acc_mc)}, {"acc_all", opt(m.acc_all)},
                {"ce_cc", opt(m.ce_cc)},   {"ce_mc", opt(m.ce_mc)},   {"ce_all", opt(m.ce_all)},
                {"n_cc", m.n_cc},          {"n_mc", m.n_mc}};
}

}  // namespace lcc

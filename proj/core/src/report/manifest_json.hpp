#pragma once

#include <string>

#include "common/json_util.hpp"
#include "gradekit/report/ledger.hpp"

namespace gradekit::report {

detail::OrderedJson manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const detail::Json& j, const std::string& where);

}  // namespace gradekit::report

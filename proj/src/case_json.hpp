#pragma once

// Shared JSON rendering of one case result, used by both the golden-file
// writer and the run-results report so the two can never drift.

#include <json.hpp>

#include "bnforge/scenario.hpp"

namespace bnforge::detail {

nlohmann::ordered_json case_to_json(const CaseResult& c, std::size_t index);

} // namespace bnforge::detail

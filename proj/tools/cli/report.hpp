#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ksol/pipeline.hpp"

namespace ksol::cli {

using json = nlohmann::ordered_json;

json to_json(const SolitonParams& p);
json to_json(const CriticalPoint& cp);
json to_json(const LocalSolution& local);
json to_json(const OrbitClass& cls);
json to_json(const OrbitEvent& event);
json to_json(const RatePrediction& pred);
json to_json(const RateReport& rate);
json to_json(const ResidualReport& res);
json to_json(const OriginCheck& check);
json to_json(const IdentityReport& id);
json to_json(const BarrierReport& br);

// Violation counts of every invariant monitor, with the first few offenders.
json monitor_summary(const OrbitTrace& trace, const SolitonParams& p);

// Shortest round-trip decimal form.
std::string num(double v);

// Comma-separated row, LF terminated.
void csv_row(std::ostream& os, const std::vector<std::string>& cells);

}  // namespace ksol::cli

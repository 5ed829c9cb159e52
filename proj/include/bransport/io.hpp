#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "bransport/competitor.hpp"
#include "bransport/components.hpp"
#include "bransport/connectors.hpp"
#include "bransport/solver.hpp"

namespace bransport {

struct ExperimentReport;  // experiment.hpp

using json = nlohmann::json;

// Curves serialize as arrays of coordinate arrays; networks as
// {vertices, edges}; plans as {atoms:[{curve,mass}]}; couplings as
// {pairs:[{src,dst,mass}]}.
json to_json(const PolyCurve& c);
json to_json(const TrafficPlan& p);
json to_json(const Coupling& pi);
json to_json(const DiscreteMeasure& mu);
json network_to_json(const Network& net);
json to_json(const ConnectorReport& rep);
json to_json(const BallCover& cover);
json to_json(const CompetitorBundle& bundle);
json to_json(const SolveResult& res, double alpha);
json to_json(const ComponentDecomposition& dec, double alpha);
json to_json(const ExperimentReport& rep);

PolyCurve curve_from_json(const json& j);
TrafficPlan plan_from_json(const json& j);
Coupling coupling_from_json(const json& j);
DiscreteMeasure measure_from_json(const json& j);

// Canonical form: sorted keys, fixed layout; byte-identical across runs.
std::string canonical_dump(const json& j);
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// CSV emission.
std::string energy_csv(const std::string& instance_id, double alpha, const TrafficPlan& p);
std::string stability_csv(const ExperimentReport& rep);

// SVG renderings with stroke width mult^alpha and deterministic layout.
std::string render_svg(const TrafficPlan& p, double alpha);
std::string render_svg(const ComponentDecomposition& dec, double alpha);

std::uint64_t fnv1a(std::string_view bytes);
// Hash of the plan's support (curves only, masses ignored).
std::uint64_t support_hash(const TrafficPlan& p);

}  // namespace bransport

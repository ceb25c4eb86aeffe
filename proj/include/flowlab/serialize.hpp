#ifndef FLOWLAB_SERIALIZE_HPP
#define FLOWLAB_SERIALIZE_HPP

#include <json.hpp>

#include "flowlab/flow.hpp"
#include "flowlab/geometry.hpp"

namespace flowlab {

nlohmann::json drift_to_json(const DriftField& f);
DriftField drift_from_json(const nlohmann::json& j);

nlohmann::json region_to_json(const Region& r);
Region region_from_json(const nlohmann::json& j);

nlohmann::json flow_config_to_json(const FlowConfig& c);
FlowConfig flow_config_from_json(const nlohmann::json& j);

nlohmann::json flow_result_to_json_tree(const FlowResult& r, std::size_t max_series_points);

} // namespace flowlab

#endif

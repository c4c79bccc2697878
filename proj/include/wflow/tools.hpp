#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wflow/channel.hpp"
#include "wflow/react.hpp"
#include "wflow/telecom.hpp"

namespace wflow::tools {

// Coordinate pairs like "(83.0, 43.5)" pulled out of problem text.
std::vector<Point2> extract_coordinates(const std::string& text);

// Position for channel prediction: an injected predicted position wins,
// then a labeled position, then a single bare coordinate pair.
std::optional<Point2> extract_query_position(const std::string& text);

// Trajectory = every coordinate pair on the "positions" line (or anywhere,
// when at least two pairs are present).
std::optional<std::vector<Point2>> extract_trajectory(const std::string& text);

struct DomainToolsConfig {
    std::vector<std::shared_ptr<channel::ChannelScene>> scenes;  // region lookup
    std::shared_ptr<telecom::FormulaIndex> formula_index;        // optional
};

// Registers ray_tracing, kalman_predictor, telecom_calculator and, when a
// corpus is configured, formula_retriever.
void register_domain_tools(react::ToolRegistry& registry, const DomainToolsConfig& config);

// scene matching the "Region: X" mention in the text, else the first scene
const channel::ChannelScene* scene_for_text(const DomainToolsConfig& config,
                                            const std::string& text);

}  // namespace wflow::tools

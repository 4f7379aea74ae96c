#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "fedgbdt/gbdt.hpp"

namespace fedgbdt {

using ordered_json = nlohmann::ordered_json;

/// Versioned forest document with stable key order, so equal forests always
/// serialize to the same bytes.
ordered_json forest_to_json(const Forest& f);
Forest forest_from_json(const ordered_json& j);

std::string forest_to_string(const Forest& f);
Forest forest_from_string(const std::string& text);

void save_forest(const Forest& f, const std::string& path);
Forest load_forest(const std::string& path);

ordered_json hyper_to_json(const HyperParams& hp);
HyperParams hyper_from_json(const ordered_json& j);

} // namespace fedgbdt

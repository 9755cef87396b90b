#pragma once

#include <cstddef>

#include "json.hpp"

namespace forecast {

// Windowing and grid settings every stage of a pipeline must agree on.
struct Protocol {
  double rate_hz = 2.5;
  std::size_t t_obs = 8;
  std::size_t t_pred = 12;
  std::size_t long_side_cells = 64;

  void validate() const;
  nlohmann::json to_json() const;
  static Protocol from_json(const nlohmann::json& j);
  static Protocol from_json(const nlohmann::json& j, const Protocol& defaults);
  friend bool operator==(const Protocol&, const Protocol&) = default;
};

}  // namespace forecast

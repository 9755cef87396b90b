#include "forecast/protocol.hpp"

#include "forecast/errors.hpp"

namespace forecast {

void Protocol::validate() const {
  if (!(rate_hz > 0.0)) throw ConfigError("rate_hz must be positive");
  if (t_obs < 2) throw ConfigError("t_obs must be at least 2");
  if (t_pred < 1) throw ConfigError("t_pred must be at least 1");
  if (long_side_cells < 2) throw ConfigError("long_side_cells must be at least 2");
}

nlohmann::json Protocol::to_json() const {
  return {{"rate_hz", rate_hz}, {"t_obs", t_obs}, {"t_pred", t_pred}, {"long_side_cells", long_side_cells}};
}

Protocol Protocol::from_json(const nlohmann::json& j, const Protocol& defaults) {
  Protocol p = defaults;
  p.rate_hz = j.value("rate_hz", p.rate_hz);
  p.t_obs = j.value("t_obs", p.t_obs);
  p.t_pred = j.value("t_pred", p.t_pred);
  p.long_side_cells = j.value("long_side_cells", p.long_side_cells);
  p.validate();
  return p;
}

Protocol Protocol::from_json(const nlohmann::json& j) { return from_json(j, Protocol{}); }

}  // namespace forecast

#include "forecast/training_log.hpp"

#include <numeric>
#include <utility>

#include "forecast/errors.hpp"
#include "forecast/rng.hpp"

namespace forecast {

nlohmann::json TrainHyper::to_json() const {
  return {{"epochs", epochs}, {"learning_rate", learning_rate}, {"batch_size", batch_size}, {"seed", seed}};
}

TrainHyper TrainHyper::from_json(const nlohmann::json& j, const TrainHyper& defaults) {
  TrainHyper h = defaults;
  h.epochs = j.value("epochs", h.epochs);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.seed = j.value("seed", h.seed);
  if (h.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(h.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  return h;
}

TrainHyper TrainHyper::from_json(const nlohmann::json& j) { return from_json(j, TrainHyper{}); }

void TrainingLog::record(EpochRecord rec) {
  if (rec.improved) best_epoch = rec.epoch;
  epochs.push_back(rec);
}

nlohmann::json TrainingLog::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochRecord& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"val_loss", e.val_loss},
                    {"best_val_loss", e.best_val_loss},
                    {"improved", e.improved}});
  }
  return {{"component", component},
          {"initial_val_loss", initial_val_loss},
          {"best_epoch", best_epoch},
          {"skipped_steps", skipped_steps},
          {"epochs", rows}};
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, 0x5eed0000ULL + epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  return order;
}

}  // namespace forecast

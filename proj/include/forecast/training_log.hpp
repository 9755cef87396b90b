#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace forecast {

struct TrainHyper {
  std::size_t epochs = 20;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static TrainHyper from_json(const nlohmann::json& j);
  static TrainHyper from_json(const nlohmann::json& j, const TrainHyper& defaults);
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double best_val_loss = 0.0;  // best so far, including this epoch
  bool improved = false;
};

struct TrainingLog {
  std::string component;
  double initial_val_loss = std::numeric_limits<double>::quiet_NaN();
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 0 means the initial parameters were kept
  std::size_t skipped_steps = 0;

  void record(EpochRecord rec);
  nlohmann::json to_json() const;
};

// Visiting order of `n` training items in `epoch`, a seeded shuffle.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

}  // namespace forecast

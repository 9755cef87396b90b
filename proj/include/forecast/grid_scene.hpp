#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "forecast/geometry.hpp"
#include "forecast/image_io.hpp"

namespace forecast {

struct GridSpec {
  std::size_t rows = 64;
  std::size_t cols = 64;
  double cell_size = 1.0;  // world units per cell edge
  Point origin{};          // world position of cell (0,0)'s top-left corner

  // Throws InvalidInput unless rows, cols >= 2 and cell_size > 0.
  void validate() const;

  std::size_t cell_count() const { return rows * cols; }
  double diagonal() const;  // world units
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Longer raster side maps to `long_side_cells` cells; one pixel is
// `world_per_pixel` world units.
GridSpec default_grid_spec(std::size_t raster_width, std::size_t raster_height,
                           double world_per_pixel = 1.0, std::size_t long_side_cells = 64);

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::size_t index_of(Cell c, const GridSpec& spec) {
  return static_cast<std::size_t>(c.row) * spec.cols + static_cast<std::size_t>(c.col);
}
inline Cell cell_at(std::size_t index, const GridSpec& spec) {
  return {static_cast<int>(index / spec.cols), static_cast<int>(index % spec.cols)};
}
inline bool in_bounds(Cell c, const GridSpec& spec) {
  return c.row >= 0 && c.col >= 0 && static_cast<std::size_t>(c.row) < spec.rows &&
         static_cast<std::size_t>(c.col) < spec.cols;
}

// Eight compass moves plus STAY. N decreases the row index.
enum class Action : std::uint8_t { N, NE, E, SE, S, SW, W, NW, Stay };

inline constexpr std::size_t kActionCount = 9;
inline constexpr std::array<Action, kActionCount> kActions = {
    Action::N, Action::NE, Action::E, Action::SE, Action::S,
    Action::SW, Action::W, Action::NW, Action::Stay};

struct Offset {
  int drow;
  int dcol;
};

inline constexpr std::array<Offset, kActionCount> kActionOffsets = {{
    {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {0, 0}}};

inline Offset action_offset(Action a) { return kActionOffsets[static_cast<std::size_t>(a)]; }
std::string_view action_name(Action a);

struct CellLookup {
  Cell cell;
  bool clamped = false;
};

CellLookup world_to_cell(Point pos, const GridSpec& spec);
Point cell_to_world(Cell cell, const GridSpec& spec);

// Deterministic move; off-grid results stay on the source cell.
Cell transition(Cell cell, Action action, const GridSpec& spec);

// Whether `to` is reachable from `from` by one action.
bool is_transition(Cell from, Cell to);

// Dense successor table: next(s, a) for flat cell indices.
class TransitionTable {
 public:
  explicit TransitionTable(const GridSpec& spec);

  std::uint32_t next(std::size_t state, std::size_t action) const {
    return next_[state * kActionCount + action];
  }
  std::span<const std::uint32_t> successors(std::size_t state) const {
    return {next_.data() + state * kActionCount, kActionCount};
  }
  std::size_t states() const { return next_.size() / kActionCount; }

 private:
  std::vector<std::uint32_t> next_;
};

struct GridScene {
  GridSpec spec;
  Image raster;
  std::size_t feature_channels = 0;
  // Channel-major: features[k * rows * cols + r * cols + c].
  std::vector<double> features;
  // rows*cols semantic labels for synthetic scenes, empty otherwise.
  std::vector<int> semantic_labels;

  double feature(std::size_t row, std::size_t col, std::size_t k) const {
    return features[(k * spec.rows + row) * spec.cols + col];
  }
};

// Per-cell features: mean raster channels over the cell followed by the
// channel means of the 3x3 cell neighbourhood (missing neighbours count as
// zero), i.e. 2 * raster.channels features per cell.
GridScene build_grid(const Image& raster, const GridSpec& spec);

// Pixel span [first, last) covered by cell index `i` of `cells` along an
// axis of `pixels` pixels.
inline std::size_t cell_pixel_begin(std::size_t i, std::size_t cells, std::size_t pixels) {
  return i * pixels / cells;
}

}  // namespace forecast

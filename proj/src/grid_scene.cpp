#include "forecast/grid_scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forecast/errors.hpp"

namespace forecast {

void GridSpec::validate() const {
  if (rows < 2 || cols < 2) {
    throw InvalidInput("grid needs at least 2x2 cells, got " + std::to_string(rows) + "x" +
                       std::to_string(cols));
  }
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw InvalidInput("cell_size must be positive");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
    throw InvalidInput("grid origin must be finite");
  }
}

double GridSpec::diagonal() const {
  return cell_size * std::hypot(static_cast<double>(rows), static_cast<double>(cols));
}

GridSpec default_grid_spec(std::size_t raster_width, std::size_t raster_height,
                           double world_per_pixel, std::size_t long_side_cells) {
  const std::size_t longer = std::max(raster_width, raster_height);
  if (longer == 0 || long_side_cells < 2) throw InvalidInput("empty raster");
  const std::size_t cells = std::min(long_side_cells, longer);
  const double pixels_per_cell = static_cast<double>(longer) / static_cast<double>(cells);
  GridSpec spec;
  spec.cell_size = pixels_per_cell * world_per_pixel;
  auto fit = [&](std::size_t px) {
    const auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(px) / pixels_per_cell - 1e-9));
    return std::clamp<std::size_t>(n, 2, std::max<std::size_t>(px, 2));
  };
  spec.cols = fit(raster_width);
  spec.rows = fit(raster_height);
  return spec;
}

std::string_view action_name(Action a) {
  static constexpr std::array<std::string_view, kActionCount> names = {
      "N", "NE", "E", "SE", "S", "SW", "W", "NW", "STAY"};
  return names[static_cast<std::size_t>(a)];
}

CellLookup world_to_cell(Point pos, const GridSpec& spec) {
  const double fc = std::floor((pos.x - spec.origin.x) / spec.cell_size);
  const double fr = std::floor((pos.y - spec.origin.y) / spec.cell_size);
  const double max_r = static_cast<double>(spec.rows - 1);
  const double max_c = static_cast<double>(spec.cols - 1);
  CellLookup out;
  // NaN compares false everywhere and lands on cell 0 with the clamp flag.
  const double r = std::clamp(std::isnan(fr) ? 0.0 : fr, 0.0, max_r);
  const double c = std::clamp(std::isnan(fc) ? 0.0 : fc, 0.0, max_c);
  out.clamped = !(r == fr && c == fc);
  out.cell = {static_cast<int>(r), static_cast<int>(c)};
  return out;
}

Point cell_to_world(Cell cell, const GridSpec& spec) {
  return {spec.origin.x + (cell.col + 0.5) * spec.cell_size,
          spec.origin.y + (cell.row + 0.5) * spec.cell_size};
}

Cell transition(Cell cell, Action action, const GridSpec& spec) {
  const Offset off = action_offset(action);
  const Cell moved{cell.row + off.drow, cell.col + off.dcol};
  return in_bounds(moved, spec) ? moved : cell;
}

bool is_transition(Cell from, Cell to) {
  return std::abs(from.row - to.row) <= 1 && std::abs(from.col - to.col) <= 1;
}

TransitionTable::TransitionTable(const GridSpec& spec) : next_(spec.cell_count() * kActionCount) {
  for (std::size_t s = 0; s < spec.cell_count(); ++s) {
    const Cell c = cell_at(s, spec);
    for (std::size_t a = 0; a < kActionCount; ++a) {
      next_[s * kActionCount + a] = static_cast<std::uint32_t>(index_of(transition(c, kActions[a], spec), spec));
    }
  }
}

GridScene build_grid(const Image& raster, const GridSpec& spec) {
  spec.validate();
  if (raster.channels == 0 || raster.width < spec.cols || raster.height < spec.rows) {
    throw InvalidInput("raster " + std::to_string(raster.width) + "x" + std::to_string(raster.height) +
                       " has fewer pixels than the " + std::to_string(spec.cols) + "x" +
                       std::to_string(spec.rows) + " cell grid");
  }
  const std::size_t rows = spec.rows;
  const std::size_t cols = spec.cols;
  const std::size_t cpx = raster.channels;
  const std::size_t plane = rows * cols;

  std::vector<double> means(cpx * plane, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t y0 = cell_pixel_begin(r, rows, raster.height);
    const std::size_t y1 = cell_pixel_begin(r + 1, rows, raster.height);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t x0 = cell_pixel_begin(c, cols, raster.width);
      const std::size_t x1 = cell_pixel_begin(c + 1, cols, raster.width);
      const double count = static_cast<double>((y1 - y0) * (x1 - x0));
      for (std::size_t k = 0; k < cpx; ++k) {
        double sum = 0.0;
        for (std::size_t y = y0; y < y1; ++y) {
          for (std::size_t x = x0; x < x1; ++x) sum += raster.at(y, x, k);
        }
        means[k * plane + r * cols + c] = sum / count;
      }
    }
  }

  GridScene scene;
  scene.spec = spec;
  scene.raster = raster;
  scene.feature_channels = 2 * cpx;
  scene.features.assign(scene.feature_channels * plane, 0.0);
  std::copy(means.begin(), means.end(), scene.features.begin());
  for (std::size_t k = 0; k < cpx; ++k) {
    const double* src = means.data() + k * plane;
    double* dst = scene.features.data() + (cpx + k) * plane;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const Cell n{static_cast<int>(r) + dr, static_cast<int>(c) + dc};
            if (in_bounds(n, spec)) sum += src[index_of(n, spec)];
          }
        }
        dst[r * cols + c] = sum / 9.0;
      }
    }
  }
  return scene;
}

}  // namespace forecast

#include "forecast/render.hpp"

#include <algorithm>
#include <cmath>

#include "forecast/errors.hpp"

namespace forecast {

ByteImage render_grid(std::span<const double> grid, std::size_t rows, std::size_t cols) {
  if (grid.size() != rows * cols || grid.empty()) throw InvalidInput("grid size does not match its shape");
  double lo = grid[0];
  double hi = grid[0];
  for (double v : grid) {
    if (!std::isfinite(v)) throw InvalidInput("cannot render a grid with non-finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  ByteImage img{cols, rows, 1, std::vector<std::uint8_t>(grid.size(), 128)};
  if (hi > lo) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      img.data[i] = static_cast<std::uint8_t>(std::lround((grid[i] - lo) / (hi - lo) * 255.0));
    }
  }
  return img;
}

namespace {

void draw_polyline(ByteImage& img, const GridSpec& spec, std::span<const Point> pts, Rgb color) {
  const double sx = static_cast<double>(img.width) / (spec.cell_size * static_cast<double>(spec.cols));
  const double sy = static_cast<double>(img.height) / (spec.cell_size * static_cast<double>(spec.rows));
  auto to_px = [&](Point p) {
    return Cell{static_cast<int>(std::floor((p.y - spec.origin.y) * sy)),
                static_cast<int>(std::floor((p.x - spec.origin.x) * sx))};
  };
  auto plot = [&](Cell c) {
    if (c.row < 0 || c.col < 0 || static_cast<std::size_t>(c.row) >= img.height ||
        static_cast<std::size_t>(c.col) >= img.width) {
      return;
    }
    const std::size_t at = (static_cast<std::size_t>(c.row) * img.width + static_cast<std::size_t>(c.col)) * 3;
    std::copy(color.begin(), color.end(), img.data.begin() + static_cast<std::ptrdiff_t>(at));
  };
  if (pts.size() == 1) plot(to_px(pts[0]));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    for (Cell c : bresenham(to_px(pts[i - 1]), to_px(pts[i]))) plot(c);
  }
}

}  // namespace

ByteImage render_overlay(const GridScene& scene, std::span<const Point> past, std::span<const Point> truth,
                         const std::vector<Polyline>& predictions) {
  const Image& r = scene.raster;
  ByteImage img{r.width, r.height, 3, std::vector<std::uint8_t>(r.width * r.height * 3, 0)};
  for (std::size_t y = 0; y < r.height; ++y) {
    for (std::size_t x = 0; x < r.width; ++x) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const double v = r.at(y, x, r.channels == 1 ? 0 : std::min(ch, r.channels - 1));
        img.data[(y * r.width + x) * 3 + ch] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
      }
    }
  }
  for (const Polyline& p : predictions) draw_polyline(img, scene.spec, p, kPredictionColor);
  draw_polyline(img, scene.spec, truth, kTruthColor);
  draw_polyline(img, scene.spec, past, kPastColor);
  return img;
}

void write_render_set(const std::filesystem::path& dir, const GridScene& scene,
                      const ForecastDiagnostics& diagnostics, std::span<const Point> past,
                      std::span<const Point> truth, const PredictionSet& predictions) {
  const std::size_t rows = scene.spec.rows;
  const std::size_t cols = scene.spec.cols;
  auto grid = [&](const char* name, const std::vector<double>& g) {
    write_file_atomic(dir / name, encode_pnm(render_grid(g, rows, cols)));
  };
  grid("goal_heat.pgm", diagnostics.goals.probs);
  grid("reward_scene.pgm", diagnostics.reward.scene);
  grid("reward_motion.pgm", diagnostics.reward.motion);
  grid("reward_total.pgm", diagnostics.reward.total);
  grid("svf.pgm", diagnostics.svf);
  write_file_atomic(dir / "overlay.ppm", encode_pnm(render_overlay(scene, past, truth, predictions.trajectories())));
}

}  // namespace forecast

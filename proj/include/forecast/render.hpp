#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forecast/grid_scene.hpp"
#include "forecast/image_io.hpp"
#include "forecast/pipeline.hpp"

namespace forecast {

// Min-max normalized 8-bit grid, one pixel per cell. Constant grids render
// as 128. Non-finite values are rejected.
ByteImage render_grid(std::span<const double> grid, std::size_t rows, std::size_t cols);

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kPastColor = {230, 30, 30};
inline constexpr Rgb kTruthColor = {255, 255, 255};
inline constexpr Rgb kPredictionColor = {40, 90, 255};

// Scene raster with 1-pixel polylines: predictions first, then truth, then past.
ByteImage render_overlay(const GridScene& scene, std::span<const Point> past, std::span<const Point> truth,
                         const std::vector<Polyline>& predictions);

inline constexpr std::array<const char*, 6> kRenderManifest = {
    "goal_heat.pgm", "reward_scene.pgm", "reward_motion.pgm", "reward_total.pgm", "svf.pgm", "overlay.ppm"};

// Writes every file of kRenderManifest into `dir`.
void write_render_set(const std::filesystem::path& dir, const GridScene& scene,
                      const ForecastDiagnostics& diagnostics, std::span<const Point> past,
                      std::span<const Point> truth, const PredictionSet& predictions);

}  // namespace forecast

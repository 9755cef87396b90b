#include <cmath>

#include "doctest.h"
#include "forecast/errors.hpp"
#include "forecast/grid_scene.hpp"
#include "forecast/image_io.hpp"
#include "forecast/rng.hpp"

using namespace forecast;

namespace {

Image random_image(std::size_t w, std::size_t h, std::size_t c, std::uint64_t seed) {
  Image img(w, h, c);
  Rng rng(seed);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("uniform raster gives 0.5 everywhere in the interior") {
  const Image img(40, 40, 3, 0.5);
  const GridScene s = build_grid(img, GridSpec{10, 10, 1.0, {}});
  CHECK(s.feature_channels == 6);
  for (std::size_t r = 1; r + 1 < 10; ++r)
    for (std::size_t c = 1; c + 1 < 10; ++c)
      for (std::size_t k = 0; k < 6; ++k) CHECK(s.feature(r, c, k) == doctest::Approx(0.5).epsilon(1e-15));
  // Corner neighbourhoods see 4 of 9 cells.
  CHECK(s.feature(0, 0, 3) == doctest::Approx(0.5 * 4.0 / 9.0));
}

TEST_CASE("left/right halves map to per-column means") {
  Image img(8, 8, 1, 0.0);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 4; x < 8; ++x) img.at(y, x, 0) = 1.0;
  const GridScene s = build_grid(img, GridSpec{2, 2, 1.0, {}});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(s.feature(r, 0, 0) == 0.0);
    CHECK(s.feature(r, 1, 0) == 1.0);
  }
}

TEST_CASE("cell means match a direct pixel loop") {
  const Image img = random_image(64, 64, 3, 7);
  const GridSpec spec{16, 16, 1.0, {}};
  const GridScene s = build_grid(img, spec);
  double worst = 0.0;
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        double mean = 0.0;
        for (std::size_t y = 4 * r; y < 4 * r + 4; ++y)
          for (std::size_t x = 4 * c; x < 4 * c + 4; ++x) mean += img.at(y, x, k) / 16.0;
        worst = std::max(worst, std::abs(mean - s.feature(r, c, k)));
        double hood = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = static_cast<int>(r) + dr, cc = static_cast<int>(c) + dc;
            if (rr < 0 || cc < 0 || rr >= 16 || cc >= 16) continue;
            for (int y = 4 * rr; y < 4 * rr + 4; ++y)
              for (int x = 4 * cc; x < 4 * cc + 4; ++x) hood += img.at(y, x, k) / 16.0 / 9.0;
          }
        }
        worst = std::max(worst, std::abs(hood - s.feature(r, c, 3 + k)));
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("features follow a channel permutation block-wise") {
  const Image img = random_image(30, 20, 3, 3);
  Image perm = img;
  const std::size_t p[3] = {2, 0, 1};
  for (std::size_t y = 0; y < 20; ++y)
    for (std::size_t x = 0; x < 30; ++x)
      for (std::size_t k = 0; k < 3; ++k) perm.at(y, x, k) = img.at(y, x, p[k]);
  const GridSpec spec{5, 6, 1.0, {}};
  const GridScene a = build_grid(img, spec), b = build_grid(perm, spec);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 6; ++c)
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(b.feature(r, c, k) == a.feature(r, c, p[k]));
        CHECK(b.feature(r, c, 3 + k) == a.feature(r, c, 3 + p[k]));
      }
}

TEST_CASE("raster smaller than the grid is rejected") {
  CHECK_THROWS_AS(build_grid(Image(3, 10, 1), GridSpec{4, 4, 1.0, {}}), InvalidInput);
  CHECK_THROWS_AS(GridSpec({1, 4, 1.0, {}}).validate(), InvalidInput);
  CHECK_THROWS_AS(GridSpec({4, 4, 0.0, {}}).validate(), InvalidInput);
}

TEST_CASE("default grid maps the longer side to 64 cells") {
  const GridSpec s = default_grid_spec(256, 128);
  CHECK(s.cols == 64);
  CHECK(s.rows == 32);
  CHECK(s.cell_size == 4.0);
}

TEST_CASE("world_to_cell and cell_to_world") {
  const GridSpec spec{10, 10, 2.0, {10, 20}};
  CHECK(world_to_cell({10, 20}, spec).cell == Cell{0, 0});
  const CellLookup l = world_to_cell({10 + 1.5 * 2.0, 20 + 2.5 * 2.0}, spec);
  CHECK(l.cell == Cell{2, 1});
  CHECK_FALSE(l.clamped);
  const CellLookup far = world_to_cell({1e6, -1e6}, spec);
  CHECK(far.clamped);
  CHECK(far.cell == Cell{0, 9});
  const Point p = cell_to_world({3, 7}, spec);
  CHECK(p.x == 25.0);
  CHECK(p.y == 27.0);
  CHECK(cell_to_world({0, 0}, GridSpec{4, 4, 1.0, {}}) == Point{0.5, 0.5});
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) CHECK(world_to_cell(cell_to_world({r, c}, spec), spec).cell == Cell{r, c});
}

TEST_CASE("transitions are total and clamp at walls") {
  const GridSpec spec{5, 7, 1.0, {}};
  CHECK(transition({0, 0}, Action::N, spec) == Cell{0, 0});
  CHECK(transition({2, 2}, Action::SE, spec) == Cell{3, 3});
  const TransitionTable table(spec);
  for (std::size_t s = 0; s < spec.cell_count(); ++s) {
    const Cell c = cell_at(s, spec);
    CHECK(transition(c, Action::Stay, spec) == c);
    for (std::size_t a = 0; a < kActionCount; ++a) {
      const Cell n = transition(c, kActions[a], spec);
      CHECK(in_bounds(n, spec));
      CHECK(is_transition(c, n));
      CHECK(table.next(s, a) == index_of(n, spec));
    }
  }
}

TEST_CASE("PPM encode/decode round trip") {
  Image img(5, 3, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<double>(i % 256) / 255.0;
  const ByteImage b = decode_pnm(encode_ppm(img));
  REQUIRE(b.width == 5);
  REQUIRE(b.height == 3);
  REQUIRE(b.channels == 3);
  for (std::size_t i = 0; i < b.data.size(); ++i) CHECK(b.data[i] == i % 256);
  CHECK_THROWS(decode_pnm("P6\n2 2\n255\n\x01"));
}

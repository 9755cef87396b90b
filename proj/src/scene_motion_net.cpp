#include "forecast/scene_motion_net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "forecast/errors.hpp"

namespace forecast {

using nn::FeatureMap;
using nn::Vec;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kConv1 = 8;
constexpr std::size_t kConv2 = 16;
}  // namespace

// ---------------------------------------------------------------------------
// Bins

PolarBins PolarBins::for_grid(const GridSpec& spec, std::size_t d, std::size_t o) {
  if (d < 2 || o < 2) throw InvalidInput("polar bins need at least 2 distances and 2 orientations");
  PolarBins bins;
  const double reach = spec.diagonal() / 2.0;
  for (std::size_t j = 0; j < d; ++j) bins.distances.push_back(reach * static_cast<double>(j) / static_cast<double>(d - 1));
  for (std::size_t k = 0; k < o; ++k) bins.orientations.push_back(kTwoPi * static_cast<double>(k) / static_cast<double>(o));
  return bins;
}

void PolarBins::validate() const {
  if (d() < 2 || o() < 2) throw InvalidInput("polar bins need at least 2 distances and 2 orientations");
  for (std::size_t j = 1; j < d(); ++j) {
    if (!(distances[j] > distances[j - 1])) throw InvalidInput("distance bin centres must increase");
  }
  const double step = kTwoPi / static_cast<double>(o());
  for (std::size_t k = 0; k < o(); ++k) {
    if (std::abs(orientations[k] - orientations[0] - step * static_cast<double>(k)) > 1e-9) {
      throw InvalidInput("orientation bin centres must be equally spaced");
    }
  }
  if (orientations[0] < 0.0 || orientations[0] >= step) {
    throw InvalidInput("first orientation bin centre must lie in [0, 2pi / O)");
  }
}

nlohmann::json PolarBins::to_json() const {
  return {{"distances", distances}, {"orientations", orientations}};
}

PolarBins PolarBins::from_json(const nlohmann::json& j) {
  PolarBins b;
  b.distances = j.at("distances").get<std::vector<double>>();
  b.orientations = j.at("orientations").get<std::vector<double>>();
  b.validate();
  return b;
}

// ---------------------------------------------------------------------------
// Agent frame and polar interpolation

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

AgentFrame agent_frame(std::span<const Point> past) {
  FORECAST_EXPECT(!past.empty(), "agent frame needs at least one point");
  AgentFrame f;
  f.position = past.back();
  f.stationary = true;
  for (std::size_t i = past.size() - 1; i > 0; --i) {
    const Point d = past[i] - past[i - 1];
    if (d.x != 0.0 || d.y != 0.0) {
      f.heading = std::atan2(d.y, d.x);
      f.stationary = false;
      break;
    }
  }
  return f;
}

PolarStencil polar_stencil(const PolarBins& bins, const AgentFrame& frame, const GridSpec& spec) {
  const std::size_t D = bins.d();
  const std::size_t O = bins.o();
  const double step = kTwoPi / static_cast<double>(O);
  PolarStencil st;
  st.taps.resize(spec.cell_count());
  for (std::size_t i = 0; i < spec.cell_count(); ++i) {
    const Point c = cell_to_world(cell_at(i, spec), spec);
    const Point v = c - frame.position;
    const double dist = norm(v);

    std::size_t j0 = 0;
    std::size_t j1 = 0;
    double wd = 0.0;
    if (dist >= bins.distances.back()) {
      j0 = j1 = D - 1;
    } else if (dist <= bins.distances.front()) {
      j0 = j1 = 0;
    } else {
      j0 = static_cast<std::size_t>(std::upper_bound(bins.distances.begin(), bins.distances.end(), dist) -
                                    bins.distances.begin()) - 1;
      j1 = j0 + 1;
      wd = (dist - bins.distances[j0]) / (bins.distances[j1] - bins.distances[j0]);
    }

    const double theta = wrap_angle(std::atan2(v.y, v.x) - frame.heading - bins.orientations[0]);
    const double u = theta / step;
    const double fl = std::floor(u);
    std::size_t k0 = static_cast<std::size_t>(fl) % O;
    const double wo = u - fl;
    const std::size_t k1 = (k0 + 1) % O;

    PolarStencil::Tap& t = st.taps[i];
    t.index = {static_cast<std::uint32_t>(j0 * O + k0), static_cast<std::uint32_t>(j0 * O + k1),
               static_cast<std::uint32_t>(j1 * O + k0), static_cast<std::uint32_t>(j1 * O + k1)};
    t.weight = {(1.0 - wd) * (1.0 - wo), (1.0 - wd) * wo, wd * (1.0 - wo), wd * wo};
  }
  return st;
}

std::vector<double> polar_to_grid(std::span<const double> activations, const PolarStencil& stencil) {
  std::vector<double> out(stencil.taps.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& t = stencil.taps[i];
    double s = 0.0;
    for (std::size_t q = 0; q < 4; ++q) s += t.weight[q] * activations[t.index[q]];
    out[i] = s;
  }
  return out;
}

void polar_to_grid_backward(std::span<const double> dgrid, const PolarStencil& stencil,
                            std::span<double> dactivations) {
  FORECAST_EXPECT(dgrid.size() == stencil.taps.size(), "polar gradient size mismatch");
  for (std::size_t i = 0; i < dgrid.size(); ++i) {
    const auto& t = stencil.taps[i];
    for (std::size_t q = 0; q < 4; ++q) dactivations[t.index[q]] += t.weight[q] * dgrid[i];
  }
}

std::vector<Vec> motion_inputs(std::span<const Point> past, const AgentFrame& frame, double cell_size) {
  const double c = std::cos(frame.heading);
  const double s = std::sin(frame.heading);
  std::vector<Vec> xs;
  for (std::size_t i = 1; i < past.size(); ++i) {
    const Point d = past[i] - past[i - 1];
    xs.push_back({(c * d.x + s * d.y) / cell_size, (-s * d.x + c * d.y) / cell_size});
  }
  return xs;
}

// ---------------------------------------------------------------------------
// Network

SceneMotionNet::SceneMotionNet(std::size_t channels, PolarBins b, std::uint64_t seed)
    : feature_channels(channels), bins(std::move(b)) {
  if (channels == 0) throw InvalidInput("scene features need at least one channel");
  bins.validate();
  nn::add_conv3x3(params, "scene.conv1", feature_channels, kConv1);
  nn::add_conv3x3(params, "scene.conv2", kConv1, kConv2);
  nn::add_conv3x3(params, "scene.conv3", kConv2, 1);
  nn::add_gru(params, "motion.gru", 2, kHidden);
  nn::add_dense(params, "motion.head", kHidden, bins.size());
  params.initialize(seed);
}

nlohmann::json SceneMotionNet::config_json() const {
  return {{"feature_channels", feature_channels}, {"hidden", kHidden}, {"bins", bins.to_json()}};
}

SceneMotionNet SceneMotionNet::from_config(const nlohmann::json& config) {
  if (config.value("hidden", kHidden) != kHidden) throw InvalidInput("unsupported motion hidden size");
  SceneMotionNet net(config.at("feature_channels").get<std::size_t>(),
                     PolarBins::from_json(config.at("bins")), 0);
  for (auto& [name, e] : net.params.entries()) e.value.fill(0.0);
  return net;
}

namespace {

FeatureMap relu(const FeatureMap& x) {
  FeatureMap y = x;
  for (double& v : y.data) v = std::max(v, 0.0);
  return y;
}

void relu_backward(const FeatureMap& pre, FeatureMap& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    if (pre.data[i] <= 0.0) grad.data[i] = 0.0;
  }
}

}  // namespace

std::vector<double> scene_forward(const SceneMotionNet& net, const GridScene& scene, SceneCache* cache) {
  FORECAST_EXPECT(scene.feature_channels == net.feature_channels,
                  "scene has " + std::to_string(scene.feature_channels) + " feature channels, model expects " +
                      std::to_string(net.feature_channels));
  const auto& p = net.params;
  FeatureMap x(scene.feature_channels, scene.spec.rows, scene.spec.cols);
  x.data = scene.features;
  FeatureMap pre1 = nn::conv3x3_forward(x, p.value("scene.conv1.K"), p.value("scene.conv1.b"));
  FeatureMap act1 = relu(pre1);
  FeatureMap pre2 = nn::conv3x3_forward(act1, p.value("scene.conv2.K"), p.value("scene.conv2.b"));
  FeatureMap act2 = relu(pre2);
  FeatureMap out = nn::conv3x3_forward(act2, p.value("scene.conv3.K"), p.value("scene.conv3.b"));
  if (cache != nullptr) {
    cache->input = std::move(x);
    cache->pre1 = std::move(pre1);
    cache->act1 = std::move(act1);
    cache->pre2 = std::move(pre2);
    cache->act2 = std::move(act2);
  }
  return std::move(out.data);
}

void scene_backward(SceneMotionNet& net, const SceneCache& cache, std::span<const double> dout) {
  auto& p = net.params;
  FeatureMap d3(1, cache.input.rows, cache.input.cols);
  FORECAST_EXPECT(dout.size() == d3.data.size(), "scene gradient size mismatch");
  std::copy(dout.begin(), dout.end(), d3.data.begin());
  FeatureMap d2 = nn::conv3x3_backward(cache.act2, p.value("scene.conv3.K"), d3, p.grad("scene.conv3.K"),
                                       p.grad("scene.conv3.b"));
  relu_backward(cache.pre2, d2);
  FeatureMap d1 = nn::conv3x3_backward(cache.act1, p.value("scene.conv2.K"), d2, p.grad("scene.conv2.K"),
                                       p.grad("scene.conv2.b"));
  relu_backward(cache.pre1, d1);
  nn::conv3x3_backward(cache.input, p.value("scene.conv1.K"), d1, p.grad("scene.conv1.K"),
                       p.grad("scene.conv1.b"), false);
}

std::vector<double> motion_forward(const SceneMotionNet& net, const GridSpec& spec,
                                   std::span<const Point> past, MotionCache* cache) {
  const AgentFrame frame = agent_frame(past);
  if (frame.stationary) {
    if (cache != nullptr) {
      *cache = MotionCache{};
      cache->frame = frame;
    }
    return std::vector<double>(spec.cell_count(), 0.0);
  }
  const auto& p = net.params;
  const nn::GruRef gru = nn::gru_ref(p, "motion.gru");
  std::vector<nn::GruCache> steps;
  Vec h(SceneMotionNet::kHidden, 0.0);
  for (const Vec& x : motion_inputs(past, frame, spec.cell_size)) {
    nn::GruCache c;
    h = nn::gru_step(gru, x, h, cache != nullptr ? &c : nullptr);
    if (cache != nullptr) steps.push_back(std::move(c));
  }
  Vec act = nn::dense_forward(h, p.value("motion.head.W"), p.value("motion.head.b"));
  PolarStencil stencil = polar_stencil(net.bins, frame, spec);
  std::vector<double> grid = polar_to_grid(act, stencil);
  if (cache != nullptr) {
    cache->frame = frame;
    cache->stencil = std::move(stencil);
    cache->steps = std::move(steps);
    cache->hidden = std::move(h);
    cache->activations = std::move(act);
  }
  return grid;
}

void motion_backward(SceneMotionNet& net, const MotionCache& cache, std::span<const double> dout) {
  if (cache.frame.stationary) return;
  auto& p = net.params;
  Vec dact(net.bins.size(), 0.0);
  polar_to_grid_backward(dout, cache.stencil, dact);
  Vec dh = nn::dense_backward(cache.hidden, p.value("motion.head.W"), dact, p.grad("motion.head.W"),
                              p.grad("motion.head.b"));
  const nn::GruRef gru = nn::gru_ref(p, "motion.gru");
  nn::GruGradRef grads = nn::gru_grad_ref(p, "motion.gru");
  for (std::size_t t = cache.steps.size(); t-- > 0;) {
    dh = nn::gru_step_backward(gru, cache.steps[t], dh, grads).dh;
  }
}

}  // namespace forecast

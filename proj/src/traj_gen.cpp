#include "forecast/traj_gen.hpp"

#include <algorithm>
#include <cmath>

#include "forecast/errors.hpp"
#include "forecast/nn/checkpoint.hpp"
#include "forecast/nn/optim.hpp"

namespace forecast {

using nn::Vec;

namespace {

void declare(nn::ParamSet& p) {
  using G = TrajGenerator;
  nn::add_gru(p, "past.gru", 2, G::kPastHidden);
  nn::add_dense(p, "past.init", G::kPastHidden, G::kDecoderHidden);
  nn::add_gru(p, "wp.fwd", 2, G::kWaypointHidden);
  nn::add_gru(p, "wp.bwd", 2, G::kWaypointHidden);
  nn::add_gru(p, "dec.gru", 2 + G::kKey, G::kDecoderHidden);
  nn::add_attention(p, "dec.attn", G::kDecoderHidden, G::kKey, G::kAttention);
  nn::add_dense(p, "dec.out", G::kDecoderHidden, 2);
}

std::vector<Vec> step_displacements(std::span<const Point> past, double scale) {
  std::vector<Vec> out;
  for (std::size_t i = 1; i < past.size(); ++i) {
    const Point d = past[i] - past[i - 1];
    out.push_back({d.x / scale, d.y / scale});
  }
  return out;
}

struct PastPass {
  std::vector<nn::GruCache> steps;
  Vec hidden;
  Vec h0;
};

struct WaypointPass {
  std::vector<nn::GruCache> fwd;
  std::vector<nn::GruCache> bwd;  // in processing order (last waypoint first)
  std::vector<Vec> keys;
};

struct DecodeStep {
  Vec h_prev;
  nn::AttentionCache attn;
  nn::GruCache gru;
  Vec h;
};

struct DecodePass {
  std::vector<DecodeStep> steps;
  std::vector<Vec> deltas;
};

PastPass run_past(const nn::ParamSet& p, std::span<const Point> past, double scale, bool keep) {
  FORECAST_EXPECT(past.size() >= 2, "past track needs at least 2 points");
  FORECAST_EXPECT(scale > 0.0, "normalization scale must be positive");
  PastPass out;
  const nn::GruRef gru = nn::gru_ref(p, "past.gru");
  Vec h(TrajGenerator::kPastHidden, 0.0);
  for (const Vec& x : step_displacements(past, scale)) {
    nn::GruCache c;
    h = nn::gru_step(gru, x, h, keep ? &c : nullptr);
    if (keep) out.steps.push_back(std::move(c));
  }
  out.h0 = nn::dense_forward(h, p.value("past.init.W"), p.value("past.init.b"));
  for (double& v : out.h0) v = std::tanh(v);
  out.hidden = std::move(h);
  return out;
}

WaypointPass run_waypoints(const nn::ParamSet& p, const std::vector<Vec>& wps, bool keep) {
  FORECAST_EXPECT(!wps.empty(), "waypoint sequence is empty");
  const std::size_t m = wps.size();
  const std::size_t H = TrajGenerator::kWaypointHidden;
  WaypointPass out;
  out.keys.assign(m, Vec(2 * H, 0.0));
  const nn::GruRef fwd = nn::gru_ref(p, "wp.fwd");
  const nn::GruRef bwd = nn::gru_ref(p, "wp.bwd");
  Vec h(H, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    nn::GruCache c;
    h = nn::gru_step(fwd, wps[i], h, keep ? &c : nullptr);
    if (keep) out.fwd.push_back(std::move(c));
    std::copy(h.begin(), h.end(), out.keys[i].begin());
  }
  h.assign(H, 0.0);
  for (std::size_t i = m; i-- > 0;) {
    nn::GruCache c;
    h = nn::gru_step(bwd, wps[i], h, keep ? &c : nullptr);
    if (keep) out.bwd.push_back(std::move(c));
    std::copy(h.begin(), h.end(), out.keys[i].begin() + static_cast<std::ptrdiff_t>(H));
  }
  return out;
}

DecodePass run_decoder(const nn::ParamSet& p, const Vec& h0, const std::vector<Vec>& keys,
                       const Vec& first_input, std::size_t t_pred, bool keep, DecodeTrace* trace) {
  FORECAST_EXPECT(!keys.empty(), "decoder needs at least one key");
  FORECAST_EXPECT(first_input.size() == 2, "decoder input must be a 2-vector");
  const nn::AttentionRef att = nn::attention_ref(p, "dec.attn");
  const nn::GruRef gru = nn::gru_ref(p, "dec.gru");
  DecodePass out;
  Vec h = h0;
  Vec prev = first_input;
  Vec input(2 + TrajGenerator::kKey);
  for (std::size_t t = 0; t < t_pred; ++t) {
    DecodeStep st;
    const nn::AttentionResult a = nn::additive_attention(att, h, keys, keep ? &st.attn : nullptr);
    if (trace != nullptr) trace->attention.push_back(a.weights);
    input[0] = prev[0];
    input[1] = prev[1];
    std::copy(a.context.begin(), a.context.end(), input.begin() + 2);
    Vec hn = nn::gru_step(gru, input, h, keep ? &st.gru : nullptr);
    Vec delta = nn::dense_forward(hn, p.value("dec.out.W"), p.value("dec.out.b"));
    if (keep) {
      st.h_prev = std::move(h);
      st.h = hn;
      out.steps.push_back(std::move(st));
    }
    h = std::move(hn);
    prev = delta;
    out.deltas.push_back(std::move(delta));
  }
  return out;
}

}  // namespace

TrajGenerator::TrajGenerator() { declare(params); }

TrajGenerator::TrajGenerator(std::uint64_t seed) {
  declare(params);
  params.initialize(seed);
}

nlohmann::json TrajGenerator::config_json() const {
  return {{"past_hidden", kPastHidden},
          {"waypoint_hidden", kWaypointHidden},
          {"decoder_hidden", kDecoderHidden},
          {"attention", kAttention}};
}

std::vector<Vec> normalize_points(std::span<const Point> points, Point anchor, double scale) {
  std::vector<Vec> out;
  out.reserve(points.size());
  for (const Point& q : points) out.push_back({(q.x - anchor.x) / scale, (q.y - anchor.y) / scale});
  return out;
}

Vec encode_past(const TrajGenerator& gen, std::span<const Point> past, double scale) {
  return run_past(gen.params, past, scale, false).h0;
}

std::vector<Vec> encode_waypoints(const TrajGenerator& gen, const std::vector<Vec>& waypoints) {
  return run_waypoints(gen.params, waypoints, false).keys;
}

std::vector<Vec> decode_trajectory(const TrajGenerator& gen, const Vec& h0, const std::vector<Vec>& keys,
                                   const Vec& first_input, std::size_t t_pred, DecodeTrace* trace) {
  return run_decoder(gen.params, h0, keys, first_input, t_pred, false, trace).deltas;
}

Polyline generate_trajectory(const TrajGenerator& gen, std::span<const Point> past,
                             std::span<const Point> waypoints, std::size_t t_pred, double scale,
                             DecodeTrace* trace) {
  const Point anchor = past.back();
  const Vec h0 = encode_past(gen, past, scale);
  const std::vector<Vec> keys = encode_waypoints(gen, normalize_points(waypoints, anchor, scale));
  const Point last = past[past.size() - 1] - past[past.size() - 2];
  const auto deltas = decode_trajectory(gen, h0, keys, {last.x / scale, last.y / scale}, t_pred, trace);
  Polyline out;
  double x = 0.0;
  double y = 0.0;
  for (const Vec& d : deltas) {
    x += d[0];
    y += d[1];
    out.push_back({anchor.x + x * scale, anchor.y + y * scale});
  }
  return out;
}

double traj_loss(TrajGenerator& gen, std::span<const TrajSample> samples, bool accumulate_grad) {
  if (samples.empty()) return 0.0;
  auto& p = gen.params;
  const double weight = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;
  for (const TrajSample& s : samples) {
    const std::size_t T = s.future.size();
    FORECAST_EXPECT(T >= 1, "sample " + s.id + " has no future points");
    const Point anchor = s.past.back();
    const PastPass past = run_past(p, s.past, s.scale, accumulate_grad);
    const std::vector<Vec> wps = normalize_points(s.waypoints, anchor, s.scale);
    const WaypointPass wp = run_waypoints(p, wps, accumulate_grad);
    const Point last = s.past[s.past.size() - 1] - s.past[s.past.size() - 2];
    const DecodePass dec =
        run_decoder(p, past.h0, wp.keys, {last.x / s.scale, last.y / s.scale}, T, accumulate_grad, nullptr);
    const std::vector<Vec> truth = normalize_points(s.future, anchor, s.scale);

    // Cumulative positions and per-step position errors.
    std::vector<Vec> err(T, Vec(2));
    double px = 0.0;
    double py = 0.0;
    double sq = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      px += dec.deltas[t][0];
      py += dec.deltas[t][1];
      err[t] = {px - truth[t][0], py - truth[t][1]};
      sq += err[t][0] * err[t][0] + err[t][1] * err[t][1];
    }
    const double norm = 1.0 / (2.0 * static_cast<double>(T));
    total += weight * norm * sq;
    if (!accumulate_grad) continue;

    // dL/d delta_t = sum over s >= t of dL/d position_s.
    std::vector<Vec> ddelta(T, Vec(2, 0.0));
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      sx += 2.0 * weight * norm * err[t][0];
      sy += 2.0 * weight * norm * err[t][1];
      ddelta[t] = {sx, sy};
    }

    const nn::AttentionRef att = nn::attention_ref(p, "dec.attn");
    nn::AttentionGradRef att_g = nn::attention_grad_ref(p, "dec.attn");
    const nn::GruRef dgru = nn::gru_ref(p, "dec.gru");
    nn::GruGradRef dgru_g = nn::gru_grad_ref(p, "dec.gru");
    std::vector<Vec> dkeys(wp.keys.size(), Vec(TrajGenerator::kKey, 0.0));
    Vec dh_next(TrajGenerator::kDecoderHidden, 0.0);
    Vec dprev_next(2, 0.0);
    for (std::size_t t = T; t-- > 0;) {
      const DecodeStep& st = dec.steps[t];
      Vec dd = ddelta[t];
      dd[0] += dprev_next[0];
      dd[1] += dprev_next[1];
      Vec dh = nn::dense_backward(st.h, p.value("dec.out.W"), dd, p.grad("dec.out.W"), p.grad("dec.out.b"));
      for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh_next[i];
      const nn::GruInputGrads g = nn::gru_step_backward(dgru, st.gru, dh, dgru_g);
      dprev_next = {g.dx[0], g.dx[1]};
      const Vec dctx(g.dx.begin() + 2, g.dx.end());
      const Vec dq = nn::additive_attention_backward(att, st.attn, wp.keys, dctx, dkeys, att_g);
      dh_next = g.dh;
      for (std::size_t i = 0; i < dq.size(); ++i) dh_next[i] += dq[i];
    }

    // Decoder initial state: h0 = tanh(W hidden + b).
    Vec da(dh_next.size());
    for (std::size_t i = 0; i < da.size(); ++i) da[i] = dh_next[i] * (1.0 - past.h0[i] * past.h0[i]);
    Vec dhp = nn::dense_backward(past.hidden, p.value("past.init.W"), da, p.grad("past.init.W"),
                                 p.grad("past.init.b"));
    {
      const nn::GruRef g = nn::gru_ref(p, "past.gru");
      nn::GruGradRef gg = nn::gru_grad_ref(p, "past.gru");
      for (std::size_t t = past.steps.size(); t-- > 0;) dhp = nn::gru_step_backward(g, past.steps[t], dhp, gg).dh;
    }

    const std::size_t H = TrajGenerator::kWaypointHidden;
    const std::size_t m = wp.keys.size();
    {
      const nn::GruRef g = nn::gru_ref(p, "wp.fwd");
      nn::GruGradRef gg = nn::gru_grad_ref(p, "wp.fwd");
      Vec carry(H, 0.0);
      for (std::size_t i = m; i-- > 0;) {
        for (std::size_t k = 0; k < H; ++k) carry[k] += dkeys[i][k];
        carry = nn::gru_step_backward(g, wp.fwd[i], carry, gg).dh;
      }
    }
    {
      const nn::GruRef g = nn::gru_ref(p, "wp.bwd");
      nn::GruGradRef gg = nn::gru_grad_ref(p, "wp.bwd");
      Vec carry(H, 0.0);
      // wp.bwd[j] processed waypoint m - 1 - j; walk processing order backwards.
      for (std::size_t j = m; j-- > 0;) {
        const std::size_t i = m - 1 - j;
        for (std::size_t k = 0; k < H; ++k) carry[k] += dkeys[i][H + k];
        carry = nn::gru_step_backward(g, wp.bwd[j], carry, gg).dh;
      }
    }
  }
  return total;
}

TrainingLog train_traj_gen(TrajGenerator& gen, const std::vector<TrajSample>& train,
                           const std::vector<TrajSample>& val, const TrainHyper& hyper) {
  if (train.empty()) throw InvalidInput("trajectory generator training set is empty");
  const std::vector<TrajSample>& monitor = val.empty() ? train : val;

  TrainingLog log;
  log.component = kTrajComponent;
  nn::OptimizerState opt = nn::make_adam_state(gen.params, {.learning_rate = hyper.learning_rate});
  gen.params.zero_grad();
  double best = traj_loss(gen, monitor, false);
  log.initial_val_loss = best;
  nn::ParamSet best_params = gen.params;

  std::vector<TrajSample> batch;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    const auto order = epoch_order(train.size(), hyper.seed, epoch);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + hyper.batch_size); ++i) {
        batch.push_back(train[order[i]]);
      }
      train_loss += traj_loss(gen, batch, true) * static_cast<double>(batch.size());
      nn::adam_update(gen.params, opt);
    }
    train_loss /= static_cast<double>(train.size());
    const double val_loss = traj_loss(gen, monitor, false);
    const bool improved = val_loss < best;
    if (improved) {
      best = val_loss;
      best_params = gen.params;
    }
    log.record({epoch, train_loss, val_loss, best, improved});
  }
  gen.params = best_params;
  gen.params.zero_grad();
  return log;
}

void save_traj_gen(const std::filesystem::path& path, const TrajGenerator& gen,
                   const nlohmann::json& extra_config) {
  nlohmann::json config = extra_config;
  config["net"] = gen.config_json();
  nn::save_checkpoint(path, kTrajComponent, gen.params, config);
}

TrajGenerator load_traj_gen(const std::filesystem::path& path, nlohmann::json* config_out) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.component != kTrajComponent) {
    throw IoError(path.string() + " holds a " + ck.component + " checkpoint, expected " + kTrajComponent);
  }
  TrajGenerator gen;
  if (ck.config.contains("net") && ck.config.at("net") != gen.config_json()) {
    throw IoError(path.string() + " has an unsupported trajectory generator layout");
  }
  nn::assign_params(gen.params, nn::params_to_json(ck.params));
  if (config_out != nullptr) *config_out = ck.config;
  return gen;
}

}  // namespace forecast

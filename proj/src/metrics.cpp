#include "forecast/metrics.hpp"

#include <charconv>
#include <limits>

#include "forecast/errors.hpp"

namespace forecast {

namespace {

void check_lengths(std::span<const Point> truth, std::span<const Point> candidate) {
  if (truth.empty()) throw InvalidInput("trajectory is empty");
  if (candidate.size() != truth.size()) {
    throw InvalidInput("candidate has " + std::to_string(candidate.size()) + " points, truth has " +
                       std::to_string(truth.size()));
  }
}

template <typename F>
BestOf best_of(std::span<const Point> truth, const std::vector<Polyline>& candidates, F metric) {
  if (candidates.empty()) throw InvalidInput("no candidate trajectories");
  BestOf best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double v = metric(truth, candidates[k]);
    if (v < best.value) best = {v, k};
  }
  return best;
}

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

double ade(std::span<const Point> truth, std::span<const Point> candidate) {
  check_lengths(truth, candidate);
  double s = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) s += distance(truth[t], candidate[t]);
  return s / static_cast<double>(truth.size());
}

double fde(std::span<const Point> truth, std::span<const Point> candidate) {
  check_lengths(truth, candidate);
  return distance(truth.back(), candidate.back());
}

BestOf min_ade(std::span<const Point> truth, const std::vector<Polyline>& candidates) {
  return best_of(truth, candidates, [](auto t, const Polyline& c) { return ade(t, c); });
}

BestOf min_fde(std::span<const Point> truth, const std::vector<Polyline>& candidates) {
  return best_of(truth, candidates, [](auto t, const Polyline& c) { return fde(t, c); });
}

Polyline constant_velocity_baseline(std::span<const Point> past, std::size_t t_pred) {
  if (past.size() < 2) throw InvalidInput("constant-velocity baseline needs at least 2 past points");
  const std::size_t n = past.size();
  const Point v = n >= 3 ? 0.5 * (past[n - 1] - past[n - 3]) : past[n - 1] - past[n - 2];
  Polyline out;
  out.reserve(t_pred);
  for (std::size_t t = 1; t <= t_pred; ++t) out.push_back(past[n - 1] + static_cast<double>(t) * v);
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const InstanceRecord& r : instances) {
    rows.push_back({{"instance_id", r.instance_id},
                    {"ade_best", r.ade_best},
                    {"fde_best", r.fde_best},
                    {"k_ade", r.k_ade},
                    {"k_fde", r.k_fde},
                    {"candidates", r.candidates},
                    {"baseline_ade", r.baseline_ade},
                    {"baseline_fde", r.baseline_fde}});
  }
  return {{"K", k},
          {"mADE", made},
          {"mFDE", mfde},
          {"baseline_mADE", baseline_made},
          {"baseline_mFDE", baseline_mfde},
          {"short_instances", short_instances},
          {"instances", rows}};
}

std::string EvalReport::to_csv() const {
  std::string out = "instance_id,ade_best,fde_best,k_ade,k_fde\n";
  for (const InstanceRecord& r : instances) {
    out += r.instance_id + ',' + num(r.ade_best) + ',' + num(r.fde_best) + ',' + std::to_string(r.k_ade) +
           ',' + std::to_string(r.k_fde) + '\n';
  }
  return out;
}

EvalReport evaluate(const std::vector<TrajectoryInstance>& test, const Predictor& predictor, std::size_t k) {
  if (test.empty()) throw InvalidInput("evaluation set is empty");
  if (k < 1) throw InvalidInput("K must be at least 1");
  EvalReport rep;
  rep.k = k;
  for (const TrajectoryInstance& inst : test) {
    const std::vector<Polyline> cands = predictor(inst);
    const BestOf a = min_ade(inst.future, cands);
    const BestOf f = min_fde(inst.future, cands);
    const Polyline base = constant_velocity_baseline(inst.past, inst.future.size());
    InstanceRecord r{inst.id(), a.value, f.value, a.k, f.k, cands.size(), ade(inst.future, base),
                     fde(inst.future, base)};
    if (cands.size() < k) ++rep.short_instances;
    rep.made += r.ade_best;
    rep.mfde += r.fde_best;
    rep.baseline_made += r.baseline_ade;
    rep.baseline_mfde += r.baseline_fde;
    rep.instances.push_back(std::move(r));
  }
  const double n = static_cast<double>(test.size());
  rep.made /= n;
  rep.mfde /= n;
  rep.baseline_made /= n;
  rep.baseline_mfde /= n;
  return rep;
}

}  // namespace forecast

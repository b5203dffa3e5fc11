#include <algorithm>
#include <numeric>

#include "srim/learn.hpp"

namespace srim {

void PbtConfig::validate() const {
  if (population < 2) throw std::invalid_argument("pbt: population must be >= 2");
  if (!(perturb > 0.0)) throw std::invalid_argument("pbt: perturb factor must be > 0");
  if (exploit_interval < 1) throw std::invalid_argument("pbt: exploit_interval must be >= 1");
  if (!(quantile > 0.0 && quantile <= 0.5)) throw std::invalid_argument("pbt: quantile must lie in (0, 0.5]");
}

std::vector<PreferenceProfile> pbt_schedule(const PbtConfig& config, std::span<const PbtMember> members,
                                            Rng& rng) {
  if (members.size() < 2) throw std::invalid_argument("pbt: population must be >= 2");
  if (!(config.perturb > 0.0)) throw std::invalid_argument("pbt: perturb factor must be > 0");
  const std::size_t size = members.size();
  std::vector<std::size_t> rank(size);
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return members[a].objective < members[b].objective;
  });
  const std::size_t q = std::clamp<std::size_t>(
      static_cast<std::size_t>(config.quantile * static_cast<double>(size)), 1, size / 2);

  std::vector<PreferenceProfile> next;
  for (const auto& m : members) next.push_back(m.profile);
  for (std::size_t b = 0; b < q; ++b) {
    const std::size_t low = rank[b];
    const std::size_t donor = rank[size - q + rng.below(q)];
    if (members[donor].objective > members[low].objective) next[low] = members[donor].profile;
    auto weights = next[low].weights();
    for (auto& w : weights)
      for (double* x : {&w.alpha, &w.beta, &w.omega})
        *x *= rng.bernoulli(0.5) ? config.perturb : 1.0 / config.perturb;
    next[low] = PreferenceProfile(std::move(weights), "pbt");
  }
  return next;
}

PbtRun run_pbt(const Scenario& scenario, const PreferenceProfile& initial, const TrainOptions& options,
               const PbtConfig& config) {
  config.validate();
  std::vector<Trainer> trainers;
  trainers.reserve(config.population);
  for (int k = 0; k < config.population; ++k) {
    TrainOptions o = options;
    o.seed = derive_seed(options.seed, "pbt-member", static_cast<std::uint64_t>(k));
    if (!options.checkpoint_dir.empty()) o.checkpoint_dir = options.checkpoint_dir / ("member_" + std::to_string(k));
    trainers.emplace_back(scenario, initial, o);
  }
  PbtRun run;
  run.profiles.push_back(std::vector<PreferenceProfile>(config.population, initial));
  Rng rng(derive_seed(options.seed, "pbt"));

  std::int64_t next_round = config.exploit_interval;
  while (!trainers.front().finished()) {
    for (auto& t : trainers) t.step_batch();
    const std::int64_t done = trainers.front().episodes_done();
    if (done < next_round || trainers.front().finished()) continue;
    next_round = (done / config.exploit_interval + 1) * config.exploit_interval;
    std::vector<PbtMember> members;
    for (auto& t : trainers) {
      const auto& logs = t.logs();
      const auto window = std::min<std::size_t>(logs.size(), static_cast<std::size_t>(config.exploit_interval));
      double sum = 0.0;
      for (std::size_t i = logs.size() - window; i < logs.size(); ++i) sum += utilitarian(logs[i]);
      members.push_back({t.profile(), window ? sum / static_cast<double>(window) : 0.0});
    }
    auto updated = pbt_schedule(config, members, rng);
    for (std::size_t k = 0; k < trainers.size(); ++k) trainers[k].set_profile(updated[k]);
    run.profiles.push_back(std::move(updated));
  }
  for (auto& t : trainers) {
    TrainResult r;
    r.learners = std::move(t.learners());
    r.logs = t.logs();
    r.updates = t.updates();
    run.members.push_back(std::move(r));
  }
  return run;
}

}  // namespace srim

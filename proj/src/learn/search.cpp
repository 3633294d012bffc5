#include "fairsim/learn/search.hpp"

#include "fairsim/rng.hpp"

namespace fairsim::learn {

namespace {

constexpr std::uint64_t kGbtSamplerSalt = 0x677464;
constexpr std::uint64_t kHoeffdingSamplerSalt = 0x686f66;

void check_spec(const SearchSpec& spec) {
  if (spec.n_candidates < 1) throw std::invalid_argument("SearchSpec: n_candidates < 1");
}

}  // namespace

std::vector<GbtParams> sample_gbt_candidates(const SearchSpec& spec) {
  check_spec(spec);
  const GbtSearchSpace& s = spec.gbt;
  if (s.depth_min > s.depth_max || s.lr_min > s.lr_max || s.trees_min > s.trees_max ||
      s.depth_min < 1 || s.lr_min <= 0 || s.trees_min < 1)
    throw std::invalid_argument("GbtSearchSpace: bad range");
  Rng rng(mix_seed(spec.seed, kGbtSamplerSalt));
  std::vector<GbtParams> out;
  out.reserve(static_cast<std::size_t>(spec.n_candidates));
  for (int k = 0; k < spec.n_candidates; ++k) {
    GbtParams p;
    p.max_depth = static_cast<int>(rng.uniform_int(s.depth_min, s.depth_max));
    p.learning_rate = rng.uniform(s.lr_min, s.lr_max);
    p.n_trees = static_cast<int>(rng.uniform_int(s.trees_min, s.trees_max));
    out.push_back(p);
  }
  return out;
}

std::vector<HoeffdingParams> sample_hoeffding_candidates(const SearchSpec& spec) {
  check_spec(spec);
  const HoeffdingSearchSpace& s = spec.hoeffding;
  if (s.grace_min > s.grace_max || s.tau_min > s.tau_max || s.delta_min > s.delta_max ||
      s.grace_min < 1 || s.tau_min < 0 || s.delta_min <= 0 || s.delta_max >= 1)
    throw std::invalid_argument("HoeffdingSearchSpace: bad range");
  Rng rng(mix_seed(spec.seed, kHoeffdingSamplerSalt));
  std::vector<HoeffdingParams> out;
  out.reserve(static_cast<std::size_t>(spec.n_candidates));
  for (int k = 0; k < spec.n_candidates; ++k) {
    HoeffdingParams p;
    p.grace_period = static_cast<int>(rng.uniform_int(s.grace_min, s.grace_max));
    p.tie_threshold = rng.uniform(s.tau_min, s.tau_max);
    p.split_confidence = rng.log_uniform(s.delta_min, s.delta_max);
    out.push_back(p);
  }
  return out;
}

}  // namespace fairsim::learn

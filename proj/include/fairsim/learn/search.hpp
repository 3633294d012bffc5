#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fairsim/learn/gbt.hpp"
#include "fairsim/learn/hoeffding.hpp"

namespace fairsim::learn {

struct GbtSearchSpace {
  int depth_min = 2, depth_max = 5;
  double lr_min = 0.05, lr_max = 0.30;
  int trees_min = 50, trees_max = 200;
};

struct HoeffdingSearchSpace {
  int grace_min = 100, grace_max = 500;
  double tau_min = 0.01, tau_max = 0.10;
  double delta_min = 1e-9, delta_max = 1e-5;  // sampled log-uniformly
};

struct SearchSpec {
  int n_candidates = 3;  // the online pipeline raises this to 10
  std::uint64_t seed = 0;
  GbtSearchSpace gbt;
  HoeffdingSearchSpace hoeffding;
};

// Candidate draws are a pure function of the seed; the two samplers use
// decorrelated child streams of it.
std::vector<GbtParams> sample_gbt_candidates(const SearchSpec& spec);
std::vector<HoeffdingParams> sample_hoeffding_candidates(const SearchSpec& spec);

template <typename P>
struct SearchOutcome {
  P best{};
  std::size_t best_index = 0;
  std::vector<double> losses;
};

// argmin of the evaluated losses; exact ties keep the earliest candidate.
template <typename P, typename Eval>
SearchOutcome<P> pick_best(const std::vector<P>& candidates, Eval&& evaluate) {
  if (candidates.empty()) throw std::invalid_argument("pick_best: no candidates");
  SearchOutcome<P> out;
  out.losses.reserve(candidates.size());
  for (const P& c : candidates) out.losses.push_back(evaluate(c));
  for (std::size_t i = 1; i < out.losses.size(); ++i)
    if (out.losses[i] < out.losses[out.best_index]) out.best_index = i;
  out.best = candidates[out.best_index];
  return out;
}

}  // namespace fairsim::learn

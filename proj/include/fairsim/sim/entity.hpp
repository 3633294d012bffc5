#pragma once

#include <cstdint>

#include "fairsim/rng.hpp"
#include "fairsim/sim/config.hpp"
#include "fairsim/types.hpp"

namespace fairsim::sim {

// Lifecycle: active -> applied -> processed, in that order only.
enum class LifecycleState : std::uint8_t { active = 0, applied = 1, processed = 2 };

struct Entity {
  int id = -1;
  Group group = Group::A;
  double wealth = 0.0;
  int education = 0;         // ordinal, 0..kEducationLevels-1
  double trust = 0.0;        // [0,1], evolves through peer contact
  double fin_lit = 0.0;      // [0,1], fixed at spawn
  double credit_score = 0.0; // [0,1], fixed at spawn
  int loan_hist = 0;         // number of past loans
  double loan_amount = 0.0;  // requested amount
  bool has_job = false;
  bool has_car = false;
  bool has_house = false;
  LifecycleState state = LifecycleState::active;
};

// Wealth is normalized against this fixed scale wherever it feeds a [0,1]
// quantity, independent of the configured sampling ranges.
inline constexpr double kWealthScale = 130.0;

// Monotone non-decreasing in both arguments; range [0.05, 1].
double derive_trust(int education, double wealth);

// Monotone non-decreasing in all three arguments; range [0, 1].
double derive_finlit(int education, double wealth, double trust);

// Draws a fresh entity for the given group parameters. Wealth is uniform in
// [wealth_min, wealth_max]; education categorical; loan_hist Poisson;
// credit_score a clamped affine blend of wealth, fin_lit and loan_hist plus
// seeded noise; loan_amount log-uniform in [0.2, 2.0] times wealth.
Entity spawn_entity(int id, Group group, const ScenarioConfig& cfg, Rng& rng);

// Qualification score in [0,1]: a fixed-weight sum of normalized attributes.
// Deterministic in the entity's attributes and monotone in each of them.
double score_applicant(const Entity& e);

// score * (1 + beta) for group A, score * (1 - beta) for group B, clamped
// back to [0,1].
double apply_label_bias(double raw_score, Group g, double beta);

// Threshold the biased score, then flip the outcome with label_flip_prob.
bool draw_label(double biased_score, const ScenarioConfig& cfg, Rng& rng);

// draw_label plus the applied -> processed transition on e. Throws
// std::logic_error unless e has applied.
bool assign_label(Entity& e, double biased_score, const ScenarioConfig& cfg, Rng& rng);

}  // namespace fairsim::sim

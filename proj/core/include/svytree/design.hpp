#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "svytree/data.hpp"

namespace svytree {

/// Single-stage fixed-size probability-proportional-to-size design.
struct PpsDesign {
  std::vector<double> size_measures;
  std::size_t n = 0;

  void validate() const;
};

struct DrawnSample {
  std::vector<std::size_t> indices;  // ascending population row indices
  std::vector<double> inclusion_probs;
  std::vector<double> weights;  // 1 / inclusion_probs
};

/// pi_i = n z_i / sum(z), with units whose pi would exceed 1 fixed at 1
/// (certainty units) and the remaining sample size re-spread over the rest
/// until no value exceeds 1. Sum of pi equals n.
std::vector<double> pps_inclusion_probs(std::span<const double> z, std::size_t n);

/// Certainty units plus systematic PPS over a seeded random permutation of
/// the remaining units. Output depends only on (design, seed).
DrawnSample draw_pps_sample(const PpsDesign& design, std::uint64_t seed);

/// Same draw from precomputed inclusion probabilities (sum must be integral).
DrawnSample draw_pps_sample(std::span<const double> inclusion_probs, std::uint64_t seed);

/// Sample rows of the population with design weights 1/pi.
ObservedDataset take_sample(const FinitePopulation& pop, const DrawnSample& sample);

struct DesignSummary {
  std::size_t n = 0;
  std::size_t certainty_count = 0;
  double min_pi = 0.0;
  double max_pi = 0.0;
  double cv_pi = 0.0;     // population sd / mean
  double cor_y_pi = 0.0;  // 0 when either variable is constant
  double sampling_fraction = 0.0;
  double pop_second_moment = 0.0;  // mean of y^2
};

DesignSummary design_summary(const FinitePopulation& pop, std::span<const double> pi);

/// CSV with columns design,n,certainty_units,min_pi,max_pi,cv_pi,cor_y_pi,sampling_fraction.
void write_design_summaries(std::ostream& out,
                            const std::vector<std::pair<std::string, DesignSummary>>& rows);

}  // namespace svytree

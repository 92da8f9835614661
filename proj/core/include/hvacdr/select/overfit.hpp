// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hvacdr/nn/train.hpp"

namespace hvacdr::select {

inline constexpr double kPass = 0.0;
inline constexpr double kFail = 5.0;

struct ProbeOptions {
  int K = 5;
  double dp_unit = 3.0;  // P_rated / 10
  double p_max = 30.0;
  double slack = 1e-9;
};

// Scores for one day: rows are hours 1..24, columns are the signed steps
// +1..+K followed by -1..-K.
using DayScores = std::vector<std::vector<double>>;

// Shifts every power tap of the day by +-k*dp_unit (clipped) and checks that
// the predicted temperature moves the right way relative to step k-1.
DayScores perturbation_scores(const nn::NetworkSpec& net, const nn::Timeline& day,
                              const ProbeOptions& options = {});

struct StepStats {
  double avg = 0.0;
  double std = 0.0;
};

// Population mean and (E[s^2] - avg^2)^(1/2) over the hours of one column.
StepStats step_stats(std::span<const double> scores);

struct OverfitScore {
  double avg = 0.0;
  double std = 0.0;  // mean of per-step stds, then mean over days
  double of = 0.0;   // c1*avg + c2*std
  // Alternative reading: std over steps of the per-step averages, then std
  // over days of the per-day averages.
  double std_alt = 0.0;
  double of_alt = 0.0;
};

OverfitScore aggregate(const std::vector<DayScores>& days, double c1 = 0.5, double c2 = 0.5);

struct SearchRange {
  std::vector<int> tau1{1, 2, 3, 4};
  std::vector<int> tau2{1, 2, 3, 4};
  std::vector<int> tau3{1, 2, 3, 4};
  std::vector<int> layers{1, 2, 3, 4};
  std::vector<int> units{5, 10, 15, 20, 25};
  std::vector<nn::Activation> activations{nn::Activation::sigmoid, nn::Activation::relu};
  std::size_t cap = 512;

  std::size_t grid_size() const;
  void validate() const;
};

struct Candidate {
  int tau1 = 1, tau2 = 1, tau3 = 1;
  nn::Architecture arch;
  std::size_t index = 0;  // position in the full grid enumeration

  std::string label() const;
};

// Grid candidates in enumeration order; when the grid exceeds the cap a
// seeded uniform subsample (kept in enumeration order) is returned.
std::vector<Candidate> enumerate_candidates(const SearchRange& range, std::uint64_t seed);

struct CandidateReport {
  Candidate candidate;
  int parameters = 0;  // per zone network
  std::vector<double> nmse_train, nmse_test;  // per zone
  OverfitScore score;                         // mean over zones
  bool survived = false;
  bool selected = false;
  std::string error;  // non-empty when training failed
};

struct SelectOptions {
  double e_th = 0.9;
  int M = 10;
  ProbeOptions probe;
  nn::TrainOptions train;
  std::vector<int> zones{1, 2, 3, 4, 5};
  int jobs = 1;
};

struct Selection {
  Candidate best;
  std::vector<nn::NetworkSpec> nets;  // one per zone, in options.zones order
  std::vector<nn::TrainReport> reports;
  std::vector<CandidateReport> table;
};

// Throws selection_failed when no candidate clears e_th.
Selection select_architecture(const thermal::Dataset& data, const SearchRange& range,
                              std::uint64_t seed, const SelectOptions& options = {});

std::string report_csv(const std::vector<CandidateReport>& rows);

}  // namespace hvacdr::select

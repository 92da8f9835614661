// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvacdr/nn/train.hpp"
#include "hvacdr/sched/scheduler.hpp"

namespace hvacdr::slamp {

using thermal::Hourly;
using thermal::ScenarioDay;

// Powers and scheduled-zone temperatures of one day.
struct Trajectory {
  ScenarioDay scenario;
  Hourly power{};
  std::vector<Hourly> temps;  // per corpus zone
};

struct CorpusDay {
  Trajectory prior;    // supplies the delayed taps of hour 1
  Trajectory optimal;  // the day's schedule and its zone-network temperatures
  double e_c = 0.0;
  double t_v = 0.0;
  sched::SolverStats solver;
};

struct Corpus {
  std::vector<int> zones;
  std::vector<CorpusDay> days;
  std::vector<std::string> skipped;  // "<date>: <reason>"
  std::size_t records() const { return days.size() * thermal::kHours; }
};

struct CorpusOptions {
  sched::BuildOptions build;
  milp::BnbConfig bnb;
  std::vector<thermal::ZoneBand> bands = thermal::default_bands();
  double p_rated = 30.0;
  double hard_margin = 2.0;
};

// Comfort rules for one corpus day (C_V follows the day's prices).
sched::ComfortSpec day_comfort(const std::vector<int>& zones, const ScenarioDay& day, const CorpusOptions& options);

// History whose prior day is the given trajectory.
sched::History history_from(const Trajectory& prior, const std::vector<int>& zones);

// Solves the days in order; each day's schedule becomes the next day's
// prior. Days without a schedule are skipped and logged, and the following
// day starts from the all-off rollout of the skipped day.
Corpus generate_corpus(const std::vector<ScenarioDay>& scenarios, const std::vector<nn::NetworkSpec>& nets,
                       const sched::History& history, const CorpusOptions& options = {});

// Timeline of one corpus day with the optimal trajectory in the power and
// temperature series.
nn::Timeline day_timeline(const CorpusDay& day);

// Teacher-forced rows of the given days: inputs x samples, target P_opt.
void build_rows(const Corpus& corpus, const std::vector<int>& days, const nn::InputLayout& layout,
                Eigen::MatrixXd& X, Eigen::VectorXd& y);

struct Split {
  std::vector<int> train;  // day indices, shuffled order
  std::vector<int> test;
};
// Whole days are shuffled, then split; throws input_error below 2 days.
Split shuffle_split(int n_days, std::uint64_t seed, double train_fraction = 0.8);

struct DnnCandidate {
  std::array<int, 4> taus{};  // price, environment, temperature, power
  nn::Architecture arch;
  std::string label() const;
};

struct SearchRanges {
  int tau_lo = 0, tau_hi = 4;
  int layers_lo = 1, layers_hi = 10;
  std::vector<int> units{5, 10, 15, 20};
  std::vector<nn::Activation> activations{nn::Activation::sigmoid, nn::Activation::relu};
  int draws = 128;
  void validate() const;
};

// Uniform seeded draws from the ranges.
std::vector<DnnCandidate> sample_candidates(const SearchRanges& ranges, std::uint64_t seed);

struct CompositeScore {
  double e_pr = 0.0, e_tr = 0.0;  // power, temperature NMSE on training days
  double e_pe = 0.0, e_te = 0.0;  // same on test days
  double e_ec = 0.0, e_tv = 0.0;  // per-day E_C and T_V on test days
  std::array<double, 6> weights{};
  // E_C/T_V terms folded into e_pe: fewer than 5 test days or an undefined
  // NMSE (constant target).
  bool ec_folded = false, tv_folded = false;
  double e_c = 0.0;
};

// Weighted sum with the folding rules applied; weights must sum to 1.
CompositeScore composite(double e_pr, double e_tr, double e_pe, double e_te, const nn::Nmse& e_ec,
                         const nn::Nmse& e_tv, int test_days, const std::array<double, 6>& weights);

struct SearchOptions {
  SearchRanges ranges;
  std::array<double, 6> weights{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  nn::TrainOptions train;
  CorpusOptions corpus;  // comfort rules used when scoring E_C and T_V
  int jobs = 1;
};

struct CandidateReport {
  DnnCandidate candidate;
  int parameters = 0;
  CompositeScore score;
  std::string error;  // non-empty when training failed
  bool selected = false;
};

struct SearchResult {
  nn::NetworkSpec best;
  CompositeScore score;
  int best_index = -1;
  std::vector<CandidateReport> table;
};

// Trains every candidate on the training days and scores closed-loop
// predictions on both splits. Highest e_c wins, ties to fewer parameters.
// Throws selection_failed when every candidate fails to train.
SearchResult search_dnn(const Corpus& corpus, const Split& split, const std::vector<nn::NetworkSpec>& zone_nets,
                        std::uint64_t seed, const SearchOptions& options = {});

// Trains one candidate and scores it as search_dnn does.
CandidateReport evaluate_candidate(const Corpus& corpus, const Split& split,
                                   const std::vector<nn::NetworkSpec>& zone_nets, const DnnCandidate& candidate,
                                   std::uint64_t seed, const SearchOptions& options, nn::NetworkSpec* net = nullptr);

// Hour-by-hour prediction with predicted powers and zone-network
// temperatures fed back into the delayed taps. Powers are clamped to
// [0, P_rated] and zero from t_e on. Throws input_error on missing taps.
sched::ScheduleResult meta_predict(const nn::NetworkSpec& meta, const ScenarioDay& day, const sched::History& history,
                                   const std::vector<nn::NetworkSpec>& zone_nets, const sched::ComfortSpec& comfort);

std::string search_csv(const std::vector<CandidateReport>& rows);

// Directory form: one CSV per day plus index.json with per-day E_C and T_V.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus read_corpus(const std::filesystem::path& dir);

// Registry of network files named by content hash. Returns the hash.
std::string registry_put(const nn::NetworkSpec& net, const std::filesystem::path& dir);
nn::NetworkSpec registry_get(const std::filesystem::path& dir, const std::string& hash);

}  // namespace hvacdr::slamp
